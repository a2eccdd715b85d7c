"""Letters and words over a symmetric generating set.

A generator is a lowercase name; its inverse is written in uppercase.
Words are plain tuples of letters so they hash and compare cheaply.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class MalformedInput(ValueError):
    """Raised for syntactically or semantically invalid input."""


@dataclass(frozen=True, order=True)
class GenSymbol:
    name: str
    sign: int = 1

    def __post_init__(self):
        if not self.name:
            raise MalformedInput("generator name must be nonempty")
        if self.sign not in (1, -1):
            raise MalformedInput(f"bad sign {self.sign!r}")

    def inverse(self) -> "GenSymbol":
        return GenSymbol(self.name, -self.sign)

    def __str__(self):
        return self.name if self.sign > 0 else self.name.upper()

    def __repr__(self):
        return f"GenSymbol({str(self)!r})"


@dataclass(frozen=True, order=True)
class ParLetter:
    """A single letter of a parabolic factor H_k: an element of that group.

    ``value`` is the factor's canonical form (coordinate tuple, table index
    or normal-form word) and is never the identity.
    """
    factor: int
    value: tuple

    def __repr__(self):
        return f"ParLetter({self.factor}, {self.value!r})"


Word = tuple


def sym(text: str) -> GenSymbol:
    if len(text) != 1 or not text.isalpha():
        raise MalformedInput(f"not a single-letter generator: {text!r}")
    return GenSymbol(text.lower(), 1 if text.islower() else -1)


def parse_word(text: str) -> tuple:
    """Parse a string such as ``abAB`` (whitespace ignored, ``1`` = empty)."""
    out = []
    for ch in text:
        if ch.isspace() or ch == "1":
            continue
        out.append(sym(ch))
    return tuple(out)


def letter_inverse(x):
    if isinstance(x, GenSymbol):
        return x.inverse()
    raise TypeError(f"no generic inverse for {x!r}")


def word_inverse(w: Sequence, inv=letter_inverse) -> tuple:
    return tuple(inv(x) for x in reversed(w))


def free_reduce(w: Iterable, inv=letter_inverse) -> tuple:
    stack: list = []
    for x in w:
        if stack and stack[-1] == inv(x):
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def cyclic_reduce(w: Sequence, inv=letter_inverse) -> tuple:
    w = free_reduce(w, inv)
    i, j = 0, len(w) - 1
    while i < j and w[i] == inv(w[j]):
        i += 1
        j -= 1
    return tuple(w[i:j + 1])


def rotations(w: Sequence):
    for i in range(len(w)):
        yield tuple(w[i:]) + tuple(w[:i])


def min_rotation(w: Sequence, key=None) -> tuple:
    """Least rotation of a cyclic word (under ``key`` applied letterwise)."""
    if not w:
        return ()
    if key is None:
        return min(rotations(w))
    return min(rotations(w), key=lambda r: tuple(key(x) for x in r))


def word_str(w: Sequence) -> str:
    return "".join(str(x) for x in w) if w else "1"


def symmetric_alphabet(names: Sequence[str]) -> list:
    """Generators in declared order followed by their inverses."""
    return [GenSymbol(n, 1) for n in names] + [GenSymbol(n, -1) for n in names]
