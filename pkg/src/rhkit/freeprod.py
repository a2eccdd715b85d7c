"""The free product F_S * P_1 * ... * P_q in syllable normal form."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .factors import Factor, FreeFactor
from .words import GenSymbol, MalformedInput, ParLetter


@dataclass(frozen=True)
class FactorElement:
    factor: int
    value: object

    def __repr__(self):
        return f"FactorElement({self.factor}, {self.value!r})"


@dataclass(frozen=True)
class FPElement:
    syllables: tuple = ()

    def __len__(self):
        return len(self.syllables)

    def __iter__(self):
        return iter(self.syllables)

    def is_identity(self):
        return not self.syllables


IDENTITY = FPElement(())


class FreeProduct:
    """Factor 0 is the free group on ``free_gens``; factors 1..q are parabolic."""

    def __init__(self, free_gens: Sequence[str], parabolics: Sequence[Factor] = ()):
        self.factors: list[Factor] = [FreeFactor(free_gens)] + list(parabolics)
        names = [f.name for f in parabolics]
        if len(set(names)) != len(names):
            raise MalformedInput("duplicate parabolic names")
        self.by_name = {f.name: i + 1 for i, f in enumerate(parabolics)}

    @property
    def q(self):
        return len(self.factors) - 1

    @property
    def free(self) -> FreeFactor:
        return self.factors[0]

    def factor(self, k: int) -> Factor:
        if not isinstance(k, int) or not 0 <= k < len(self.factors):
            raise MalformedInput(f"unknown factor index {k!r}")
        return self.factors[k]

    # -- the group law -------------------------------------------------
    def normalize(self, raw: Iterable[FactorElement]) -> FPElement:
        stack: list[FactorElement] = []
        for s in raw:
            f = self.factor(s.factor)
            if stack and stack[-1].factor == s.factor:
                top = stack.pop()
                v = f.mul(top.value, s.value)
            else:
                v = f.mul(f.identity(), s.value)
            if not f.is_identity(v):
                stack.append(FactorElement(s.factor, v))
        return FPElement(tuple(stack))

    def multiply(self, a: FPElement, b: FPElement) -> FPElement:
        return self.normalize(a.syllables + b.syllables)

    def inverse(self, a: FPElement) -> FPElement:
        return FPElement(tuple(FactorElement(s.factor, self.factors[s.factor].inv(s.value))
                               for s in reversed(a.syllables)))

    def product(self, elems: Iterable[FPElement]) -> FPElement:
        raw = []
        for e in elems:
            raw.extend(e.syllables)
        return self.normalize(raw)

    def is_valid(self, a: FPElement) -> bool:
        prev = None
        for s in a.syllables:
            f = self.factor(s.factor)
            if f.is_identity(s.value) or s.factor == prev:
                return False
            prev = s.factor
        return True

    # -- letters and long normal forms ------------------------------------
    def long_normal_form(self, a: FPElement) -> tuple:
        out = []
        for s in a.syllables:
            if s.factor == 0:
                out.extend(s.value)
            else:
                out.append(ParLetter(s.factor, s.value))
        return tuple(out)

    def from_letters(self, letters: Iterable) -> FPElement:
        raw = []
        for x in letters:
            raw.append(self.letter_syllable(x))
        return self.normalize(raw)

    def letter_syllable(self, x) -> FactorElement:
        if isinstance(x, GenSymbol):
            if x.name not in self.free.gens:
                raise MalformedInput(f"unknown generator {x}")
            return FactorElement(0, (x,))
        if isinstance(x, ParLetter):
            self.factor(x.factor)
            return FactorElement(x.factor, x.value)
        raise MalformedInput(f"not a letter: {x!r}")

    def letter(self, x) -> FPElement:
        return self.normalize([self.letter_syllable(x)])

    def letter_inverse(self, x):
        if isinstance(x, GenSymbol):
            return x.inverse()
        return ParLetter(x.factor, self.factors[x.factor].inv(x.value))

    def letter_key(self, x):
        """Deterministic letter order: free letters first, then factors 1..q."""
        if isinstance(x, GenSymbol):
            return (0, self.free.key((x,)))
        return (x.factor, self.factors[x.factor].key(x.value))

    def syllable_count(self, a: FPElement) -> int:
        return len(a.syllables)

    # -- text ---------------------------------------------------------------
    def render_letter(self, x) -> str:
        if isinstance(x, GenSymbol):
            return str(x)
        return self.factors[x.factor].render(x.value)

    def render(self, a: FPElement) -> str:
        """Long normal form, letters separated by spaces; ``1`` for identity."""
        lnf = self.long_normal_form(a)
        return " ".join(self.render_letter(x) for x in lnf) if lnf else "1"

    def render_syllables(self, a: FPElement) -> str:
        parts = []
        for s in a.syllables:
            parts.append(self.factors[s.factor].render(s.value))
        return "(" + "; ".join(parts) + ")"

    def tokenize(self, text: str) -> list:
        """Split text into letters: single free letters or ``NAME[..]``/``NAME(..)``."""
        names = sorted(self.by_name, key=len, reverse=True)
        out = []
        i = 0
        while i < len(text):
            ch = text[i]
            if ch.isspace() or ch == "1" or ch in ".·*":
                i += 1
                continue
            for name in names:
                if text.startswith(name, i) and i + len(name) < len(text) \
                        and text[i + len(name)] in "[(":
                    opener = text[i + len(name)]
                    closer = "]" if opener == "[" else ")"
                    j = text.find(closer, i + len(name))
                    if j < 0:
                        raise MalformedInput(f"unterminated parabolic letter at {i}")
                    k = self.by_name[name]
                    v = self.factors[k].parse_value(text[i + len(name) + 1:j])
                    if not self.factors[k].is_identity(v):
                        out.append(ParLetter(k, v))
                    i = j + 1
                    break
            else:
                if not ch.isalpha():
                    raise MalformedInput(f"unexpected character {ch!r} at {i}")
                x = GenSymbol(ch.lower(), 1 if ch.islower() else -1)
                if x.name not in self.free.gens:
                    raise MalformedInput(f"letter {ch!r} is not a declared generator")
                out.append(x)
                i += 1
        return out

    def parse(self, text: str) -> FPElement:
        return self.from_letters(self.tokenize(text))


# Module-level spellings of the group operations.

def fp_normalize(raw: Iterable[FactorElement], fp: FreeProduct) -> FPElement:
    return fp.normalize(raw)


def fp_multiply(a: FPElement, b: FPElement, fp: FreeProduct) -> FPElement:
    return fp.multiply(a, b)


def fp_inverse(a: FPElement, fp: FreeProduct) -> FPElement:
    return fp.inverse(a)


def long_normal_form(a: FPElement, fp: FreeProduct) -> tuple:
    return fp.long_normal_form(a)

