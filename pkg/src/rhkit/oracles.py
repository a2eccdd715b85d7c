"""Word-problem and normal-form oracles.

An oracle pair works on words over some generator names.  The built-in
families are free groups, free abelian groups, abelian groups with torsion,
finite groups given by permutations or tables, and free products of
those via the free-product normal form.
"""
from __future__ import annotations

import threading
from collections import deque
from typing import Callable, Sequence

from .factors import AbelianFactor, FiniteFactor, Unsupported
from .words import GenSymbol, MalformedInput, free_reduce


class WPOracle:
    def __init__(self, fn: Callable, provenance: str):
        self.fn = fn
        self.provenance = provenance

    def __call__(self, w) -> bool:
        return bool(self.fn(tuple(w)))

    def __repr__(self):
        return f"WPOracle({self.provenance})"


class NFOracle:
    def __init__(self, fn: Callable, provenance: str):
        self.fn = fn
        self.provenance = provenance

    def __call__(self, w) -> tuple:
        return tuple(self.fn(tuple(w)))

    def __repr__(self):
        return f"NFOracle({self.provenance})"


def serialized(fn: Callable) -> Callable:
    """Wrap a non-reentrant external procedure behind a lock."""
    lock = threading.Lock()

    def call(*args):
        with lock:
            return fn(*args)
    return call


def _abelian_pair(factor: AbelianFactor, tag: str):
    def wp(w):
        return factor.is_identity(factor.value_of_word(w))

    def nf(w):
        return factor.word_of_value(factor.value_of_word(w))
    return WPOracle(wp, tag), NFOracle(nf, tag)


def _free_pair(tag: str):
    def wp(w):
        return not free_reduce(w)
    return WPOracle(wp, tag), NFOracle(free_reduce, tag)


def _perm_pair(perms: dict, tag: str):
    """Finite group given by permutations of 0..n-1 for each generator."""
    n = len(next(iter(perms.values()))) if perms else 1
    ident = tuple(range(n))
    inv = {}
    for g, p in perms.items():
        q = [0] * n
        for i, j in enumerate(p):
            q[j] = i
        inv[g] = tuple(q)

    def perm_of(w):
        cur = ident
        for x in w:
            if x.name not in perms:
                raise MalformedInput(f"generator {x.name!r} not in table")
            p = perms[x.name] if x.sign > 0 else inv[x.name]
            cur = tuple(p[i] for i in cur)
        return cur

    # shortlex representatives by BFS over the Cayley graph
    alpha = [GenSymbol(g, 1) for g in perms] + [GenSymbol(g, -1) for g in perms]
    rep = {ident: ()}
    q = deque([ident])
    while q:
        cur = q.popleft()
        for x in alpha:
            p = perms[x.name] if x.sign > 0 else inv[x.name]
            nxt = tuple(p[i] for i in cur)
            if nxt not in rep:
                rep[nxt] = rep[cur] + (x,)
                q.append(nxt)

    def wp(w):
        return perm_of(w) == ident

    def nf(w):
        return rep[perm_of(w)]
    return WPOracle(wp, tag), NFOracle(nf, tag)


def family_oracles(family: str, gens: Sequence[str] = ()):
    """Oracles for a whole-group family tag such as ``builtin:free``.

    Recognized tags: ``free``, ``free-abelian`` (alias ``abelian``),
    ``cyclic:<n>`` (every generator maps to the generator of ℤ/n) and
    ``table:<file>`` (permutation images, one ``gen: i0 i1 ...`` per line).
    """
    tag = family
    if family.startswith("builtin:"):
        family = family[len("builtin:"):]
    gens = tuple(gens)
    if family == "free":
        return _free_pair(tag)
    if family in ("free-abelian", "abelian"):
        return _abelian_pair(AbelianFactor("Z", len(gens), (), gens), tag)
    if family.startswith("cyclic:"):
        n = int(family.split(":", 1)[1])
        perms = {g: tuple((i + 1) % n for i in range(n)) for g in gens}
        return _perm_pair(perms, tag)
    if family.startswith("table:"):
        with open(family.split(":", 1)[1], encoding="utf-8") as fh:
            perms = parse_perm_table(fh.read())
        return _perm_pair(perms, tag)
    raise Unsupported(f"unknown oracle family {tag!r}")


def parse_perm_table(text: str) -> dict:
    perms = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise MalformedInput(f"line {lineno}: expected 'gen: images'")
        g, imgs = line.split(":", 1)
        perm = tuple(int(x) for x in imgs.split())
        if sorted(perm) != list(range(len(perm))):
            raise MalformedInput(f"line {lineno}: not a permutation")
        perms[g.strip()] = perm
    if perms and len({len(p) for p in perms.values()}) != 1:
        raise MalformedInput("permutations of different degrees")
    return perms


def builtin_oracles(spec, gens: Sequence[str] = ()):
    """(WPOracle, NFOracle) for a ParabolicSpec or a whole-group family tag.

    For a spec the oracles act on words over the spec's generator names.
    """
    if isinstance(spec, str):
        return family_oracles(spec, gens)
    kind = spec.kind
    if kind in ("free-abelian", "abelian"):
        f = spec.make_factor()
        return _abelian_pair(f, f"builtin:{kind}")
    if kind == "finite":
        f: FiniteFactor = spec.make_factor()
        if not spec.gens:
            raise Unsupported(f"finite parabolic {spec.name} needs named generators for words")
        perms = {g: tuple(f.mul(i, f.gens[g]) for i in range(f.n)) for g in spec.gens}
        return _perm_pair(perms, "builtin:finite")
    if kind == "oracle":
        if spec.procedure is None:
            raise Unsupported(f"oracle-backed parabolic {spec.name} has no procedure")
        if callable(spec.procedure):
            nf = serialized(spec.procedure)
            return WPOracle(lambda w: not nf(w), "external"), NFOracle(nf, "external")
        return family_oracles(spec.procedure, spec.gens)
    raise Unsupported(f"no built-in oracle for kind {kind!r}")


def group_wp(pres, family: str):
    """Word problem of Γ on relative words: parabolic letters are embedded first."""
    wp, _ = family_oracles(family, pres.generators)

    def fn(w):
        return wp(pres.to_X_word(w))
    return WPOracle(fn, wp.provenance)
