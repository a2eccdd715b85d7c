"""Factor groups of a free product: the free factor and the parabolic kinds.

Every factor exposes the same small interface on its canonical values:
``identity``, ``mul``, ``inv``, ``is_identity``, ``key`` (a sort key),
``render``, ``parse_value``, ``norm`` (word length in the factor's own
generators) and ``ball`` (nonidentity elements up to a norm, in ``key``
order).
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from typing import Callable, Sequence

from .words import GenSymbol, MalformedInput, free_reduce, parse_word, word_str


class Unsupported(RuntimeError):
    """Raised when an operation needs data or an oracle that is missing."""


class Factor:
    name = "?"

    def identity(self):
        raise NotImplementedError

    def is_identity(self, u) -> bool:
        return u == self.identity()

    def mul(self, u, v):
        raise NotImplementedError

    def inv(self, u):
        raise NotImplementedError

    def pow(self, u, n: int):
        if n < 0:
            u, n = self.inv(u), -n
        out = self.identity()
        for _ in range(n):
            out = self.mul(out, u)
        return out

    def product(self, values):
        out = self.identity()
        for v in values:
            out = self.mul(out, v)
        return out

    def key(self, u):
        return (self.norm(u), u)

    def letters(self) -> list:
        """Generators followed by their inverses, as canonical values."""
        raise NotImplementedError

    def norm(self, u) -> int:
        raise NotImplementedError

    def ball(self, r: int) -> list:
        raise NotImplementedError

    def render(self, u) -> str:
        raise NotImplementedError

    def parse_value(self, text: str):
        raise NotImplementedError

    def is_finite(self) -> bool:
        return False


class FreeFactor(Factor):
    """The free group on ``gens``; values are freely reduced GenSymbol tuples."""

    def __init__(self, gens: Sequence[str]):
        self.gens = tuple(gens)
        self.name = "F"

    def identity(self):
        return ()

    def mul(self, u, v):
        return free_reduce(tuple(u) + tuple(v))

    def inv(self, u):
        return tuple(x.inverse() for x in reversed(u))

    def alphabet(self) -> list:
        return [GenSymbol(n, 1) for n in self.gens] + [GenSymbol(n, -1) for n in self.gens]

    def letter_index(self, x: GenSymbol) -> int:
        return self.alphabet().index(x)

    def key(self, u):
        order = {x: i for i, x in enumerate(self.alphabet())}
        return (len(u), tuple(order.get(x, len(order)) for x in u))

    def letters(self):
        return [(x,) for x in self.alphabet()]

    def norm(self, u):
        return len(u)

    def ball(self, r):
        out = []
        frontier = [()]
        alpha = self.alphabet()
        for _ in range(r):
            nxt = []
            for w in frontier:
                for x in alpha:
                    if w and w[-1] == x.inverse():
                        continue
                    nxt.append(w + (x,))
            out.extend(nxt)
            frontier = nxt
        return sorted(out, key=self.key)

    def render(self, u):
        return word_str(u)

    def parse_value(self, text):
        return free_reduce(parse_word(text))


class AbelianFactor(Factor):
    """ℤ^rank × ℤ/t_1 × … ; values are integer tuples, torsion coords in [0, t)."""

    def __init__(self, name: str, rank: int, torsion: Sequence[int] = (), gens: Sequence[str] = ()):
        if rank < 0:
            raise MalformedInput("rank must be nonnegative")
        for t in torsion:
            if t < 2:
                raise MalformedInput(f"torsion order {t} must be at least 2")
        self.name = name
        self.rank = rank
        self.orders = (0,) * rank + tuple(torsion)
        n = len(self.orders)
        if gens and len(gens) != n:
            raise MalformedInput(f"{name}: expected {n} generator names, got {len(gens)}")
        self.gens = tuple(gens) if gens else tuple(f"{name.lower()}{i + 1}" for i in range(n))

    @property
    def dim(self):
        return len(self.orders)

    def reduce(self, v):
        v = tuple(int(c) for c in v)
        if len(v) != self.dim:
            raise MalformedInput(f"{self.name}: expected {self.dim} coordinates, got {len(v)}")
        return tuple(c % t if t else c for c, t in zip(v, self.orders))

    def identity(self):
        return (0,) * self.dim

    def mul(self, u, v):
        return self.reduce(a + b for a, b in zip(u, v))

    def inv(self, u):
        return self.reduce(-a for a in u)

    def pow(self, u, n):
        return self.reduce(n * a for a in u)

    def coord_norm(self, c, t):
        return min(c, t - c) if t else abs(c)

    def norm(self, u):
        return sum(self.coord_norm(c, t) for c, t in zip(u, self.orders))

    def signed(self, u):
        """Torsion coordinates moved to the symmetric range, for display/order."""
        out = []
        for c, t in zip(u, self.orders):
            if t and c > t // 2:
                c -= t
            out.append(c)
        return tuple(out)

    def key(self, u):
        # positive generators sort before their inverses
        return (self.norm(u), tuple(-c for c in self.signed(u)))

    def letters(self):
        out = []
        for sign in (1, -1):
            for i in range(self.dim):
                e = [0] * self.dim
                e[i] = sign
                v = self.reduce(e)
                if not self.is_identity(v) and v not in out:
                    out.append(v)
        return out

    def ball(self, r):
        ranges = []
        for t in self.orders:
            if t:
                ranges.append(range(t))
            else:
                ranges.append(range(-r, r + 1))
        out = [v for v in itertools.product(*ranges)
               if 0 < self.norm(v) <= r]
        return sorted(out, key=self.key)

    def is_finite(self):
        return all(self.orders)

    def render(self, u):
        return f"{self.name}[{','.join(str(c) for c in u)}]"

    def parse_value(self, text):
        text = text.strip()
        if not text:
            return self.identity()
        try:
            coords = [int(c) for c in text.split(",")]
        except ValueError:
            raise MalformedInput(f"{self.name}: bad coordinates {text!r}") from None
        return self.reduce(coords)

    def value_of_word(self, w):
        """Element named by a word over this factor's generator names."""
        idx = {g: i for i, g in enumerate(self.gens)}
        v = [0] * self.dim
        for x in w:
            if x.name not in idx:
                raise MalformedInput(f"{self.name}: unknown generator {x.name!r}")
            v[idx[x.name]] += x.sign
        return self.reduce(v)

    def word_of_value(self, u):
        """A word over the generator names representing ``u`` (coordinate order)."""
        out = []
        for g, c in zip(self.gens, self.signed(u)):
            out.extend([GenSymbol(g, 1 if c > 0 else -1)] * abs(c))
        return tuple(out)


class FiniteFactor(Factor):
    """A finite group given by a multiplication table on 0..n-1, identity 0."""

    def __init__(self, name: str, table: Sequence[Sequence[int]], gens: dict | None = None):
        n = len(table)
        if n == 0 or any(len(row) != n for row in table):
            raise MalformedInput(f"{name}: table must be square and nonempty")
        self.table = [list(map(int, row)) for row in table]
        for i in range(n):
            if self.table[0][i] != i or self.table[i][0] != i:
                raise MalformedInput(f"{name}: element 0 must be the identity")
        for a in range(n):
            if sorted(self.table[a]) != list(range(n)):
                raise MalformedInput(f"{name}: table row {a} is not a permutation")
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                raise MalformedInput(f"{name}: table is not associative")
        self.name = name
        self.n = n
        self._inv = [self.table[a].index(0) for a in range(n)]
        self.gens = dict(gens or {})
        gen_vals = list(self.gens.values()) or list(range(1, n))
        self._gen_vals = gen_vals
        self._norms = self._bfs_norms(gen_vals)

    def _bfs_norms(self, gen_vals):
        step = set(gen_vals) | {self._inv[g] for g in gen_vals}
        dist = {0: 0}
        q = deque([0])
        while q:
            a = q.popleft()
            for g in sorted(step):
                b = self.table[a][g]
                if b not in dist:
                    dist[b] = dist[a] + 1
                    q.append(b)
        return dist

    def identity(self):
        return 0

    def mul(self, u, v):
        return self.table[u][v]

    def inv(self, u):
        return self._inv[u]

    def norm(self, u):
        return self._norms.get(u, self.n)

    def key(self, u):
        return (self.norm(u), u)

    def letters(self):
        out = []
        for g in self._gen_vals:
            if g not in out:
                out.append(g)
        for g in self._gen_vals:
            if self._inv[g] not in out:
                out.append(self._inv[g])
        return [g for g in out if g != 0]

    def ball(self, r):
        return sorted((u for u in range(1, self.n) if self.norm(u) <= r), key=self.key)

    def is_finite(self):
        return True

    def render(self, u):
        return f"{self.name}[{u}]"

    def parse_value(self, text):
        try:
            u = int(text.strip() or 0)
        except ValueError:
            raise MalformedInput(f"{self.name}: bad element {text!r}") from None
        if not 0 <= u < self.n:
            raise MalformedInput(f"{self.name}: element {u} out of range")
        return u


class OracleFactor(Factor):
    """A factor known only through a normal-form procedure on its words."""

    def __init__(self, name: str, gens: Sequence[str], nf: Callable | None):
        self.name = name
        self.gens = tuple(gens)
        self._nf = nf

    def nf(self, w):
        if self._nf is None:
            raise Unsupported(f"parabolic {self.name} is oracle-backed but has no procedure")
        return tuple(self._nf(tuple(w)))

    def identity(self):
        return ()

    def mul(self, u, v):
        return self.nf(tuple(u) + tuple(v))

    def inv(self, u):
        return self.nf(tuple(x.inverse() for x in reversed(u)))

    def key(self, u):
        alpha = [GenSymbol(n, 1) for n in self.gens] + [GenSymbol(n, -1) for n in self.gens]
        order = {x: i for i, x in enumerate(alpha)}
        return (len(u), tuple(order.get(x, 0) for x in u))

    def letters(self):
        out = []
        for sign in (1, -1):
            for n in self.gens:
                v = self.nf((GenSymbol(n, sign),))
                if v and v not in out:
                    out.append(v)
        return out

    def norm(self, u):
        return len(u)

    def ball(self, r):
        seen = set()
        frontier = [()]
        alpha = [GenSymbol(n, 1) for n in self.gens] + [GenSymbol(n, -1) for n in self.gens]
        for _ in range(r):
            nxt = []
            for w in frontier:
                for x in alpha:
                    nxt.append(w + (x,))
            for w in nxt:
                v = self.nf(w)
                if v:
                    seen.add(v)
            frontier = nxt
        return sorted(seen, key=self.key)

    def render(self, u):
        return f"{self.name}({word_str(u)})"

    def parse_value(self, text):
        return self.nf(parse_word(text))


_TABLE_ROW = re.compile(r"\s*;\s*")


def parse_table(text: str) -> list:
    rows = [r for r in _TABLE_ROW.split(text.strip()) if r]
    return [[int(x) for x in r.replace(",", " ").split()] for r in rows]
