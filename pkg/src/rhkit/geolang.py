"""Detours, the geometric language 𝓛, the finite set 𝓛₀ and gnr-automata.

An element of Γ̃ labels a path 𝔭 in the coned-off graph.  A θ-detour is a
run of syllables flanked by two large-angle letters of the same parabolic
factor whose path returns to the cone vertex it left.  𝓛 collects the
elements without detours whose paths are local quasi-geodesics.

Automata here read long normal forms.  Free letters are single edge labels;
a parabolic factor contributes either an explicit finite list of values
(``IN``) or the complement of one (``NOTIN``).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .coned import INF, ConedGraph, path_length
from .factors import AbelianFactor, FiniteFactor, FreeFactor, Unsupported
from .freeprod import FPElement
from .words import GenSymbol, MalformedInput, ParLetter


class BudgetExceeded(RuntimeError):
    """An enumeration hit its budget; no partial result is returned."""


class AbstractionError(RuntimeError):
    """Large parabolic letters did not behave uniformly at these constants."""


# -- constants -------------------------------------------------------------------

def epsilon_prime(eps, lam, mu, chi, delta):
    """Cone constant for fellow travelling of quasi-geodesics without detours."""
    t = lam * (3 * eps + mu)
    return 4 * (eps + t + t * (t + chi)) + 50 * delta


@dataclass(frozen=True)
class GeometryConstants:
    delta: float
    M: float
    D: float
    theta: float
    L1: float
    L2: float
    L: float
    L1p: float
    L2p: float
    A: float
    kappa: float | None = None
    toy: bool = False

    def epsilon_prime(self, eps, lam, mu, chi):
        return epsilon_prime(eps, lam, mu, chi, self.delta)

    def caveat(self) -> str:
        if self.toy:
            return "toy constants: results are exact for these constants, heuristic for the group"
        return ""

    def describe(self) -> str:
        keys = ("delta", "M", "D", "theta", "L1", "L2", "L", "L1p", "L2p", "A")
        return " ".join(f"{k}={getattr(self, k):g}" for k in keys)


def local_to_global(L1, L2, delta):
    """Default (L, L1', L2') so that L-local (L1,L2)-quasi-geodesics are global
    (L1',L2')-quasi-geodesics.

    Artifact default, not a sharp bound: L1' = 2·L1, L2' = 2·L2 + 100·δ·L1,
    L = L2' + 1 (so that L > L2').  Override for any serious use.
    """
    L1p = 2 * L1
    L2p = 2 * L2 + 100 * delta * L1
    return L2p + 1, L1p, L2p


def derive_constants(delta, M, D, L=None, L1p=None, L2p=None, theta=None, kappa=None):
    if min(delta, M, D) <= 0:
        raise MalformedInput("delta, M and D must be positive")
    L1 = 10 ** 4 * delta * M
    L2 = 10 ** 6 * delta ** 2 * M
    if theta is None:
        theta = 10 ** 4 * (D + 60 * delta)
    dL, dL1p, dL2p = local_to_global(L1, L2, delta)
    L1p = dL1p if L1p is None else L1p
    L2p = dL2p if L2p is None else L2p
    L = dL if L is None else L
    if L <= L2p:
        raise MalformedInput("L must exceed L2'")
    A = 2 * (L + theta) ** 2
    return GeometryConstants(delta, M, D, theta, L1, L2, L, L1p, L2p, A, kappa, False)


def toy_constants(theta, L, L1, L2, L2p, A=None, L1p=None, delta=1, M=1, D=1, kappa=None):
    """Small hand-picked constants for desk-scale runs (flagged toy)."""
    if A is None:
        A = 2 * (L + theta) ** 2
    if L1p is None:
        L1p = L1
    return GeometryConstants(delta, M, D, theta, L1, L2, L, L1p, L2p, A, kappa, True)


# -- sectors ------------------------------------------------------------------------

class SectorTable:
    """Cached Sec_k(r) sets.

    ``formulas`` maps a factor index to ``f(value, r) -> bool`` for families
    with a known closed form; otherwise the sets come from BFS on the model
    (or from ``loops`` via the loop-list route).
    """

    def __init__(self, model: ConedGraph, formulas: dict | None = None, loops=None):
        self.model = model
        self.formulas = dict(formulas or {})
        self.loops = loops
        self._cache: dict = {}

    def members(self, k: int, r) -> frozenset:
        r = int(r)
        key = (k, r)
        if key not in self._cache:
            f = self.model.pres.factor(k)
            if k in self.formulas:
                vals = [f.identity()] + [v for v in self._candidates(f, r) if self.formulas[k](v, r)]
            elif self.loops is not None:
                from .coned import sector_from_loops
                vals = sector_from_loops(self.model.pres, k, r, self.loops)
            else:
                vals = self.model.sector(k, r)
            self._cache[key] = frozenset(vals)
        return self._cache[key]

    def _candidates(self, f, r):
        if isinstance(f, FiniteFactor):
            return list(range(1, f.n))
        return f.ball(r)

    def contains(self, k: int, value, r) -> bool:
        f = self.model.pres.factor(k)
        if k in self.formulas:
            return f.is_identity(value) or bool(self.formulas[k](value, int(r)))
        return value in self.members(k, r)

    def sorted_members(self, k: int, r) -> list:
        f = self.model.pres.factor(k)
        return sorted(self.members(k, r), key=f.key)


# -- detours -------------------------------------------------------------------------

@dataclass(frozen=True)
class DetourReport:
    start: int          # first syllable of the detour (0-based)
    end: int            # last syllable of the detour (inclusive)
    factor: int
    small: bool | None
    length: int


def syllable_letters(model, syl) -> tuple:
    if syl.factor == 0:
        return tuple(syl.value)
    return (ParLetter(syl.factor, syl.value),)


def _x_word(model, letters) -> tuple:
    return model.canon(model.pres.to_X_word(letters))


def in_parabolic(model: ConedGraph, k: int, x_word) -> bool:
    """Is the element of Γ named by ``x_word`` in P_k?"""
    return model.cone_vertex(k, model.canon(x_word)) == model.cone_vertex(k, ())


def _letter_small(sectors, x, r) -> bool:
    return isinstance(x, GenSymbol) or sectors.contains(x.factor, x.value, r)


def find_detours(a: FPElement, theta, model: ConedGraph, sectors: SectorTable, mu=None) -> list:
    """Every θ-detour of ``a`` (by syllable interval), tagged μ-small when μ is given."""
    syl = a.syllables
    out = []
    small_r = 5 * mu * (mu + theta) if mu is not None else None
    for i, si in enumerate(syl):
        if si.factor == 0 or sectors.contains(si.factor, si.value, theta):
            continue
        k = si.factor
        for j in range(i + 2, len(syl)):
            sj = syl[j]
            if sj.factor != k or sectors.contains(k, sj.value, theta):
                continue
            inner = []
            for s in syl[i + 1:j]:
                inner.extend(syllable_letters(model, s))
            if not in_parabolic(model, k, model.pres.to_X_word(inner)):
                continue
            small = None
            if mu is not None:
                small = all(_letter_small(sectors, x, small_r) for x in inner)
            out.append(DetourReport(i + 1, j - 1, k, small, path_length(inner)))
    return out


# -- quasi-geodesics and membership ----------------------------------------------------

def is_local_quasigeodesic(path, L, lam, mu, model: ConedGraph) -> bool:
    """Every subsegment of length <= L satisfies length <= λ·d(ends) + μ."""
    n = len(path) - 1
    for i in range(n):
        for j in range(i + 1, min(n, i + int(L)) + 1):
            ell = j - i
            if ell <= mu:
                continue
            d = model.distance(path[i], path[j], cutoff=ell)
            d = min(d, ell)
            if ell > lam * d + mu:
                return False
    return True


def membership_L(a: FPElement, consts: GeometryConstants, model: ConedGraph,
                 sectors: SectorTable) -> bool:
    """Local characterization: no L2'-small θ-detour of length <= L2', and 𝔭(a)
    an L-local (L1, L2)-quasi-geodesic."""
    for d in find_detours(a, consts.theta, model, sectors, mu=consts.L2p):
        if d.small and d.length <= consts.L2p:
            return False
    path = model.path_of(model.pres.fp.long_normal_form(a))
    return is_local_quasigeodesic(path, consts.L, consts.L1, consts.L2, model)


def in_L_by_definition(a: FPElement, consts: GeometryConstants, model: ConedGraph,
                       sectors: SectorTable) -> bool:
    """No θ-detour at all, and 𝔭(a) an L-local (L1, L2)-quasi-geodesic."""
    if find_detours(a, consts.theta, model, sectors):
        return False
    path = model.path_of(model.pres.fp.long_normal_form(a))
    return is_local_quasigeodesic(path, consts.L, consts.L1, consts.L2, model)


# -- gnr automata ----------------------------------------------------------------------

@dataclass(frozen=True)
class GnrLabel:
    factor: int
    kind: str        # "IN" or "NOTIN"
    values: tuple

    def matches(self, x, fp) -> bool:
        if isinstance(x, GenSymbol):
            return self.factor == 0 and x in self.values
        if x.factor != self.factor:
            return False
        if fp.factors[x.factor].is_identity(x.value):
            return False
        if self.kind == "IN":
            return x.value in self.values
        return x.value not in self.values


@dataclass
class GnrAutomaton:
    n_states: int
    initial: int
    accepting: set
    transitions: list = field(default_factory=list)   # (src, dst, GnrLabel)
    caveats: list = field(default_factory=list)

    def __post_init__(self):
        self._out = None

    def outgoing(self, q):
        if self._out is None:
            self._out = {}
            for s, t, lab in self.transitions:
                self._out.setdefault(s, []).append((t, lab))
        return self._out.get(q, [])

    def run(self, letters, fp) -> set:
        cur = {self.initial}
        for x in letters:
            nxt = set()
            for q in cur:
                for t, lab in self.outgoing(q):
                    if lab.matches(x, fp):
                        nxt.add(t)
            cur = nxt
            if not cur:
                break
        return cur

    def accepts_letters(self, letters, fp) -> bool:
        return bool(self.run(letters, fp) & self.accepting)

    def serialize(self, pres) -> str:
        lines = []
        for c in self.caveats:
            lines.append(f"# {c}")
        for q in range(self.n_states):
            lines.append(f"Q {q}" + (" accept" if q in self.accepting else ""))
        lines.append(f"I {self.initial}")
        for s, t, lab in self.transitions:
            vals = ",".join(_render_value(pres, lab.factor, v) for v in lab.values)
            lines.append(f"T {s} {t} {lab.factor} {lab.kind} {vals}".rstrip())
        return "\n".join(lines) + "\n"


def _render_value(pres, k, v) -> str:
    if k == 0:
        return str(v)
    return pres.factor(k).render(v).replace(" ", "")


def parse_automaton(text: str, pres) -> GnrAutomaton:
    states, accepting, trans = set(), set(), []
    initial = None
    caveats = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            caveats.append(line[1:].strip())
            continue
        parts = line.split()
        try:
            if parts[0] == "Q":
                q = int(parts[1])
                states.add(q)
                if len(parts) > 2 and parts[2] == "accept":
                    accepting.add(q)
            elif parts[0] == "I":
                initial = int(parts[1])
            elif parts[0] == "T":
                s, t, k, kind = int(parts[1]), int(parts[2]), int(parts[3]), parts[4]
                if kind not in ("IN", "NOTIN"):
                    raise MalformedInput(f"line {lineno}: label kind must be IN or NOTIN")
                raw = " ".join(parts[5:])
                vals = _parse_values(pres, k, raw)
                trans.append((s, t, GnrLabel(k, kind, tuple(vals))))
            else:
                raise MalformedInput(f"line {lineno}: unknown record {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, MalformedInput):
                raise
            raise MalformedInput(f"line {lineno}: bad record {line!r}") from None
    if initial is None:
        raise MalformedInput("automaton has no initial state")
    n = max(states | {initial} | {s for s, _, _ in trans} | {t for _, t, _ in trans}) + 1
    return GnrAutomaton(n, initial, accepting, trans, caveats)


def _parse_values(pres, k, raw):
    if not raw:
        return []
    letters = pres.fp.tokenize(raw.replace(",", " "))
    out = []
    for x in letters:
        if k == 0:
            if not isinstance(x, GenSymbol):
                raise MalformedInput("free-factor label with a parabolic value")
            out.append(x)
        else:
            if not isinstance(x, ParLetter) or x.factor != k:
                raise MalformedInput(f"label value outside factor {k}")
            out.append(x.value)
    return out


def gnr_accepts(aut: GnrAutomaton, a: FPElement, fp) -> bool:
    return aut.accepts_letters(fp.long_normal_form(a), fp)


# -- building the automaton for 𝓛 ---------------------------------------------------------

LARGE = "LARGE"


class _Alphabet:
    """Letter classes: free letters, explicit parabolic values, one large class per factor."""

    def __init__(self, model, sectors, radius):
        self.model = model
        pres = model.pres
        self.free = pres.symmetric_X()
        self.explicit = {}
        self.reps = {}
        for k in range(1, pres.q + 1):
            f = pres.factor(k)
            vals = [v for v in sectors.sorted_members(k, radius) if not f.is_identity(v)]
            self.explicit[k] = vals
            self.reps[k] = _large_reps(f, set(vals))

    def classes(self):
        out = list(self.free)
        for k, vals in self.explicit.items():
            out.extend(ParLetter(k, v) for v in vals)
            if self.reps[k]:
                out.append((LARGE, k))
        return out


def _large_reps(f, explicit: set) -> list:
    """Two smallest non-identity values outside ``explicit`` (none if the factor is exhausted)."""
    if isinstance(f, FiniteFactor) or (isinstance(f, AbelianFactor) and f.is_finite()):
        elems = list(range(1, f.n)) if isinstance(f, FiniteFactor) else f.ball(sum(f.orders))
        rest = [v for v in sorted(elems, key=f.key) if v not in explicit]
        return rest[:2]
    r = 1
    while True:
        rest = [v for v in f.ball(r) if v not in explicit]
        if len(rest) >= 2:
            return rest[:2]
        r += 1


def _concrete(letters, rep_choice):
    out = []
    for x in letters:
        if isinstance(x, tuple) and x and x[0] == LARGE:
            out.append(ParLetter(x[1], rep_choice[x[1]]))
        else:
            out.append(x)
    return out


def _factor_of(x):
    if isinstance(x, GenSymbol):
        return 0
    if isinstance(x, ParLetter):
        return x.factor
    return x[1]


def _valid_next(prev, x, inv) -> bool:
    if prev is None:
        return True
    fp_, fx = _factor_of(prev), _factor_of(x)
    if fx == 0 and fp_ == 0:
        return inv(prev) != x
    return fx != fp_ or fx == 0


class _Checker:
    def __init__(self, model, consts, sectors, alphabet):
        self.model = model
        self.c = consts
        self.sectors = sectors
        self.alpha = alphabet
        self.small_r = 5 * consts.L2p * (consts.L2p + consts.theta)

    def _qg_ok(self, window, new_vertices_from):
        results = set()
        reps_list = [{k: r[0] for k, r in self.alpha.reps.items() if r}]
        if any(isinstance(x, tuple) and x and x[0] == LARGE for x in window):
            reps_list.append({k: r[-1] for k, r in self.alpha.reps.items() if r})
        for reps in reps_list:
            path = self.model.path_of(_concrete(window, reps))
            ok = True
            n = len(path) - 1
            for j in range(new_vertices_from, n + 1):
                for i in range(max(0, j - int(self.c.L)), j):
                    ell = j - i
                    if ell <= self.c.L2:
                        continue
                    d = min(self.model.distance(path[i], path[j], cutoff=ell), ell)
                    if ell > self.c.L1 * d + self.c.L2:
                        ok = False
                        break
                if not ok:
                    break
            results.add(ok)
        if len(results) > 1:
            raise AbstractionError("large parabolic letters are not interchangeable at these "
                                   "constants; increase A")
        return results.pop()

    def _is_large_theta(self, x) -> bool:
        if isinstance(x, GenSymbol):
            return False
        if isinstance(x, tuple):
            return True
        return not self.sectors.contains(x.factor, x.value, self.c.theta)

    def _small_detour_at_end(self, window) -> bool:
        last = window[-1]
        if not self._is_large_theta(last):
            return False
        k = _factor_of(last)
        for i in range(len(window) - 3, -1, -1):
            x = window[i]
            inner = window[i + 1:-1]
            if path_length(inner) > self.c.L2p:
                break
            if _factor_of(x) != k or not self._is_large_theta(x):
                continue
            if any(isinstance(y, tuple) for y in inner):
                continue
            if not all(_letter_small(self.sectors, y, self.small_r) for y in inner):
                continue
            if in_parabolic(self.model, k, self.model.pres.to_X_word(inner)):
                return True
        return False

    def step(self, state, x):
        """Next state after reading class x, or None if the letter is forbidden."""
        prev = state[-1] if state else None
        if not _valid_next(prev, x, self.model.pres.inv):
            return None
        window = state + (x,)
        old_len = path_length(state)
        if not self._qg_ok(window, old_len + 1):
            return None
        if self._small_detour_at_end(window):
            return None
        return self._trim(window)

    def _trim(self, window):
        keep = max(self.c.L, self.c.L2p + 1)
        acc = 0
        i = len(window)
        while i > 0 and acc < keep:
            i -= 1
            acc += path_length(window[i:i + 1])
        return window[i:]


def build_L_automaton(model: ConedGraph, consts: GeometryConstants, sectors: SectorTable,
                      max_states: int = 20000) -> GnrAutomaton:
    """Deterministic gnr-automaton for 𝓛 by local checks on a sliding window.

    States are suffix windows of letter classes long enough to see every
    subsegment of length <= L and every small detour of length <= L2'.
    Parabolic values in Sec_k(R), R = max(θ, A, small-detour radius), are
    explicit letters; everything else in P_k is one cofinite class, checked
    with two representatives.
    """
    radius = max(consts.theta, consts.A)
    if consts.L2p >= 2:
        radius = max(radius, 5 * consts.L2p * (consts.L2p + consts.theta))
    alphabet = _Alphabet(model, sectors, radius)
    checker = _Checker(model, consts, sectors, alphabet)
    classes = alphabet.classes()
    ids = {(): 0}
    trans = []
    queue = deque([()])
    while queue:
        st = queue.popleft()
        for x in classes:
            nxt = checker.step(st, x)
            if nxt is None:
                continue
            if nxt not in ids:
                if len(ids) >= max_states:
                    raise BudgetExceeded(f"automaton for L exceeds {max_states} states")
                ids[nxt] = len(ids)
                queue.append(nxt)
            trans.append((ids[st], ids[nxt], _label_of(x, alphabet)))
    aut = GnrAutomaton(len(ids), 0, set(range(len(ids))), trans)
    if consts.toy:
        aut.caveats.append(consts.caveat())
    aut.caveats.append(consts.describe())
    return aut


def _label_of(x, alphabet) -> GnrLabel:
    if isinstance(x, GenSymbol):
        return GnrLabel(0, "IN", (x,))
    if isinstance(x, ParLetter):
        return GnrLabel(x.factor, "IN", (x.value,))
    k = x[1]
    return GnrLabel(k, "NOTIN", tuple(alphabet.explicit[k]))


# -- 𝓛₀ and set differences -------------------------------------------------------------------

def enumerate_long_forms(pres, letter_values: dict, max_path: int):
    """All long normal forms with letters from X and ``letter_values[k]`` and
    path length <= max_path, in length-then-letter order."""
    inv = pres.inv
    alphabet = list(pres.symmetric_X())
    for k in sorted(letter_values):
        alphabet.extend(ParLetter(k, v) for v in letter_values[k])
    out = [()]
    frontier = [()]
    while frontier:
        nxt = []
        for w in frontier:
            used = path_length(w)
            for x in alphabet:
                if used + path_length((x,)) > max_path:
                    continue
                if not _valid_next(w[-1] if w else None, x, inv):
                    continue
                nxt.append(w + (x,))
        out.extend(nxt)
        frontier = nxt
    return out


def compute_L0(model: ConedGraph, consts: GeometryConstants, sectors: SectorTable,
               letter_radius=None, max_path=None, budget: int = 200000) -> list:
    """Elements of 𝓛 that are trivial in Γ.

    A loop in 𝓛 is a global (L1', L2')-quasi-geodesic between equal points,
    so its path has length <= L2'.  Its parabolic letters have angle at most
    ε' (cone fellow travelling), so letters range over Sec_k(ε').
    """
    if max_path is None:
        max_path = consts.L2p
    if letter_radius is None:
        letter_radius = consts.epsilon_prime(0, consts.L1p, consts.L2p, consts.theta)
    pres = model.pres
    values = {}
    for k in range(1, pres.q + 1):
        f = pres.factor(k)
        values[k] = [v for v in sectors.sorted_members(k, letter_radius) if not f.is_identity(v)]
    words = enumerate_long_forms(pres, values, int(max_path))
    if len(words) > budget:
        raise BudgetExceeded(f"L0 enumeration has {len(words)} candidates (budget {budget})")
    out = []
    for w in words:
        if model.canon(pres.to_X_word(w)):
            continue
        a = pres.fp.from_letters(w)
        if membership_L(a, consts, model, sectors):
            out.append(a)
    return out


def subtract_finite(aut: GnrAutomaton, elements, fp) -> GnrAutomaton:
    """Automaton for L(aut) minus a finite set of elements (product with a trie)."""
    trie = [{}]
    terminal = set()
    for e in elements:
        node = 0
        for x in fp.long_normal_form(e):
            if x not in trie[node]:
                trie[node][x] = len(trie)
                trie.append({})
            node = trie[node][x]
        terminal.add(node)
    DEAD = -1
    ids = {(aut.initial, 0): 0}
    queue = deque([(aut.initial, 0)])
    trans = []
    while queue:
        q, t = queue.popleft()
        for dst, lab in aut.outgoing(q):
            parts = []
            if t == DEAD:
                parts.append((lab, DEAD))
            else:
                specials = [x for x in trie[t] if lab.matches(x, fp)]
                for x in specials:
                    v = x if isinstance(x, GenSymbol) else x.value
                    parts.append((GnrLabel(lab.factor, "IN", (v,)), trie[t][x]))
                special_vals = {x if isinstance(x, GenSymbol) else x.value for x in specials}
                if lab.kind == "IN":
                    rest = tuple(v for v in lab.values if v not in special_vals)
                    if rest:
                        parts.append((GnrLabel(lab.factor, "IN", rest), DEAD))
                else:
                    extra = tuple(sorted(special_vals, key=fp.factors[lab.factor].key))
                    parts.append((GnrLabel(lab.factor, "NOTIN", lab.values + extra), DEAD))
            for sub, t2 in parts:
                key = (dst, t2)
                if key not in ids:
                    ids[key] = len(ids)
                    queue.append(key)
                trans.append((ids[(q, t)], ids[key], sub))
    accepting = {i for (q, t), i in ids.items() if q in aut.accepting and t not in terminal}
    return GnrAutomaton(len(ids), 0, accepting, trans, list(aut.caveats))


# -- word automata over the generator alphabet -------------------------------------------

@dataclass
class WordAutomaton:
    """Nondeterministic automaton over generator letters (GenSymbol)."""
    n_states: int
    initial: int
    accepting: set
    edges: dict   # (state, GenSymbol) -> set of states

    def accepts(self, word) -> bool:
        cur = {self.initial}
        for x in word:
            nxt = set()
            for q in cur:
                nxt |= self.edges.get((q, x), set())
            cur = nxt
            if not cur:
                return False
        return bool(cur & self.accepting)

    def is_empty(self) -> bool:
        seen = {self.initial}
        queue = deque([self.initial])
        succ = {}
        for (q, _), ts in self.edges.items():
            succ.setdefault(q, set()).update(ts)
        while queue:
            q = queue.popleft()
            if q in self.accepting:
                return False
            for t in succ.get(q, ()):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return True


class _DFA:
    """Small DFA: ``delta(state, letter)`` returns a state or None."""

    def __init__(self, start, delta, accept, letters):
        self.start = start
        self.delta = delta
        self.accept = accept
        self.letters = letters


def nf_word(pres, k: int, value) -> tuple:
    """Lexicographic normal form of a parabolic value over the factor's generator names."""
    f = pres.factor(k)
    if isinstance(f, AbelianFactor):
        if not f.gens:
            raise Unsupported(f"factor {f.name} has no generator names")
        return f.word_of_value(value)
    if isinstance(f, FiniteFactor):
        from .presentation import _finite_word
        return tuple(GenSymbol(g) for g in _finite_word(f, value))
    raise Unsupported(f"no normal-form automaton for factor {f.name}")


def _trie_dfa(words, letters):
    trie = [{}]
    term = set()
    for w in words:
        node = 0
        for x in w:
            if x not in trie[node]:
                trie[node][x] = len(trie)
                trie.append({})
            node = trie[node][x]
        term.add(node)
    return _DFA(0, lambda s, x: trie[s].get(x), lambda s: s in term, letters)


def _abelian_all_dfa(f: AbelianFactor):
    """All lexicographic normal forms x1^c1 x2^c2 ... of a free abelian factor."""
    letters = [GenSymbol(g, s) for g in f.gens for s in (1, -1)]
    order = {g: i for i, g in enumerate(f.gens)}

    def delta(state, x):
        i, s = state
        j = order.get(x.name)
        if j is None:
            return None
        if j > i or (j == i and x.sign == s):
            return (j, x.sign)
        return None
    return _DFA((-1, 0), delta, lambda s: True, letters)


def _label_dfa(pres, lab: GnrLabel):
    k = lab.factor
    f = pres.factor(k)
    if lab.kind == "IN":
        words = [nf_word(pres, k, v) for v in lab.values]
        letters = sorted({x for w in words for x in w})
        return _trie_dfa(words, letters)
    if isinstance(f, FiniteFactor) or (isinstance(f, AbelianFactor) and f.is_finite()):
        elems = range(1, f.n) if isinstance(f, FiniteFactor) else f.ball(sum(f.orders))
        keep = [nf_word(pres, k, v) for v in elems if v not in lab.values]
        return _trie_dfa(keep, sorted({x for w in keep for x in w}))
    if not (isinstance(f, AbelianFactor) and not any(f.orders)):
        raise Unsupported(f"no normal-form automaton for cofinite labels of {f.name}")
    base = _abelian_all_dfa(f)
    excl = _trie_dfa([nf_word(pres, k, v) for v in lab.values] + [()], base.letters)

    def delta(state, x):
        a, b = state
        a2 = base.delta(a, x)
        if a2 is None:
            return None
        b2 = excl.delta(b, x) if b is not None else None
        return (a2, b2)

    def accept(state):
        a, b = state
        return base.accept(a) and not (b is not None and excl.accept(b))
    return _DFA((base.start, excl.start), delta, accept, base.letters)


def gnr_to_word_automaton(aut: GnrAutomaton, pres) -> WordAutomaton:
    """Replace every parabolic edge by a copy of its label's normal-form automaton."""
    n = aut.n_states
    edges: dict = {}

    def add(q, x, t):
        edges.setdefault((q, x), set()).add(t)

    for s, t, lab in aut.transitions:
        if lab.factor == 0:
            for x in lab.values:
                add(s, x, t)
            continue
        dfa = _label_dfa(pres, lab)
        local = {}
        queue = deque([dfa.start])
        local[dfa.start] = s
        while queue:
            st = queue.popleft()
            for x in dfa.letters:
                nx = dfa.delta(st, x)
                if nx is None:
                    continue
                if nx not in local:
                    local[nx] = n
                    n += 1
                    queue.append(nx)
                add(local[st], x, local[nx])
                if dfa.accept(nx):
                    add(local[st], x, t)
    acc = set(aut.accepting)
    return WordAutomaton(n, aut.initial, acc, edges)


def element_word(pres, a: FPElement) -> tuple:
    """Concatenated lexicographic normal form of an element over all generator names."""
    out = []
    for s in a.syllables:
        if s.factor == 0:
            out.extend(s.value)
        else:
            out.extend(nf_word(pres, s.factor, s.value))
    return tuple(out)
