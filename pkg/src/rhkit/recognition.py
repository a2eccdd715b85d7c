"""Recognition of linear isoperimetric relative presentations.

The loop over K follows the published semi-algorithm: an exactness check on
short parabolic words, the cluster vocabulary 𝒱_i, 𝒱_i′, 𝒞, enumeration
of diagrams 𝒟, the area table on their boundaries 𝒲, and the ratio test
A(w) > (√K/600)|w| for words of area at most 240K.

The theoretical enumeration bounds (3·240K letters, 240K+2 polygon sides,
240K cells) are out of reach for every K, so each is capped by
``RecognitionConfig``; reports say so in a caveat line.  Two additions keep
the capped loop honest:

* a dilation probe computes areas of a^m b^m ... versions of the worst
  words by peeling, and adds them to 𝒲 (they are genuine relations, so this
  only makes the test stricter);
* a claimed factor K is re-checked on every relation up to a configured
  length, with areas from the peeling search.

When the ratio test fails, K jumps to the least value that the current
table allows (the table only grows with K, so no skipped K could stop).
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .factors import AbelianFactor, OracleFactor, Unsupported
from .presentation import ParabolicSpec, RelPresentation
from .vk import (InventoryCell, cyclic_key, clusters, dilate, enumerate_diagrams, is_pinched,
                 letter_code, min_area_table, min_polygon_triangulation, polygon_inventory,
                 reduced_key, relator_inventory, word_area)
from .words import GenSymbol, ParLetter, cyclic_reduce, free_reduce, word_inverse

PAPASOGLU_RATIO = 600
PAPASOGLU_WINDOW = 240


# -- constants -------------------------------------------------------------------

def ratio_threshold(K: int) -> float:
    """√K/600."""
    return math.sqrt(K) / PAPASOGLU_RATIO


def area_window(K: int) -> tuple:
    """[K/2, 240K] as exact rationals."""
    return Fraction(K, 2), Fraction(PAPASOGLU_WINDOW * K)


def exceeds_ratio(area: int, length: int, K: int) -> bool:
    """A > (√K/600)·L, decided in integers: 600²A² > K L²."""
    return PAPASOGLU_RATIO ** 2 * area * area > K * length * length


def least_passing_K(area: int, length: int) -> int:
    """Least K with A ≤ (√K/600)·L."""
    num = PAPASOGLU_RATIO ** 2 * area * area
    den = length * length
    return max(1, -(-num // den))


def theory_caps(K: int) -> dict:
    return {"product": 3 * PAPASOGLU_WINDOW * K, "polygon": PAPASOGLU_WINDOW * K + 2,
            "cells": PAPASOGLU_WINDOW * K, "exact": 3 * PAPASOGLU_WINDOW * K}


@dataclass
class RecognitionConfig:
    product_cap: int = 1
    polygon_cap: int = 4
    cell_cap: int = 2
    max_diagrams: int = 200
    boundary_cap: int | None = 12
    vocab_cap: int = 2000
    vocab_work: int = 2_000_000
    exact_len: int = 4
    verify_length: int = 10
    verify_words: int = 200_000
    verify_nodes: int = 20_000
    probe_words: int = 2
    probe_m: int = 4
    probe_slack: int = 0
    probe_nodes: int = 15_000
    jump: bool = True
    delta_coefficient: int = 6

    def caps(self, K: int) -> dict:
        th = theory_caps(K)
        return {"product": min(th["product"], self.product_cap),
                "polygon": min(th["polygon"], self.polygon_cap),
                "cells": min(th["cells"], self.cell_cap),
                "exact": min(th["exact"], self.exact_len)}

    def caveats(self, K: int) -> list:
        th, cp = theory_caps(K), self.caps(K)
        out = [f"heuristic: {name} cap {cp[name]} < theory {th[name]}"
               for name in ("product", "polygon", "cells", "exact") if cp[name] < th[name]]
        return out


class VocabularyCapExceeded(RuntimeError):
    pass


# -- report types ----------------------------------------------------------------

@dataclass
class TraceEntry:
    K: int
    V: tuple
    Vp: tuple
    C: int
    D: int
    W: int
    maxratio: Fraction
    violations: int


@dataclass
class Witness:
    word: tuple
    area: int
    length: int
    note: str = ""

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.area, self.length)


@dataclass
class RecognitionReport:
    outcome: str                       # LinearIsop | NonExact | Timeout
    K: int
    counterexample: tuple | None = None
    trace: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    caveats: list = field(default_factory=list)
    verified_length: int = 0
    reason: str = ""


# -- step 1 ----------------------------------------------------------------------

@dataclass
class ExactnessResult:
    ok: bool
    word: tuple | None = None
    index: int | None = None
    checked: int = 0


def _reduced_words(alphabet: Sequence, length: int, inv):
    """Freely reduced words of exactly ``length`` letters, lexicographic."""
    if length == 0:
        yield ()
        return
    stack = [()]
    while stack:
        w = stack.pop()
        if len(w) == length:
            yield w
            continue
        for x in reversed(alphabet):
            if w and w[-1] == inv(x):
                continue
            stack.append(w + (x,))


def exactness_check(pres: RelPresentation, K: int, wp: Callable | None,
                    config: RecognitionConfig | None = None) -> ExactnessResult:
    """Words in 𝒳_𝓡 ∩ H̃_i trivial in Γ but not in H̃_i (shortest first)."""
    config = config or RecognitionConfig()
    if wp is None:
        return ExactnessResult(True)
    cap = config.caps(K)["exact"]
    checked = 0
    for i in range(1, pres.q + 1):
        voc = pres.parabolic_vocabulary(i)
        f = pres.factor(i)
        for n in range(1, cap + 1):
            for w in _reduced_words(voc, n, pres.inv):
                checked += 1
                if wp(w) and not f.is_identity(f.product([x.value for x in w])):
                    return ExactnessResult(False, w, i, checked)
    return ExactnessResult(True, checked=checked)


# -- steps 2 and 3 -----------------------------------------------------------------

@dataclass
class Vocabulary:
    V: dict          # i -> list of values
    Vp: dict         # i -> list of cyclic words
    C: dict          # i -> list of diagrams
    inventory: list

    def sizes(self):
        keys = sorted(self.V)
        return (tuple(len(self.V[i]) for i in keys), tuple(len(self.Vp[i]) for i in keys),
                sum(len(self.C[i]) for i in keys))


def _products(f, letters: Sequence, n: int) -> list:
    seen = {f.key(f.identity()): f.identity()}
    frontier = [f.identity()]
    for _ in range(n):
        nxt = []
        for u in frontier:
            for x in letters:
                v = f.mul(u, x)
                k = f.key(v)
                if k not in seen:
                    seen[k] = v
                    nxt.append(v)
        frontier = nxt
    return sorted((v for v in seen.values() if not f.is_identity(v)), key=f.key)


def cluster_vocabulary(pres: RelPresentation, K: int, config: RecognitionConfig | None = None) -> Vocabulary:
    """𝒱_i, 𝒱_i′ and 𝒞 at the capped bounds.

    𝒱_i′ keeps polygons of 3 or more sides up to rotation and inversion and
    drops pinched ones (a proper trivial subword would force an identity
    diagonal; such a loop splits at the repeated vertex)."""
    config = config or RecognitionConfig()
    caps = config.caps(K)
    V, Vp, C = {}, {}, {}
    inventory = relator_inventory(pres.cells())
    for i in range(1, pres.q + 1):
        f = pres.factor(i)
        base = [x.value for x in pres.parabolic_vocabulary(i)]
        vals = _products(f, base, caps["product"]) if base else []
        V[i] = vals
        letters = [ParLetter(i, v) for v in vals]
        keyset = {f.key(v) for v in vals}
        work = sum(len(letters) ** (n - 1) for n in range(3, caps["polygon"] + 1))
        if work > config.vocab_work:
            raise VocabularyCapExceeded(f"𝒱′_{i}: {work} candidate words exceed {config.vocab_work}")
        found = {}
        for n in range(3, caps["polygon"] + 1):
            for pre in itertools.product(letters, repeat=n - 1):
                if any(pre[t + 1] == pres.inv(pre[t]) for t in range(n - 2)):
                    continue
                p = f.product([x.value for x in pre])
                last = f.inv(p)
                if f.is_identity(last) or f.key(last) not in keyset:
                    continue
                w = pre + (ParLetter(i, last),)
                k = cyclic_key(w, pres.inv)
                if k in found or is_pinched(w, f):
                    continue
                found[k] = k
                if len(found) > config.vocab_cap:
                    raise VocabularyCapExceeded(f"𝒱′_{i} exceeds {config.vocab_cap} words")
        words = sorted(found, key=lambda w: (len(w), tuple(letter_code(x) for x in w)))
        Vp[i] = words
        C[i] = [min_polygon_triangulation(w, f, i) for w in words]
        inventory += polygon_inventory(i, words)
    return Vocabulary(V, Vp, C, inventory)


def _factors(pres) -> dict:
    return {i: pres.factor(i) for i in range(1, pres.q + 1)}


def _check_oracles(pres):
    for i in range(1, pres.q + 1):
        f = pres.factor(i)
        if isinstance(f, OracleFactor) and f._nf is None:
            raise Unsupported(f"parabolic {pres.parabolics[i - 1].name} has no word-problem oracle")


# -- area table, probe, verification -------------------------------------------------

@dataclass
class AreaTable:
    areas: dict                    # reduced cyclic key -> area
    diagrams: int
    truncated: bool
    witnesses: list = field(default_factory=list)
    open: list = field(default_factory=list)


def build_area_table(pres: RelPresentation, vocab: Vocabulary, K: int, config: RecognitionConfig,
                     wp: Callable | None = None) -> AreaTable:
    caps = config.caps(K)
    dl = enumerate_diagrams(vocab.inventory, pres.inv, caps["cells"], config.boundary_cap,
                            config.max_diagrams, _factors(pres))
    table = min_area_table(dl, pres.inv)
    out = AreaTable(table, len(dl), dl.truncated)
    probe(pres, out, config, wp)
    return out


def _ranked(table: dict) -> list:
    # short words first: dilations of a short word stay cheap to peel
    return sorted(table.items(), key=lambda kv: (len(kv[0]), -Fraction(kv[1], len(kv[0])),
                                                  tuple(letter_code(x) for x in kv[0])))


def probe(pres: RelPresentation, table: AreaTable, config: RecognitionConfig,
          wp: Callable | None = None) -> None:
    """Dilations of the shortest words, with areas from the peeling search.

    A word stays open when its area/length ratio is still rising at the last
    dilation measured (or its dilation is a relation whose area the search
    could not bound).  An open table never certifies a K."""
    factors = _factors(pres)
    top = [w for w, _ in _ranked(table.areas)[:config.probe_words]]
    for w in top:
        table.witnesses.append(Witness(w, table.areas[w], len(w), "m=1"))
        prev = Fraction(table.areas[w], len(w))
        rising = False
        for m in range(2, config.probe_m + 1):
            wm = dilate(w, m)
            if wp is not None and not wp(wm):
                rising = False
                break
            res = word_area(wm, pres.cells(), pres.inv, factors, max_nodes=config.probe_nodes,
                            slack=config.probe_slack)
            if res.area is None:
                rising = wp is not None
                break
            key = reduced_key(wm, pres.inv)
            if key and (key not in table.areas or res.area < table.areas[key]):
                table.areas[key] = res.area
            table.witnesses.append(Witness(wm, res.area, len(wm), f"m={m}"))
            ratio = Fraction(res.area, len(wm))
            rising = ratio > prev
            prev = ratio
            if not rising:
                break
        if rising:
            table.open.append(w)


@dataclass
class Verification:
    ok: bool
    length: int                      # longest length checked completely
    relations: int
    violation: tuple | None = None
    inconclusive: list = field(default_factory=list)


def verification_alphabet(pres: RelPresentation, vocab: Vocabulary | None) -> list:
    out = set(pres.derived_letters())
    if vocab is not None:
        for i, vals in vocab.V.items():
            out.update(ParLetter(i, v) for v in vals)
    return sorted(out, key=letter_code)


def verify_linear_isoperimetry(pres: RelPresentation, K: int, wp: Callable, alphabet: Sequence,
                               config: RecognitionConfig) -> Verification:
    """Area(w) ≤ K|w| for every cyclically reduced relation with |w| ≤ ℓ.

    Words are enumerated exhaustively over ``alphabet`` (up to rotation and
    inversion); areas come from the peeling search with the 𝒯-merges."""
    factors = _factors(pres)
    inv = pres.inv
    seen = 0
    rels = 0
    done = 0
    out = Verification(True, 0, 0)
    for n in range(1, config.verify_length + 1):
        for w in _reduced_words(alphabet, n, inv):
            seen += 1
            if seen > config.verify_words:
                out.length = done
                out.relations = rels
                return out
            if n > 1 and w[0] == inv(w[-1]):
                continue
            if not wp(w):
                continue
            if cyclic_key(w, inv) != w:
                continue
            rels += 1
            res = None
            for sl in (0, None):
                res = word_area(w, pres.cells(), inv, factors, max_area=K * n,
                                max_nodes=config.verify_nodes, slack=sl, greedy=True)
                if res.area is not None:
                    break
            if res.area is None:
                if res.exhausted:
                    out.inconclusive.append(w)
                else:
                    # no filling of area ≤ K|w| inside the peeling window
                    out.ok = False
                    out.violation = w
                    out.length = done
                    out.relations = rels
                    return out
        done = n
    out.length = done
    out.relations = rels
    return out


def default_wp(pres: RelPresentation) -> Callable | None:
    """Free reduction when Γ is the free group on X; None otherwise."""
    if not pres.relators and pres.q == 0:
        return lambda w: not free_reduce(w, pres.inv)
    return None


# -- the K loop -----------------------------------------------------------------------

def _next_K(table: dict, K: int) -> int:
    nxt = K + 1
    while True:
        hi = PAPASOGLU_WINDOW * nxt
        need = max([least_passing_K(a, len(w)) for w, a in table.items() if a <= hi] + [nxt])
        if need == nxt:
            return nxt
        nxt = need


def recognize(pres: RelPresentation, wp: Callable | None = None, K_start: int = 1,
              K_max: int = 10 ** 9, config: RecognitionConfig | None = None) -> RecognitionReport:
    """Run the recognition loop from K_start; see the module docstring."""
    config = config or RecognitionConfig()
    _check_oracles(pres)
    report = RecognitionReport("Timeout", K_start)
    if wp is None and pres.q > 0:
        report.caveats.append("unverified-hypothesis: no word problem for the group, exactness assumed")
    vwp = wp or default_wp(pres)
    cache: dict = {}
    K = K_start
    while K <= K_max:
        ex = exactness_check(pres, K, wp, config)
        if not ex.ok:
            report.outcome, report.K, report.counterexample = "NonExact", K, ex.word
            report.reason = f"step 1 found a word of H_{ex.index} trivial in the group"
            return report
        caps = tuple(sorted(config.caps(K).items()))
        if caps not in cache:
            try:
                vocab = cluster_vocabulary(pres, K, config)
            except VocabularyCapExceeded as e:
                report.outcome, report.K, report.reason = "Timeout", K, f"enumeration cap: {e}"
                report.caveats += config.caveats(K)
                return report
            cache[caps] = (vocab, build_area_table(pres, vocab, K, config, wp))
        vocab, table = cache[caps]
        if table.truncated:
            report.outcome, report.K = "Timeout", K
            report.reason = f"enumeration cap: more than {config.max_diagrams} diagrams"
            report.witnesses = table.witnesses
            report.caveats += config.caveats(K)
            return report
        hi = PAPASOGLU_WINDOW * K
        viol = [(w, a) for w, a in table.areas.items() if a <= hi and exceeds_ratio(a, len(w), K)]
        ratios = [Fraction(a, len(w)) for w, a in table.areas.items()]
        V, Vp, C = vocab.sizes()
        report.trace.append(TraceEntry(K, V, Vp, C, table.diagrams, len(table.areas),
                                       max(ratios, default=Fraction(0)), len(viol)))
        if not viol and table.open:
            report.outcome, report.K = "Timeout", K
            report.reason = ("enumeration cap: dilation probe ended while area/length still rises on "
                             + ", ".join(pres.render_word(w) for w in table.open))
            report.witnesses = table.witnesses
            report.caveats += config.caveats(K)
            return report
        if not viol:
            if vwp is not None:
                ver = verify_linear_isoperimetry(pres, K, vwp, verification_alphabet(pres, vocab), config)
                if not ver.ok:
                    w = ver.violation
                    res = word_area(w, pres.cells(), pres.inv, _factors(pres),
                                    max_nodes=config.verify_nodes)
                    table.areas[reduced_key(w, pres.inv)] = res.area if res.area else K * len(w) + 1
                    table.witnesses.append(Witness(w, table.areas[reduced_key(w, pres.inv)], len(w),
                                                   "verification"))
                    continue
                report.verified_length = ver.length
                if ver.length < config.verify_length:
                    report.caveats.append(f"verification complete up to length {ver.length} only")
                if ver.inconclusive:
                    report.caveats.append(f"verification inconclusive on {len(ver.inconclusive)} relations")
            else:
                report.caveats.append("verification skipped: no word problem for the group")
            report.outcome, report.K = "LinearIsop", K
            report.witnesses = table.witnesses
            report.caveats += config.caveats(K)
            return report
        K = _next_K(table.areas, K) if config.jump else K + 1
    report.outcome, report.K = "Timeout", K_max
    report.reason = "K_max reached"
    report.witnesses = table.witnesses if cache else []
    report.caveats += config.caveats(K_max)
    return report


# -- corollaries --------------------------------------------------------------------------

@dataclass
class HyperbolicityConstant:
    K: int
    rho: int
    delta_cayley: int
    delta_coned: int
    formula: str


def hyperbolicity_constant(K: int, pres: RelPresentation, coefficient: int = 6) -> HyperbolicityConstant:
    """δ for the Cayley graph on 𝒳 from a linear Dehn function, doubled for
    the coned-off graph (the identity on group vertices is 2-bi-Lipschitz).

    The linear-Dehn to thin-triangles step uses δ = c·K·ρ², ρ the longest
    cell perimeter (at least 3 for the triangles of 𝒯(H̃_i)); c is a
    configuration value, not a sharp constant."""
    if K < 1:
        raise ValueError("K must be positive")
    rho = max([3] + [len(c) for c in pres.cells()])
    dc = coefficient * K * rho * rho
    return HyperbolicityConstant(K, rho, dc, 2 * dc, f"{coefficient}*K*rho^2, doubled")


@dataclass
class LoopList:
    loops: list
    partial: bool
    length: int


def coned_length(w: Sequence) -> int:
    return sum(1 if isinstance(x, GenSymbol) else 2 for x in w)


def _rot_key(w):
    w = tuple(w)
    return min((w[i:] + w[:i] for i in range(len(w))),
               key=lambda r: tuple(letter_code(x) for x in r)) if w else ()


def simple_loop_list(pres: RelPresentation, K: int, length: int, wp: Callable | None = None,
                     model=None, config: RecognitionConfig | None = None) -> LoopList:
    """Simple loops of the coned-off graph of length ≤ ``length``, as cyclic
    words up to translation (rotation), both orientations.

    Candidates are reduced boundaries of enumerated diagrams.  A candidate
    is dropped when some diagram of it has a cluster with two edges on the
    boundary (two visits of one cone vertex), or when a proper subword is a
    relation (two visits of a group vertex; checked with ``wp`` if given,
    else against the enumerated relations).  With a ConedGraph ``model``
    vertex repetitions along the path are checked directly as well."""
    config = config or RecognitionConfig()
    inv = pres.inv
    vocab = cluster_vocabulary(pres, K, config)
    caps = config.caps(K)
    dl = enumerate_diagrams(vocab.inventory, inv, caps["cells"], config.boundary_cap,
                            config.max_diagrams, _factors(pres))
    cands: dict = {}
    known = set()
    for d in dl:
        b = d.boundary_word()
        red = cyclic_reduce(b, inv)
        if red:
            known.add(cyclic_key(red, inv))
        if not red or len(red) != len(b) or coned_length(red) > length:
            continue
        bad = any(c.on_boundary >= 2 for c in clusters(d))
        for w in (red, word_inverse(red, inv)):
            k = _rot_key(w)
            cands[k] = cands.get(k, False) or bad

    def is_rel(u):
        if wp is not None:
            return wp(u)
        r = cyclic_reduce(u, inv)
        return not r or cyclic_key(r, inv) in known

    out = []
    for w, bad in cands.items():
        if bad:
            continue
        n = len(w)
        ww = w + w
        if any(is_rel(ww[i:i + j]) for i in range(n) for j in range(1, n)):
            continue
        if model is not None:
            verts = model.path_of(w)
            if len(set(verts[:-1])) != len(verts) - 1:
                continue
        out.append(w)
    out.sort(key=lambda w: (coned_length(w), tuple(letter_code(x) for x in w)))
    return LoopList(out, dl.truncated, length)


# -- abelian structure finder ----------------------------------------------------------------

@dataclass
class Candidate:
    n: int
    k: int
    s: int
    families: tuple        # tuple of tuples of (word, order or 0 for infinite)
    outcome: str = ""
    K: int | None = None
    seconds: float = 0.0


@dataclass
class FinderResult:
    status: str                      # Found | NotFound
    presentation: RelPresentation | None
    candidate: Candidate | None
    report: RecognitionReport | None
    tried: list


def _elements(pres: RelPresentation, wp: Callable, max_len: int) -> list:
    alpha = pres.symmetric_X()
    out = []
    for n in range(1, max_len + 1):
        for w in _reduced_words(alpha, n, pres.inv):
            if wp(w):
                continue
            # up to inverse: u and u⁻¹ generate the same subgroup
            if any(wp(w + word_inverse(u, pres.inv)) or wp(w + u) for u in out):
                continue
            out.append(w)
    return out


def _order(w, wp, s) -> int:
    for j in range(1, s + 1):
        if wp(w * j):
            return j
    return 0


def relative_from_family(pres: RelPresentation, families: Sequence) -> RelPresentation:
    """Relative presentation with H̃_i abelian on basis π_i: infinite-order
    elements become free coordinates, elements of order t ≤ s torsion ℤ/t.
    Each basis element gets an identification relator w·x⁻¹."""
    taken = set(pres.generators)
    pool = (c for c in "pqrsuvwxyzmnojklhigfedcbat" if c not in taken)
    specs = []
    relators = list(pres.relators)
    for i, fam in enumerate(families, 1):
        free = [(w, t) for w, t in fam if t == 0]
        tors = [(w, t) for w, t in fam if t > 0]
        basis = free + tors
        names = tuple(next(pool) for _ in basis)
        kind = "free-abelian" if not tors else "abelian"
        spec = ParabolicSpec(i, f"P{i}", kind, len(free), tuple(t for _, t in tors), names,
                             {g: tuple(w) for g, (w, _) in zip(names, basis)})
        specs.append(spec)
        f: AbelianFactor = spec.make_factor()
        for j, (w, _) in enumerate(basis):
            unit = tuple(1 if t == j else 0 for t in range(len(basis)))
            relators.append(tuple(w) + (ParLetter(i, f.inv(f.reduce(unit))),))
    return RelPresentation(pres.generators, specs, relators)


def find_abelian_structure(pres: RelPresentation, wp: Callable, n_max: int, k_max: int, s_max: int,
                           K_max: int, config: RecognitionConfig | None = None,
                           element_length: int = 1, budget: int | None = None) -> FinderResult:
    """Search relative structures with abelian parabolics.

    Candidates are the empty family, then families of n ≤ n_max pairwise
    commuting tuples of at most k elements (reduced words of length ≤
    ``element_length``, up to inverse), with orders checked up to s.  The
    winner is the first candidate in this order whose recognition reaches
    LinearIsop within K_max.  NonExact candidates are discarded.  Exhausted
    bounds (or ``budget`` candidates) give NotFound, which proves nothing."""
    config = config or RecognitionConfig()
    elems = _elements(pres, wp, element_length) if k_max > 0 else []

    def candidates():
        yield Candidate(0, 0, 0, ()), pres
        seen = set()
        for n in range(1, n_max + 1):
            for k in range(1, k_max + 1):
                for s in range(0, s_max + 1):
                    subsets = [sub for size in range(1, k + 1)
                               for sub in itertools.combinations(elems, size)
                               if all(wp(a + b + word_inverse(a, pres.inv) + word_inverse(b, pres.inv))
                                      for a, b in itertools.combinations(sub, 2))]
                    for fam in itertools.combinations(subsets, n):
                        families = tuple(tuple((w, _order(w, wp, s)) for w in sub) for sub in fam)
                        if families not in seen:
                            seen.add(families)
                            yield Candidate(n, k, s, families), None

    tried = []
    for cand, rel in candidates():
        if budget is not None and len(tried) >= budget:
            break
        rel = rel or relative_from_family(pres, cand.families)
        rwp = (lambda w, rel=rel: wp(rel.to_X_word(w))) if rel.q else wp
        t0 = time.perf_counter()
        rep = recognize(rel, rwp, 1, K_max, config)
        cand.outcome, cand.K = rep.outcome, rep.K
        cand.seconds = time.perf_counter() - t0
        tried.append(cand)
        if rep.outcome == "LinearIsop":
            return FinderResult("Found", rel, cand, rep, tried)
    return FinderResult("NotFound", None, None, None, tried)
