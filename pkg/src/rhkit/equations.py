"""Systems of equations, inequations and constraints.

A system lives over unknowns Ω and named parameters.  Words are tuples of
terms ``(name, sign)``.  Triangulation brings every equation to three
positive letters and every inequation or constraint to a single unknown.

Solving in Γ goes through the free product Γ̃: each triangle is lifted to the
six equations  z̃_j⁻¹ l_j c_j r_j = 1,  r_j l_{j+1} = 1  with the central
triple (c_1, c_2, c_3) either fixed from a finite list (regular index) or
constrained by c_1 c_2 c_3 = 1 (singular index).  Lifted systems are searched
exhaustively inside a budget; the search can certify Sat, never Unsat.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable

from .coned import ConedGraph, InsufficientExploration, path_length
from .factors import AbelianFactor, FiniteFactor, FreeFactor
from .freeprod import IDENTITY, FactorElement, FPElement
from .geolang import BudgetExceeded, GnrAutomaton, enumerate_long_forms, gnr_accepts, \
    is_local_quasigeodesic
from .words import MalformedInput, word_inverse

NEUTRAL = "1"
HANDLES = ("L", "L\\L0")

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_.~]*$")


@dataclass
class EqSystem:
    unknowns: list
    params: dict = field(default_factory=dict)
    equations: list = field(default_factory=list)
    inequations: list = field(default_factory=list)
    constraints: list = field(default_factory=list)   # (word, handle)

    def copy(self) -> "EqSystem":
        return EqSystem(list(self.unknowns), dict(self.params), list(self.equations),
                        list(self.inequations), list(self.constraints))

    def is_triangular(self) -> bool:
        unk = set(self.unknowns)
        if any(len(e) != 3 or any(s != 1 for _, s in e) for e in self.equations):
            return False
        for w in self.inequations + [c[0] for c in self.constraints]:
            if len(w) != 1 or w[0][1] != 1 or w[0][0] not in unk:
                return False
        return True

    def inequation_unknowns(self) -> list:
        return [w[0][0] for w in self.inequations if len(w) == 1 and w[0][1] == 1]


# -- text format -----------------------------------------------------------------------

def parse_system(text: str, pres) -> EqSystem:
    """Read ``unknowns:``, ``param g = word``, ``eq:``, ``ineq:`` and ``cons: w in H`` lines.

    In equation words a token is an unknown, a parameter, ``name^-1``, the
    uppercase of a one-letter unknown (its inverse), ``1``, or a literal word
    of the presentation (which becomes a parameter named by its text).
    """
    gens = set(pres.generators)
    sys = EqSystem([])
    body = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("unknowns:"):
            for name in line.split(":", 1)[1].replace(",", " ").split():
                if not _IDENT.match(name) or name in gens or name.lower() in gens:
                    raise MalformedInput(f"line {lineno}: bad unknown name {name!r}")
                if name in sys.unknowns:
                    raise MalformedInput(f"line {lineno}: duplicate unknown {name!r}")
                sys.unknowns.append(name)
        elif line.startswith("param "):
            m = re.match(r"^param\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$", line)
            if not m:
                raise MalformedInput(f"line {lineno}: expected 'param NAME = WORD'")
            sys.params[m.group(1)] = pres.parse_word(m.group(2))
        elif re.match(r"^(eq|ineq|cons):", line):
            body.append((lineno, line))
        else:
            raise MalformedInput(f"line {lineno}: cannot parse {line!r}")
    clash = set(sys.unknowns) & set(sys.params)
    if clash:
        raise MalformedInput(f"names used both as unknown and parameter: {sorted(clash)}")
    for lineno, line in body:
        kind, rest = line.split(":", 1)
        if kind == "cons":
            m = re.match(r"^(.*)\s+in\s+(\S+)$", rest.strip())
            if not m:
                raise MalformedInput(f"line {lineno}: expected 'cons: WORD in LANGUAGE'")
            handle = m.group(2)
            if handle not in HANDLES and not handle.startswith("AUT:"):
                raise MalformedInput(f"line {lineno}: unknown language {handle!r}")
            sys.constraints.append((_parse_terms(m.group(1), sys, pres, lineno), handle))
        else:
            word = _parse_terms(rest, sys, pres, lineno)
            (sys.equations if kind == "eq" else sys.inequations).append(word)
    return sys


def _parse_terms(text, sys, pres, lineno) -> tuple:
    out = []
    for tok in text.split():
        if tok.endswith("^-1"):
            base = tok[:-3]
            if base not in sys.unknowns and base not in sys.params:
                raise MalformedInput(f"line {lineno}: unknown name {base!r}")
            out.append((base, -1))
        elif tok in sys.unknowns or tok in sys.params:
            out.append((tok, 1))
        elif len(tok) == 1 and tok.isupper() and tok.lower() in sys.unknowns:
            out.append((tok.lower(), -1))
        elif tok == NEUTRAL:
            sys.params.setdefault(NEUTRAL, ())
            out.append((NEUTRAL, 1))
        else:
            try:
                value = pres.parse_word(tok)
            except MalformedInput as exc:
                raise MalformedInput(f"line {lineno}: {exc}") from None
            sys.params.setdefault(tok, value)
            out.append((tok, 1))
    return tuple(out)


def render_term(t) -> str:
    return t[0] if t[1] == 1 else f"{t[0]}^-1"


def render_word(w) -> str:
    return " ".join(render_term(t) for t in w) if w else NEUTRAL


def render_system(sys: EqSystem, render_value=str) -> str:
    lines = ["unknowns: " + ", ".join(sys.unknowns)]
    for name in sorted(sys.params):
        lines.append(f"param {name} = {render_value(sys.params[name])}")
    lines += [f"eq: {render_word(w)}" for w in sys.equations]
    lines += [f"ineq: {render_word(w)}" for w in sys.inequations]
    lines += [f"cons: {render_word(w)} in {h}" for w, h in sys.constraints]
    return "\n".join(lines) + "\n"


# -- triangulation ------------------------------------------------------------------------

def triangulate(sys: EqSystem, invert: Callable | None = None, neutral=()) -> EqSystem:
    """Equisatisfiable triangular system.

    Inverted parameters become new parameters (``invert`` computes their
    value).  An inverted unknown x gets a partner x' with x x' 1 = 1.  Long
    equations are cut with a fresh pair u, u' (u u' 1 = 1); short ones are
    padded with the neutral parameter ``1``.
    """
    invert = invert or word_inverse
    out = EqSystem(list(sys.unknowns), dict(sys.params))
    taken = set(sys.unknowns) | set(sys.params)
    counter = itertools.count(1)

    def fresh(stem="t"):
        while True:
            name = f"{stem}{next(counter)}"
            if name not in taken:
                taken.add(name)
                out.unknowns.append(name)
                return name

    def use_neutral():
        if NEUTRAL not in out.params:
            out.params[NEUTRAL] = neutral
            taken.add(NEUTRAL)
        return (NEUTRAL, 1)

    partner: dict = {}
    pending: list = []     # equations before cutting

    def positive(word):
        res = []
        for name, s in word:
            if s == 1:
                res.append((name, 1))
            elif name in sys.params:
                pname = f"{name}^-1"
                if pname not in out.params:
                    out.params[pname] = invert(sys.params[name])
                res.append((pname, 1))
            else:
                if name not in partner:
                    partner[name] = fresh()
                    pending.append(((name, 1), (partner[name], 1)))
                res.append((partner[name], 1))
        return tuple(res)

    for w in sys.equations:
        pending.append(positive(w))
    for w in sys.inequations:
        w = positive(w)
        if len(w) == 1 and w[0][0] in out.unknowns:
            out.inequations.append(w)
            continue
        u = fresh()
        pending.append(w + ((u, 1),))          # u = w⁻¹, and u ≠ 1 iff w ≠ 1
        out.inequations.append(((u, 1),))
    for w, handle in sys.constraints:
        w = positive(w)
        if len(w) == 1 and w[0][0] in out.unknowns:
            out.constraints.append((w, handle))
            continue
        u, v = fresh(), fresh()
        pending.append(w + ((v, 1),))          # v = w⁻¹
        pending.append(((u, 1), (v, 1)))        # u = w
        out.constraints.append((((u, 1),), handle))
    for w in pending:
        while len(w) > 3:
            u, ui = fresh(), fresh()
            out.equations.append((w[0], w[1], (u, 1)))
            out.equations.append(((u, 1), (ui, 1), use_neutral()))
            w = ((ui, 1),) + w[2:]
        if not w:
            continue
        while len(w) < 3:
            w = w + (use_neutral(),)
        out.equations.append(w)
    return out


# -- evaluating words -------------------------------------------------------------------------

class FPOps:
    """Group operations of Γ̃ for evaluating terms (parameter values may be letter tuples)."""

    def __init__(self, fp):
        self.fp = fp
        self.one = IDENTITY

    def mul(self, a, b):
        return self.fp.multiply(a, b)

    def inv(self, a):
        return self.fp.inverse(a)

    def is_one(self, a):
        return a.is_identity()

    def value(self, v):
        return v if isinstance(v, FPElement) else self.fp.from_letters(v)


def evaluate(word, values: dict, ops):
    acc = ops.one
    for name, s in word:
        v = values[name]
        acc = ops.mul(acc, v if s == 1 else ops.inv(v))
    return acc


def _accepts(lang, a, fp) -> bool:
    if isinstance(lang, GnrAutomaton):
        return gnr_accepts(lang, a, fp)
    return bool(lang(a))


def check_assignment(sys: EqSystem, assignment: dict, ops, languages=None) -> bool:
    values = {k: ops.value(v) for k, v in sys.params.items()}
    values.update(assignment)
    for w in sys.equations:
        if not ops.is_one(evaluate(w, values, ops)):
            return False
    for w in sys.inequations:
        if ops.is_one(evaluate(w, values, ops)):
            return False
    for w, handle in sys.constraints:
        lang = (languages or {}).get(handle)
        if lang is None:
            raise MalformedInput(f"no language bound to {handle!r}")
        if not _accepts(lang, evaluate(w, values, ops), ops.fp):
            return False
    return True


def relative_word(pres, sys: EqSystem, word, witness: dict) -> tuple:
    """Concatenated relative word for a term word (witness values are letter tuples)."""
    out = []
    for name, s in word:
        v = witness[name] if name in witness else tuple(sys.params[name])
        out.extend(v if s == 1 else word_inverse(v, pres.inv))
    return tuple(out)


def verify_in_group(pres, sys: EqSystem, witness: dict, wp) -> bool:
    """Equations trivial and inequations nontrivial in Γ through the word-problem oracle."""
    for w in sys.equations:
        if not wp(relative_word(pres, sys, w, witness)):
            return False
    for w in sys.inequations:
        if wp(relative_word(pres, sys, w, witness)):
            return False
    return True


# -- central triples and parameter representatives ---------------------------------------------

def _reduced_words(pres, n):
    return [()] + FreeFactor(pres.generators).ball(n)


def enumerate_central_triples(pres, bound: int, mode: str = "hyperbolic", sectors=None,
                              kappa=None, nf: Callable | None = None, wp: Callable | None = None,
                              budget: int = 2_000_000) -> list:
    """Triples (c1, c2, c3) of Γ̃ with trivial product in Γ.

    hyperbolic: reduced words over X of length <= bound.
    relative: long normal forms of at most ``bound`` letters from X and the
    sectors Sec_k(kappa).  ``nf`` maps a relative word to a canonical key of
    its image in Γ (fast path); otherwise ``wp`` is called on every triple.
    """
    fp = pres.fp
    if mode == "hyperbolic":
        pieces = [fp.from_letters(w) for w in _reduced_words(pres, bound)]
    elif mode == "relative":
        if sectors is None:
            raise MalformedInput("relative mode needs sector tables")
        r = bound if kappa is None else kappa
        values = {}
        for k in range(1, pres.q + 1):
            f = pres.factor(k)
            values[k] = [v for v in sectors.sorted_members(k, r) if not f.is_identity(v)]
        words = [w for w in enumerate_long_forms(pres, values, 2 * bound) if len(w) <= bound]
        pieces = [fp.from_letters(w) for w in words]
    else:
        raise MalformedInput(f"unknown mode {mode!r}")
    if len(pieces) ** 2 > budget:
        raise BudgetExceeded(f"{len(pieces)} pieces give more than {budget} pairs")
    key = lambda a: tuple((s.factor, fp.factors[s.factor].key(s.value)) for s in a.syllables)
    pieces.sort(key=lambda a: (len(fp.long_normal_form(a)), key(a)))
    lnf = {a: fp.long_normal_form(a) for a in pieces}
    out = []
    if nf is not None:
        by_image: dict = {}
        for c in pieces:
            by_image.setdefault(nf(lnf[c]), []).append(c)
        for c1 in pieces:
            for c2 in pieces:
                target = nf(word_inverse(lnf[c1] + lnf[c2], pres.inv))
                for c3 in by_image.get(target, ()):
                    out.append((c1, c2, c3))
        return out
    if wp is None:
        raise MalformedInput("need a word-problem or normal-form oracle")
    for c1, c2, c3 in itertools.product(pieces, repeat=3):
        if wp(lnf[c1] + lnf[c2] + lnf[c3]):
            out.append((c1, c2, c3))
    return out


def enumerate_param_reps(p, lam, mu, model: ConedGraph, frag=None, value_radius=None,
                         budget: int = 200_000) -> list:
    """Elements of Γ̃ whose path is a (λ, μ)-quasi-geodesic from 1 to the image of ``p``.

    ``p`` is a relative word.  Parabolic letter values are taken from the
    ball of radius ``value_radius`` (default |p| + λ·d + μ); the set is
    finite only up to that truncation.
    """
    pres = model.pres
    target = model.canon(pres.to_X_word(p))
    d = model.distance(model.vertex(()), model.vertex(target))
    reach = int(lam * d + mu)
    if frag is not None and frag.radius < reach:
        raise InsufficientExploration(reach, frag.radius, "parameter representatives")
    if value_radius is None:
        value_radius = len(pres.to_X_word(p)) + reach
    values = {}
    for k in range(1, pres.q + 1):
        f = pres.factor(k)
        values[k] = [v for v in f.ball(value_radius) if not f.is_identity(v)]
    words = enumerate_long_forms(pres, values, reach)
    if len(words) > budget:
        raise BudgetExceeded(f"{len(words)} candidate representatives (budget {budget})")
    out = []
    for w in words:
        if model.canon(pres.to_X_word(w)) != target:
            continue
        path = model.path_of(w)
        if is_local_quasigeodesic(path, len(path), lam, mu, model):
            out.append(pres.fp.from_letters(w))
    return out


# -- lifted family -----------------------------------------------------------------------------

@dataclass(frozen=True)
class LiftTag:
    choices: tuple      # per triangle: triple index or "singular"
    reps: tuple         # per parameter: (name, index)

    def describe(self) -> str:
        parts = [f"T{i + 1}={'S' if c == 'singular' else c}" for i, c in enumerate(self.choices)]
        parts += [f"{n}#{j}" for n, j in self.reps]
        return " ".join(parts) or "trivial"


def _lvar(kind, i, j):
    return f"{kind}{i}.{j}"


class LiftedFamily:
    """Lazily built family of lifted systems over Γ̃, simplest choices first."""

    def __init__(self, sys: EqSystem, triples, reps: dict, mode: str = "hyperbolic", fp=None):
        if not sys.is_triangular():
            raise MalformedInput("lifting needs a triangular system")
        self.sys = sys
        self.triples = list(triples)
        self.mode = mode
        self.fp = fp
        self.reps = {p: list(reps.get(p) or ([fp.from_letters(v)] if fp else [])) for p, v in
                     sorted(sys.params.items())}
        per_index = list(range(len(self.triples)))
        if mode == "relative":
            per_index.append("singular")
        self.per_index = per_index
        self.n = len(sys.equations)

    def __len__(self):
        total = len(self.per_index) ** self.n
        for r in self.reps.values():
            total *= len(r)
        return total

    def __iter__(self):
        names = list(self.reps)
        rep_ranges = [range(len(self.reps[p])) for p in names]
        for rep_idx in itertools.product(*rep_ranges):
            for choice in itertools.product(self.per_index, repeat=self.n):
                tag = LiftTag(tuple(choice), tuple(zip(names, rep_idx)))
                yield self.member(tag), tag

    def member(self, tag: LiftTag) -> EqSystem:
        sys = self.sys
        unknowns = [f"~{x}" for x in sys.unknowns]
        params = {f"~{p}": self.reps[p][j] for p, j in tag.reps}
        eqs = []
        for i, (eq, choice) in enumerate(zip(sys.equations, tag.choices), 1):
            unknowns += [_lvar(k, i, j) for k in "lcr" for j in (1, 2, 3)]
            for j, (name, _) in enumerate(eq, 1):
                eqs.append(((f"~{name}", -1), (_lvar("l", i, j), 1), (_lvar("c", i, j), 1),
                            (_lvar("r", i, j), 1)))
            for j in (1, 2, 3):
                eqs.append(((_lvar("r", i, j), 1), (_lvar("l", i, j % 3 + 1), 1)))
            if choice == "singular":
                eqs.append(tuple((_lvar("c", i, j), 1) for j in (1, 2, 3)))
            else:
                for j, c in enumerate(self.triples[choice], 1):
                    params[_lvar("t", i, j)] = c
                    eqs.append(((_lvar("c", i, j), 1), (_lvar("t", i, j), -1)))
        cons = [(tuple((f"~{n}", s) for n, s in w), h) for w, h in sys.constraints]
        return EqSystem(unknowns, params, eqs, [], cons)


def build_lifted_family(sys: EqSystem, triples, reps: dict, mode: str = "hyperbolic",
                        fp=None) -> LiftedFamily:
    return LiftedFamily(sys, triples, reps, mode, fp)


# -- bounded search in Γ̃ ------------------------------------------------------------------------

@dataclass(frozen=True)
class Budget:
    syllables: int = 2
    coord: int = 2
    nodes: int = 200_000

    @classmethod
    def of(cls, n) -> "Budget":
        return n if isinstance(n, Budget) else cls(int(n), int(n))


@dataclass
class SolveResult:
    status: str                  # "Sat" | "Unknown" | "Unsat"
    witness: dict = field(default_factory=dict)
    note: str = ""
    nodes: int = 0
    tag: object = None
    caveats: list = field(default_factory=list)


def syllable_norm(fp, s: FactorElement) -> int:
    f = fp.factors[s.factor]
    if s.factor == 0:
        return len(s.value)
    if isinstance(f, AbelianFactor):
        return max(abs(c) for c in f.signed(s.value))
    return f.norm(s.value)


def element_cost(fp, a: FPElement) -> tuple:
    return len(a.syllables), max((syllable_norm(fp, s) for s in a.syllables), default=0)


def element_key(fp, a: FPElement) -> tuple:
    return tuple((s.factor, fp.factors[s.factor].key(s.value)) for s in a.syllables)


def _syllable_values(fp, k, c) -> list:
    f = fp.factors[k]
    if k == 0:
        vals = f.ball(c)
    elif isinstance(f, AbelianFactor):
        ranges = [range(t) if t else range(-c, c + 1) for t in f.orders]
        vals = [f.reduce(v) for v in itertools.product(*ranges)]
        vals = sorted({v for v in vals if not f.is_identity(v)}, key=f.key)
    elif isinstance(f, FiniteFactor):
        vals = [v for v in range(1, f.n) if f.norm(v) <= c]
    else:
        vals = f.ball(c)
    return [v for v in vals if syllable_norm(fp, FactorElement(k, v)) <= c]


def candidate_pool(fp, max_syllables: int, max_coord: int) -> list:
    """All elements with at most ``max_syllables`` syllables of norm <= ``max_coord``,
    sorted by (cost, key)."""
    per = {k: _syllable_values(fp, k, max_coord) for k in range(len(fp.factors))}
    out = [IDENTITY]
    frontier = [()]
    for _ in range(max_syllables):
        nxt = []
        for syl in frontier:
            last = syl[-1].factor if syl else None
            for k, vals in per.items():
                if k == last:
                    continue
                for v in vals:
                    nxt.append(syl + (FactorElement(k, v),))
        out.extend(FPElement(s) for s in nxt)
        frontier = nxt
    return sorted(out, key=lambda a: (element_cost(fp, a), element_key(fp, a)))


def _solve_plan(sys: EqSystem):
    """Static order: decisions and unknowns computed from a single-unknown equation.

    Decisions are chosen greedily by how many unknowns they determine.
    """
    unknowns = list(sys.unknowns)
    unk = set(unknowns)

    def closure(known):
        known = set(known)
        steps = []
        changed = True
        while changed:
            changed = False
            for idx, w in enumerate(sys.equations):
                free = [n for n, _ in w if n in unk and n not in known]
                if len(free) == 1 and sum(1 for n, _ in w if n == free[0]) == 1:
                    known.add(free[0])
                    steps.append(("solve", free[0], idx))
                    changed = True
        return known, steps

    known, steps = closure(())
    plan = list(steps)
    while len(known) < len(unk):
        best = None
        for x in unknowns:
            if x in known:
                continue
            k2, st = closure(known | {x})
            if best is None or len(k2) > len(best[1]):
                best = (x, k2, st)
        x, known, st = best
        plan.append(("decide", x, None))
        plan.extend(st)
    return plan


def _checks_by_step(sys: EqSystem, plan):
    order = {x: i for i, (_, x, _) in enumerate(plan)}
    unk = set(sys.unknowns)
    checks = [[] for _ in plan]

    def when(word):
        idx = [order[n] for n, _ in word if n in unk]
        return max(idx) if idx else -1

    pre = []
    for w in sys.equations:
        (checks[when(w)] if when(w) >= 0 else pre).append(("eq", w))
    for w in sys.inequations:
        (checks[when(w)] if when(w) >= 0 else pre).append(("ineq", w))
    for w, h in sys.constraints:
        (checks[when(w)] if when(w) >= 0 else pre).append(("cons", w, h))
    return pre, checks


def bounded_solve(sys: EqSystem, fp, budget=2, languages: dict | None = None,
                  accept: Callable | None = None) -> SolveResult:
    """Exhaustive search for a solution in Γ̃ within ``budget``.

    Decision unknowns range over elements with at most ``budget.syllables``
    syllables of norm <= ``budget.coord``; the other unknowns are computed
    from equations.  Levels are visited by (total decision syllables,
    sup-norm) and, inside a level, in alphabet order of the decision values,
    so the first witness found is the least one in that order.  ``accept`` is
    an extra predicate on the witness (the search continues if it fails).
    """
    budget = Budget.of(budget)
    ops = FPOps(fp)
    languages = languages or {}
    for _, h in sys.constraints:
        if h not in languages:
            raise MalformedInput(f"no language bound to {h!r}")
    params = {k: ops.value(v) for k, v in sys.params.items()}
    plan = _solve_plan(sys)
    pre, checks = _checks_by_step(sys, plan)

    def run_checks(items, values):
        for item in items:
            val = evaluate(item[1], values, ops)
            if item[0] == "eq" and not val.is_identity():
                return False
            if item[0] == "ineq" and val.is_identity():
                return False
            if item[0] == "cons" and not _accepts(languages[item[2]], val, fp):
                return False
        return True

    if not run_checks(pre, params):
        return SolveResult("Unknown", note="parameter-only conditions fail")
    decisions = [x for kind, x, _ in plan if kind == "decide"]
    pool = candidate_pool(fp, budget.syllables, budget.coord)
    pool = sorted(((*element_cost(fp, a), a) for a in pool), key=lambda t: element_key(fp, t[2]))
    nodes = 0

    class Stop(Exception):
        pass

    def solve_step(values, x, idx):
        w = sys.equations[idx]
        pos = next(i for i, (n, _) in enumerate(w) if n == x)
        left = evaluate(w[:pos], values, ops)
        right = evaluate(w[pos + 1:], values, ops)
        v = fp.inverse(fp.multiply(right, left))
        return v if w[pos][1] == 1 else fp.inverse(v)

    def dfs(i, values, used_syl, hit_c, T, C, pools):
        nonlocal nodes
        if i == len(plan):
            if used_syl != T or not hit_c:
                return None
            witness = {x: values[x] for x in sys.unknowns}
            if accept is not None and not accept(witness):
                return None
            return witness
        kind, x, idx = plan[i]
        if kind == "solve":
            values[x] = solve_step(values, x, idx)
            if run_checks(checks[i], values):
                res = dfs(i + 1, values, used_syl, hit_c, T, C, pools)
                if res is not None:
                    return res
            del values[x]
            return None
        remaining = sum(1 for k, _, _ in plan[i + 1:] if k == "decide")
        for s, a, c in pools:
            if used_syl + s > T or used_syl + s + remaining * budget.syllables < T:
                continue
            nodes += 1
            if nodes > budget.nodes:
                raise Stop
            values[x] = a
            if run_checks(checks[i], values):
                res = dfs(i + 1, values, used_syl + s, hit_c or c == C, T, C, pools)
                if res is not None:
                    return res
            del values[x]
        return None

    try:
        for T in range(0, budget.syllables * len(decisions) + 1):
            for C in range(0, budget.coord + 1):
                if (T == 0) != (C == 0):
                    continue
                pools = [(s, a, c) for s, c, a in pool if c <= C]
                res = dfs(0, dict(params), 0, C == 0, T, C, pools)
                if res is not None:
                    if not check_assignment(sys, res, ops, languages):
                        raise AssertionError("search produced a non-verifying witness")
                    return SolveResult("Sat", res, f"level T={T} C={C}", nodes)
    except Stop:
        return SolveResult("Unknown", note=f"node budget {budget.nodes} reached", nodes=nodes)
    return SolveResult("Unknown", note=f"no witness within syllables<={budget.syllables} "
                                       f"coord<={budget.coord}", nodes=nodes)


# -- the bounded existential pipeline -------------------------------------------------------------

@dataclass
class LiftingData:
    mode: str                      # "hyperbolic" or "relative"
    triples: list
    reps: dict                     # parameter name -> list of FPElement
    L: object                      # language of geometric elements
    L_nonzero: object              # 𝓛 minus 𝓛₀
    caveats: list = field(default_factory=list)


def decide_existential(sys: EqSystem, pres, wp, lifting: LiftingData, budget=2,
                       max_members: int = 500, languages: dict | None = None) -> SolveResult:
    """Lift, search each family member within budget, project and verify in Γ.

    Every unknown ω̃ is constrained to 𝓛, and to 𝓛∖𝓛₀ when ω ≠ 1 is an
    inequation.  Sat witnesses are relative words checked through ``wp``;
    otherwise the answer is Unknown (bounded search never certifies Unsat).
    """
    if not sys.is_triangular():
        raise MalformedInput("decide_existential needs a triangular system")
    fp = pres.fp
    ineq = set(sys.inequation_unknowns())
    base = sys.copy()
    base.inequations = []
    for x in sys.unknowns:
        base.constraints.append((((x, 1),), "L\\L0" if x in ineq else "L"))
    langs = dict(languages or {})
    langs["L"] = lifting.L
    langs["L\\L0"] = lifting.L_nonzero
    family = build_lifted_family(base, lifting.triples, lifting.reps, lifting.mode, fp)

    def project(witness):
        return {x: fp.long_normal_form(witness[f"~{x}"]) for x in sys.unknowns}

    def accept(witness):
        return verify_in_group(pres, sys, project(witness), wp)

    tried = 0
    nodes = 0
    for member, tag in family:
        if tried >= max_members:
            break
        tried += 1
        res = bounded_solve(member, fp, budget, langs, accept)
        nodes += res.nodes
        if res.status == "Sat":
            return SolveResult("Sat", project(res.witness), f"member {tag.describe()}; {res.note}",
                               nodes, tag, list(lifting.caveats))
    total = len(family)
    note = f"no witness in {tried} of {total} lifted systems; bounded search cannot certify Unsat"
    return SolveResult("Unknown", {}, note, nodes, None, list(lifting.caveats))
