import itertools
import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from rhkit.coned import ConedGraph, InsufficientExploration, explore
from rhkit.equations import (Budget, EqSystem, FPOps, LiftingData, bounded_solve,
                             build_lifted_family, check_assignment, decide_existential,
                             enumerate_central_triples, enumerate_param_reps, parse_system,
                             render_system, triangulate, verify_in_group)
from rhkit.geolang import SectorTable, build_L_automaton, compute_L0, subtract_finite, toy_constants
from rhkit.lattice import matmul, smith_normal_form, solve_integer
from rhkit.oracles import group_wp
from rhkit.presentation import parse_presentation
from rhkit.va import parse_va_spec, va_decide, verify_va
from rhkit.words import MalformedInput, free_reduce, word_inverse

import bruteforce as bf

FREE2 = "[group]\ngenerators = a, b\n"
Z2 = "[group]\ngenerators = a, b\nrelators = abAB\n"
Z3 = "[group]\ngenerators = a, b, c\nrelators = abAB, acAC, bcBC\n"
DINF = "[group]\ngenerators = a, t\nrelators = tt, taTa\n"
Z2_REL_Z2 = """
[group]
generators = a, b
relators = a P[-1,0], b P[0,-1]
[parabolic.P]
kind = free-abelian
rank = 2
gens = x, y
embed x = a
embed y = b
"""

VA_Z2 = "rank: 2\nF: 0\nbasis: a, b\ngen a: 1 0 | 0\ngen b: 0 1 | 0\n"
VA_Z3 = "rank: 3\nF: 0\nbasis: a, b, c\ngen a: 1 0 0 | 0\ngen b: 0 1 0 | 0\ngen c: 0 0 1 | 0\n"
VA_DINF = "rank: 1\nF: 0 1; 1 0\nrho 1: -1\nsection 1: t\nbasis: a\ngen a: 1 | 0\ngen t: 0 | 1\n"


def free2():
    return parse_presentation(FREE2)


def inverter(pres):
    return lambda v: word_inverse(v, pres.inv)


# -- parsing ------------------------------------------------------------------------

def test_parse_and_render_round_trip():
    pres = free2()
    text = "unknowns: x, y\nparam g = abA\neq: x g y^-1\nineq: x\ncons: y in L\\L0\n"
    sys = parse_system(text, pres)
    assert sys.equations == [(("x", 1), ("g", 1), ("y", -1))]
    again = parse_system(render_system(sys, pres.render_word), pres)
    assert again == sys


def test_parse_literals_and_uppercase_inverse():
    sys = parse_system("unknowns: x\neq: x a X A\n", free2())
    assert sys.equations[0] == (("x", 1), ("a", 1), ("x", -1), ("A", 1))
    assert set(sys.params) == {"a", "A"}


def test_parse_rejects_bad_input():
    pres = free2()
    with pytest.raises(MalformedInput):
        parse_system("unknowns: a\n", pres)
    with pytest.raises(MalformedInput):
        parse_system("unknowns: x\ncons: x in M\n", pres)
    with pytest.raises(MalformedInput):
        parse_system("unknowns: x\nfoo\n", pres)


# -- triangulation ------------------------------------------------------------------------

def s3_group():
    return bf.S3, bf.compose, bf.perm_inverse, bf.S3_ID


def z6_group():
    return list(range(6)), lambda x, y: (x + y) % 6, lambda x: (-x) % 6, 0


def brute(sys, group):
    elements, mul, inv, one = group
    return bf.brute_system_sat(sys.unknowns, sys.params, sys.equations, sys.inequations,
                               elements, mul, inv, one)


def test_triangulate_long_equation_over_s3():
    elements, mul, inv, one = s3_group()
    g = elements[3]
    sys = EqSystem(["w", "x", "y", "z"], {"g": g},
                   [(("w", 1), ("x", 1), ("y", 1), ("z", 1))], [(("w", 1), ("g", 1))])
    tri = triangulate(sys, inv, one)
    assert tri.is_triangular()
    first = tri.equations[0]
    assert first[:2] == (("w", 1), ("x", 1)) and first[2][0] not in sys.unknowns
    assert brute(sys, s3_group()) == brute(tri, s3_group())


def test_triangulate_keeps_triangular_system():
    sys = EqSystem(["x", "y"], {"g": 1}, [(("x", 1), ("y", 1), ("g", 1))], [(("x", 1),)])
    assert triangulate(sys) == sys


def test_triangulate_pads_short_equation_with_neutral():
    sys = EqSystem(["x", "y"], {}, [(("x", 1), ("y", 1))])
    tri = triangulate(sys, neutral=0)
    assert tri.equations == [(("x", 1), ("y", 1), ("1", 1))]
    assert tri.params["1"] == 0


def random_system(rng, group):
    elements = group[0]
    unknowns = ["x", "y", "z"][:rng.randint(1, 3)]
    params = {"g": rng.choice(elements), "h": rng.choice(elements)}
    names = unknowns + list(params)

    def word(lo, hi):
        return tuple((rng.choice(names), rng.choice((1, -1))) for _ in range(rng.randint(lo, hi)))
    eqs = [word(1, 5) for _ in range(rng.randint(1, 2))]
    ineqs = [word(1, 2) for _ in range(rng.randint(0, 1))]
    return EqSystem(unknowns, params, eqs, ineqs)


@pytest.mark.parametrize("group_fn,seed", [(s3_group, 1), (z6_group, 2)])
def test_triangulation_equisatisfiable(group_fn, seed):
    group = group_fn()
    rng = random.Random(seed)
    outcomes = set()
    for _ in range(50):
        sys = random_system(rng, group)
        tri = triangulate(sys, group[2], group[3])
        assert tri.is_triangular()
        before = brute(sys, group)
        assert before == brute(tri, group)
        outcomes.add(before)
    assert outcomes == {True, False}


# -- central triples and representatives ---------------------------------------------------

def test_central_triples_zero_bound():
    pres = free2()
    tri = enumerate_central_triples(pres, 0, nf=free_reduce)
    assert [tuple(len(c) for c in t) for t in tri] == [(0, 0, 0)]


def test_central_triples_free_group_brute_force():
    pres = free2()
    got = {tuple(pres.fp.render(c) for c in t)
           for t in enumerate_central_triples(pres, 1, nf=free_reduce)}
    words = ["", "a", "A", "b", "B"]
    want = {tuple(w or "1" for w in t) for t in itertools.product(words, repeat=3)
            if bf.free_reduce_str("".join(t)) == ""}
    assert got == want and len(got) == 13
    # the wp route gives the same set
    wp = group_wp(pres, "builtin:free")
    assert len(enumerate_central_triples(pres, 1, wp=wp)) == 13


def test_central_triples_relative_z2():
    pres = parse_presentation(Z2_REL_Z2)
    model = ConedGraph(pres, "builtin:free-abelian", cone_radius=3)
    sec = SectorTable(model, formulas={1: lambda v, r: abs(v[0]) + abs(v[1]) <= r})
    tri = enumerate_central_triples(pres, 1, "relative", sec, kappa=1,
                                    nf=lambda w: model.canon(pres.to_X_word(w)))
    pieces = [("1", (0, 0)), ("a", (1, 0)), ("A", (-1, 0)), ("b", (0, 1)), ("B", (0, -1)),
              ("P[1,0]", (1, 0)), ("P[-1,0]", (-1, 0)), ("P[0,1]", (0, 1)), ("P[0,-1]", (0, -1))]
    want = {(p[0], q[0], r[0]) for p, q, r in itertools.product(pieces, repeat=3)
            if all(p[1][i] + q[1][i] + r[1][i] == 0 for i in (0, 1))}
    got = {tuple(pres.fp.render(c) for c in t) for t in tri}
    assert got == want


def test_param_reps():
    pres = free2()
    model = ConedGraph(pres, "builtin:free")
    assert any(r.is_identity() for r in enumerate_param_reps((), 1, 0, model))
    p = pres.parse_word("abA")
    reps = enumerate_param_reps(p, 1, 0, model)
    assert [pres.fp.render(r) for r in reps] == ["a b A"]
    small = set(enumerate_param_reps(pres.parse_word("ab"), 1, 0, model))
    assert small <= set(enumerate_param_reps(pres.parse_word("ab"), 2, 1, model))


def test_param_reps_needs_big_enough_fragment():
    pres = free2()
    model = ConedGraph(pres, "builtin:free")
    with pytest.raises(InsufficientExploration):
        enumerate_param_reps(pres.parse_word("abab"), 1, 0, model, frag=explore(model, 2))


def test_param_reps_relative_include_parabolic_letter():
    pres = parse_presentation(Z2_REL_Z2)
    model = ConedGraph(pres, "builtin:free-abelian", cone_radius=3)
    reps = [pres.fp.render(r) for r in enumerate_param_reps(pres.parse_word("aaa"), 1, 0, model)]
    assert "P[3,0]" in reps and "aaa" not in reps


# -- lifted family ------------------------------------------------------------------------

def test_lifted_family_counting():
    pres = free2()
    tri = enumerate_central_triples(pres, 1, nf=free_reduce)
    sys = EqSystem(["x", "y", "z"], {}, [(("x", 1), ("y", 1), ("z", 1))])
    assert len(build_lifted_family(sys, tri, {}, "hyperbolic", pres.fp)) == len(tri)
    assert len(build_lifted_family(sys, tri, {}, "relative", pres.fp)) == len(tri) + 1
    member, tag = next(iter(build_lifted_family(sys, tri, {}, "relative", pres.fp)))
    assert len(member.equations) == 6 + 3
    empty = list(build_lifted_family(EqSystem([]), tri, {}, "relative", pres.fp))
    assert len(empty) == 1 and empty[0][0].equations == []


def test_lifted_family_singular_member_shape():
    pres = free2()
    sys = EqSystem(["x", "y", "z"], {}, [(("x", 1), ("y", 1), ("z", 1))])
    fam = list(build_lifted_family(sys, [], {}, "relative", pres.fp))
    assert len(fam) == 1 and fam[0][1].choices == ("singular",)
    assert (("c1.1", 1), ("c1.2", 1), ("c1.3", 1)) in fam[0][0].equations


def test_lifted_solutions_project_to_solutions():
    pres = free2()
    wp = group_wp(pres, "builtin:free")
    sys = triangulate(parse_system("unknowns: x, y\neq: x y ab\n", pres), inverter(pres))
    tri = enumerate_central_triples(pres, 1, nf=free_reduce)
    fam = build_lifted_family(sys, tri, {}, "hyperbolic", pres.fp)
    solved = 0
    for member, tag in itertools.islice(iter(fam), 40):
        res = bounded_solve(member, pres.fp, Budget(1, 2, 20000))
        if res.status == "Sat":
            solved += 1
            proj = {x: pres.fp.long_normal_form(res.witness[f"~{x}"]) for x in sys.unknowns}
            assert verify_in_group(pres, sys, proj, wp)
    assert solved >= 1


# -- bounded search --------------------------------------------------------------------------

def test_bounded_solve_commuting_element():
    pres = free2()
    sys = parse_system("unknowns: x\neq: x a X A\nineq: x\n", pres)
    res = bounded_solve(sys, pres.fp, 2)
    assert res.status == "Sat"
    assert pres.fp.render(res.witness["x"]) == "a"


def test_bounded_solve_no_square_root():
    pres = parse_presentation("[group]\ngenerators = a\n")
    sys = parse_system("unknowns: x\neq: x x A\n", pres)
    for n in (1, 2, 3, 4):
        assert bounded_solve(sys, pres.fp, n).status == "Unknown"


def test_bounded_solve_empty_system():
    res = bounded_solve(EqSystem([]), free2().fp, 1)
    assert res.status == "Sat" and res.witness == {}


def test_bounded_solve_node_budget():
    pres = free2()
    sys = parse_system("unknowns: x, y\neq: x x y y y A\n", pres)
    res = bounded_solve(sys, pres.fp, Budget(1, 3, 50))
    assert res.status == "Unknown" and "node budget" in res.note


def test_bounded_solve_with_abelian_factor():
    pres = parse_presentation(Z2_REL_Z2)
    sys = EqSystem(["x"], {"p": pres.fp.parse("P[2,4]")}, [(("x", 1), ("x", 1), ("p", -1))])
    res = bounded_solve(sys, pres.fp, 2)
    assert res.status == "Sat" and pres.fp.render(res.witness["x"]) == "P[1,2]"


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(["x", "X", "y", "Y", "a", "A", "b", "B"]), min_size=1, max_size=5),
       st.booleans())
def test_bounded_solve_witnesses_verify(tokens, with_ineq):
    pres = free2()
    text = "unknowns: x, y\neq: " + " ".join(tokens) + "\n" + ("ineq: x\n" if with_ineq else "")
    sys = parse_system(text, pres)
    res = bounded_solve(sys, pres.fp, Budget(1, 2, 5000))
    if res.status == "Sat":
        # independent check on strings
        env = {k: "".join(str(x) for x in pres.fp.long_normal_form(v)) for k, v in res.witness.items()}
        env.update({k.upper(): bf.invert_string(v) for k, v in list(env.items())})
        word = "".join(env.get(t, t) for t in tokens)
        assert bf.free_reduce_str(word) == ""
        if with_ineq:
            assert env["x"] != ""


# -- the existential pipeline -----------------------------------------------------------------

def free_lifting():
    pres = free2()
    model = ConedGraph(pres, "builtin:free")
    sec = SectorTable(model)
    consts = toy_constants(theta=1, L=3, L1=1, L2=0, L2p=2)
    L = build_L_automaton(model, consts, sec)
    L0 = compute_L0(model, consts, sec)
    lifting = LiftingData("hyperbolic", enumerate_central_triples(pres, 1, nf=free_reduce), {},
                          L, subtract_finite(L, L0, pres.fp), [consts.caveat()])
    return pres, lifting


def test_existential_commuting_nontrivial():
    pres, lifting = free_lifting()
    wp = group_wp(pres, "builtin:free")
    sys = triangulate(parse_system("unknowns: x\neq: x a X A\nineq: x\n", pres), inverter(pres))
    res = decide_existential(sys, pres, wp, lifting, 2)
    assert res.status == "Sat"
    assert res.witness["x"] and verify_in_group(pres, sys, res.witness, wp)
    assert res.caveats and "toy" in res.caveats[0]


def test_existential_contradiction_is_unknown():
    pres, lifting = free_lifting()
    wp = group_wp(pres, "builtin:free")
    sys = triangulate(parse_system("unknowns: x\neq: x\nineq: x\n", pres), inverter(pres))
    res = decide_existential(sys, pres, wp, lifting, 1, max_members=20)
    assert res.status == "Unknown" and "cannot certify" in res.note


def test_existential_trivial_system():
    pres, lifting = free_lifting()
    wp = group_wp(pres, "builtin:free")
    res = decide_existential(EqSystem(["x"]), pres, wp, lifting, 1)
    assert res.status == "Sat" and res.witness == {"x": ()}


def test_existential_relative_mode():
    pres = parse_presentation(Z2_REL_Z2)
    model = ConedGraph(pres, "builtin:free-abelian", cone_radius=3)
    sec = SectorTable(model, formulas={1: lambda v, r: abs(v[0]) + abs(v[1]) <= r})
    wp = group_wp(pres, "builtin:free-abelian")
    sys = triangulate(parse_system("unknowns: x\neq: x x aaBB\nineq: x\n", pres), inverter(pres))
    reps = {p: enumerate_param_reps(v, 1, 0, model) for p, v in sys.params.items()}
    # the geodesic representative of a²b⁻² is a single parabolic letter
    assert [pres.fp.render(r) for r in reps["aaBB"]] == ["P[2,-2]"]
    lifting = LiftingData("relative", enumerate_central_triples(
        pres, 1, "relative", sec, 1, nf=lambda w: model.canon(pres.to_X_word(w))), reps,
        lambda a: True, lambda a: not a.is_identity())
    res = decide_existential(sys, pres, wp, lifting, Budget(1, 1, 20000), max_members=50)
    assert res.status == "Sat"
    assert pres.fp.render(pres.fp.from_letters(res.witness["x"])) == "P[-1,1]"
    assert verify_in_group(pres, sys, res.witness, wp)


def test_existential_requires_triangular():
    pres, lifting = free_lifting()
    sys = parse_system("unknowns: x\neq: x a X A\n", pres)
    with pytest.raises(MalformedInput):
        decide_existential(sys, pres, group_wp(pres, "builtin:free"), lifting)


# -- virtually abelian ---------------------------------------------------------------------------

def va_setup(kind):
    text = {"Z2": (Z2, VA_Z2), "Z3": (Z3, VA_Z3), "Dinf": (DINF, VA_DINF)}[kind]
    pres = parse_presentation(text[0])
    return pres, parse_va_spec(text[1], pres)


def box_sat(kind, pres, sys, r=10):
    """Second route: concrete models of ℤ², ℤ³ and D∞, search over the box of radius r."""
    if kind == "Dinf":
        elements = [(s, k) for s in (1, -1) for k in range(-r, r + 1)]
        mul, inv, one, ev = bf.dinf_mul, bf.dinf_inv, (1, 0), bf.dinf_word
    else:
        n = 2 if kind == "Z2" else 3
        elements = list(itertools.product(range(-r, r + 1), repeat=n))
        mul = lambda u, v: tuple(x + y for x, y in zip(u, v))
        inv = lambda u: tuple(-x for x in u)
        one = (0,) * n
        ev = lambda w: bf.zn_word(w, n)
    params = {k: ev(v) for k, v in sys.params.items()}
    return bf.brute_system_sat(sys.unknowns, params, sys.equations, sys.inequations,
                               elements, mul, inv, one)


BATTERY = [
    ("Z2", "unknowns: x\neq: x x AAAAAA", True),
    ("Z2", "unknowns: x\neq: x x AAA", False),
    ("Z2", "unknowns: x\neq: x x x AAA BBBBBB", True),
    ("Z2", "unknowns: x\neq: x x BA", False),
    ("Z2", "unknowns: x\neq: x A\nineq: x A", False),
    ("Z2", "unknowns: x, y\neq: x y A\nineq: x\nineq: y", True),
    ("Z2", "unknowns: x\neq: x a X A\nineq: x", True),
    ("Z2", "unknowns: x\neq: x x\nineq: x", False),
    ("Z2", "unknowns: x, y\neq: x x Y\neq: y BB", True),
    ("Z2", "unknowns: x\neq: x x x x AAAA BB", False),
    ("Z3", "unknowns: x\neq: x x AA BBBB CCCCCC", True),
    ("Z3", "unknowns: x\neq: x x A BB CC", False),
    ("Z3", "unknowns: x\neq: x x x CCC\nineq: x C", False),
    ("Z3", "unknowns: x\neq: x b C\nineq: x", True),
    ("Z3", "unknowns: x\neq: x x CC\nineq: x a", True),
    ("Dinf", "unknowns: x\neq: x a X a", True),
    ("Dinf", "unknowns: x\neq: x x AA", True),
    ("Dinf", "unknowns: x\neq: x x A", False),
    ("Dinf", "unknowns: x\neq: x x\nineq: x", True),
    ("Dinf", "unknowns: x\neq: x t X A", False),
    ("Dinf", "unknowns: x\neq: x a X A\nineq: x\nineq: x a", True),
    ("Dinf", "unknowns: x, y\neq: x y T\neq: x x\neq: y y\nineq: x\nineq: y", False),
]


@pytest.mark.parametrize("kind,text,expected", BATTERY)
def test_va_battery_matches_box_search(kind, text, expected):
    pres, va = va_setup(kind)
    sys = parse_system(text, pres)
    res = va_decide(sys, va)
    assert (res.status == "Sat") == expected == box_sat(kind, pres, sys)
    if res.status == "Sat":
        assert verify_va(va, sys, res.witness)


def test_va_battery_size():
    assert len(BATTERY) >= 20
    assert {k for k, _, _ in BATTERY} == {"Z2", "Z3", "Dinf"}


def test_va_square_root_witness():
    pres, va = va_setup("Z2")
    res = va_decide(parse_system("unknowns: x\neq: x x AAAAAA", pres), va)
    assert free_reduce(res.witness["x"]) == pres.parse_word("aaa")


def test_va_dihedral_witness_is_reflection():
    pres, va = va_setup("Dinf")
    res = va_decide(parse_system("unknowns: x\neq: x a X a", pres), va)
    assert va.eval_word(res.witness["x"])[1] == 1


def test_va_triangulated_system_gives_same_answer():
    for kind, text, expected in BATTERY:
        pres, va = va_setup(kind)
        sys = triangulate(parse_system(text, pres), inverter(pres))
        assert (va_decide(sys, va).status == "Sat") == expected


def test_va_rejects_bad_rho():
    pres = parse_presentation(DINF)
    bad = VA_DINF.replace("rho 1: -1", "rho 1: 2")
    with pytest.raises(MalformedInput):
        parse_va_spec(bad, pres)
    with pytest.raises(MalformedInput):
        parse_va_spec(VA_DINF.replace("section 1: t", "section 1: a"), pres)


# -- Smith normal form ----------------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_smith_normal_form_matches_sympy(rows, cols, data):
    m = [[data.draw(st.integers(-6, 6)) for _ in range(cols)] for _ in range(rows)]
    u, d, v = smith_normal_form(m)
    assert matmul(matmul(u, m), v) == d
    diag = [d[i][i] for i in range(min(rows, cols))]
    assert all(d[i][j] == 0 for i in range(rows) for j in range(cols) if i != j)
    for a, b in zip(diag, diag[1:]):
        assert (b == 0) or (a != 0 and b % a == 0)
    ref = sympy_snf(sympy.Matrix(m), domain=sympy.ZZ)
    ref_diag = sorted(abs(int(ref[i, i])) for i in range(min(rows, cols)))
    assert sorted(diag) == ref_diag
    assert abs(sympy.Matrix(u).det()) == 1 and abs(sympy.Matrix(v).det()) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_solve_integer_against_box(rows, cols, data):
    a = [[data.draw(st.integers(-3, 3)) for _ in range(cols)] for _ in range(rows)]
    b = [data.draw(st.integers(-4, 4)) for _ in range(rows)]
    sol = solve_integer(a, b)
    box = [x for x in itertools.product(range(-6, 7), repeat=cols)
           if all(sum(r[j] * x[j] for j in range(cols)) == bi for r, bi in zip(a, b))]
    if sol is None:
        assert not box
    else:
        x0, kernel = sol
        assert all(sum(r[j] * x0[j] for j in range(cols)) == bi for r, bi in zip(a, b))
        for k in kernel:
            assert all(sum(r[j] * k[j] for j in range(cols)) == 0 for r in a)
