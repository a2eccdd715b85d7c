import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhkit.coned import ConedGraph
from rhkit.geolang import (BudgetExceeded, GnrAutomaton, GnrLabel, SectorTable, build_L_automaton,
                           compute_L0, derive_constants, element_word, enumerate_long_forms,
                           epsilon_prime, find_detours, gnr_accepts, gnr_to_word_automaton,
                           in_L_by_definition, is_local_quasigeodesic, membership_L,
                           parse_automaton, subtract_finite, toy_constants)
from rhkit.presentation import parse_presentation
from rhkit.words import GenSymbol, MalformedInput, ParLetter, parse_word

import bruteforce as bf

FREE2 = "[group]\ngenerators = a, b\n"

F2_REL_A = """
[group]
generators = a, b
[parabolic.A]
kind = free-abelian
rank = 1
gens = x
embed x = a
"""

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


def setup_free():
    pres = parse_presentation(FREE2)
    model = ConedGraph(pres, "builtin:free")
    return pres, model, SectorTable(model)


def setup_rel_a(cone_radius=3):
    pres = parse_presentation(F2_REL_A)
    model = ConedGraph(pres, "builtin:free", cone_radius=cone_radius)
    # angle at the cone vertex between 1 and a^n is |n| (tree: only the a-line reconnects)
    return pres, model, SectorTable(model, formulas={1: lambda v, r: abs(v[0]) <= r})


def setup_z2():
    pres = parse_presentation(Z2_REL_Z2)
    model = ConedGraph(pres, "builtin:free-abelian", cone_radius=3)
    # the graph minus the single cone vertex is Cay(ℤ²)
    return pres, model, SectorTable(model, formulas={1: lambda v, r: abs(v[0]) + abs(v[1]) <= r})


# -- constants ---------------------------------------------------------------------

def test_constants_from_formulas():
    c = derive_constants(1, 5, 1)
    assert c.L1 == 50000 and c.L2 == 5 * 10 ** 6
    assert c.theta == 610000
    assert c.A == 2 * (c.L + c.theta) ** 2
    assert c.L > c.L2p and not c.toy


def test_constants_override_and_check():
    c = derive_constants(1, 1, 1, L=10 ** 9, L2p=10 ** 8, L1p=3)
    assert (c.L, c.L1p, c.L2p) == (10 ** 9, 3, 10 ** 8)
    with pytest.raises(MalformedInput):
        derive_constants(1, 1, 1, L=5, L2p=10)
    with pytest.raises(MalformedInput):
        derive_constants(0, 1, 1)


def test_epsilon_prime_collapses():
    assert epsilon_prime(0, 0, 0, 0, delta=1) == 50
    assert derive_constants(2, 1, 1).epsilon_prime(0, 0, 0, 0) == 100


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20), st.integers(0, 20),
       st.sampled_from(["eps", "lam", "mu", "chi"]))
def test_epsilon_prime_monotone(eps, lam, mu, chi, which):
    args = dict(eps=eps, lam=lam, mu=mu, chi=chi)
    bumped = dict(args)
    bumped[which] += 1
    assert epsilon_prime(delta=1, **bumped) >= epsilon_prime(delta=1, **args)


# -- detours ---------------------------------------------------------------------

def brute_detours(pres, model, sectors, a, theta):
    """Definition-level route: two large flanks of factor k whose cone vertices on 𝔭 coincide."""
    letters = pres.fp.long_normal_form(a)
    path = model.path_of(letters)
    # cone vertex of the i-th syllable if parabolic
    cones = []
    pos = 0
    syl_cone = []
    for s in a.syllables:
        if s.factor == 0:
            pos += len(s.value)
            syl_cone.append(None)
        else:
            syl_cone.append(path[pos + 1])
            pos += 2
    del cones
    out = set()
    for i, si in enumerate(a.syllables):
        for j in range(i + 2, len(a.syllables)):
            sj = a.syllables[j]
            if si.factor == sj.factor != 0 and syl_cone[i] == syl_cone[j] \
                    and not sectors.contains(si.factor, si.value, theta) \
                    and not sectors.contains(sj.factor, sj.value, theta):
                out.add((i + 1, j - 1, si.factor))
    return out


def test_no_detour_without_two_large_letters():
    pres, model, sec = setup_rel_a()
    a = pres.fp.parse("A[5] b a B")
    assert find_detours(a, 2, model, sec) == []


def test_constructed_detour():
    pres, model, sec = setup_rel_a()
    a = pres.fp.parse("A[5] a A[5]")
    ds = find_detours(a, 2, model, sec, mu=3)
    assert len(ds) == 1
    d = ds[0]
    assert (d.start, d.end, d.factor, d.length, d.small) == (1, 1, 1, 1, True)
    assert brute_detours(pres, model, sec, a, 2) == {(1, 1, 1)}
    # small letters on the flanks are not a detour
    assert find_detours(pres.fp.parse("A[2] a A[5]"), 2, model, sec) == []


def test_detours_match_definition_on_random_elements():
    pres, model, sec = setup_rel_a()
    rng = random.Random(12)
    for _ in range(300):
        letters = []
        for _ in range(rng.randint(0, 6)):
            if rng.random() < 0.4:
                letters.append(ParLetter(1, (rng.choice([-5, -3, -1, 1, 3, 5]),)))
            else:
                letters.append(GenSymbol(rng.choice("ab"), rng.choice([1, -1])))
        a = pres.fp.from_letters(letters)
        got = {(d.start, d.end, d.factor) for d in find_detours(a, 2, model, sec)}
        assert got == brute_detours(pres, model, sec, a, 2)


def test_long_detour_contains_small_one():
    # replay: every θ-detour of 𝔭-length <= μ contains (or is) a μ-small one
    pres, model, sec = setup_rel_a()
    theta, mu = 1, 4
    vals = {1: [(n,) for n in (-12, -3, -2, 2, 3, 12)]}
    checked = 0
    for w in enumerate_long_forms(pres, vals, 7):
        a = pres.fp.from_letters(w)
        ds = find_detours(a, theta, model, sec, mu=mu)
        for d in ds:
            if d.length <= mu:
                checked += 1
                assert any(s.small and s.start >= d.start and s.end <= d.end for s in ds)
    assert checked > 0


# -- quasi-geodesics ---------------------------------------------------------------

def test_quasigeodesic_examples():
    pres, model, _ = setup_free()
    geo = model.path_of(parse_word("abab"))
    assert is_local_quasigeodesic(geo, 10, 1, 0, model)
    back = model.path_of(parse_word("aA"))
    assert not is_local_quasigeodesic(back, 10, 1, 0, model)


def test_tree_paths_quasigeodesic_iff_reduced():
    pres, model, _ = setup_free()
    rng = random.Random(1)
    for _ in range(200):
        s = "".join(rng.choice("aAbB") for _ in range(rng.randint(0, 7)))
        path = model.path_of(parse_word(s))
        assert is_local_quasigeodesic(path, 10, 1, 0, model) == (bf.free_reduce_str(s) == s)


def test_membership_examples():
    pres, model, sec = setup_rel_a()
    c = toy_constants(theta=2, L=4, L1=2, L2=2, L2p=3)
    assert membership_L(pres.fp.parse("1"), c, model, sec)
    assert not membership_L(pres.fp.parse("A[5] a A[5]"), c, model, sec)
    assert membership_L(pres.fp.parse("A[5] b A[5]"), c, model, sec)


def test_membership_free_group_is_quasigeodesic_test():
    pres, model, sec = setup_free()
    c = toy_constants(theta=1, L=3, L1=1, L2=0, L2p=2)
    for w in enumerate_long_forms(pres, {}, 4):
        a = pres.fp.from_letters(w)
        path = model.path_of(pres.fp.long_normal_form(a))
        assert membership_L(a, c, model, sec) == is_local_quasigeodesic(path, 3, 1, 0, model)
        assert membership_L(a, c, model, sec) == in_L_by_definition(a, c, model, sec)


# -- the automaton for 𝓛 ---------------------------------------------------------------

def agree(pres, model, consts, sectors, aut, vals, max_path):
    n = 0
    for w in enumerate_long_forms(pres, vals, max_path):
        a = pres.fp.from_letters(w)
        assert gnr_accepts(aut, a, pres.fp) == membership_L(a, consts, model, sectors), \
            pres.fp.render(a)
        n += 1
    return n


def test_automaton_free_group_toy():
    pres, model, sec = setup_free()
    c = toy_constants(theta=1, L=3, L1=1, L2=0, L2p=2)
    aut = build_L_automaton(model, c, sec)
    assert agree(pres, model, c, sec, aut, {}, 6) == 1457
    assert any("toy" in line for line in aut.caveats)


def test_automaton_relative_cyclic():
    pres, model, sec = setup_rel_a()
    c = toy_constants(theta=1, L=3, L1=1, L2=1, L2p=1, A=4)
    aut = build_L_automaton(model, c, sec)
    agree(pres, model, c, sec, aut, {1: [(n,) for n in range(-6, 7) if n]}, 5)


def test_automaton_z2_rel_z2():
    pres, model, sec = setup_z2()
    c = toy_constants(theta=1, L=2, L1=1, L2=1, L2p=1, A=3)
    aut = build_L_automaton(model, c, sec)
    agree(pres, model, c, sec, aut, {1: pres.factor(1).ball(4)}, 4)


def test_automaton_rejects_small_detour_family():
    pres, model, sec = setup_rel_a()
    c = toy_constants(theta=1, L=3, L1=1, L2=1, L2p=1, A=4)
    aut = build_L_automaton(model, c, sec)
    for n in (2, 3, 7, -9):
        for m in (2, 5, -4):
            a = pres.fp.parse(f"A[{n}] a A[{m}]")
            ds = find_detours(a, c.theta, model, sec, mu=c.L2p)
            assert any(d.small and d.length <= c.L2p for d in ds)
            assert not gnr_accepts(aut, a, pres.fp)


def test_automaton_budget_refuses():
    pres, model, sec = setup_free()
    c = toy_constants(theta=1, L=3, L1=1, L2=0, L2p=2)
    with pytest.raises(BudgetExceeded):
        build_L_automaton(model, c, sec, max_states=5)


def test_automaton_serialization_round_trip():
    pres, model, sec = setup_rel_a()
    c = toy_constants(theta=1, L=3, L1=1, L2=1, L2p=1, A=4)
    aut = build_L_automaton(model, c, sec)
    text = aut.serialize(pres)
    again = parse_automaton(text, pres)
    assert again.serialize(pres) == text


def test_gnr_accepts_matches_text_simulator():
    pres, model, sec = setup_rel_a()
    c = toy_constants(theta=1, L=3, L1=1, L2=1, L2p=1, A=4)
    aut = build_L_automaton(model, c, sec)
    text = aut.serialize(pres)
    rng = random.Random(21)
    for _ in range(1000):
        letters = []
        for _ in range(rng.randint(0, 5)):
            if rng.random() < 0.35:
                letters.append(ParLetter(1, (rng.choice([-9, -4, -1, 1, 2, 6]),)))
            else:
                letters.append(GenSymbol(rng.choice("ab"), rng.choice([1, -1])))
        a = pres.fp.from_letters(letters)
        tokens = [pres.fp.render_letter(x) for x in pres.fp.long_normal_form(a)]
        assert gnr_accepts(aut, a, pres.fp) == bf.simulate_serialized_automaton(text, tokens, {1: "A"})


def test_gnr_small_examples():
    pres, _, _ = setup_rel_a()
    fp = pres.fp
    empty_ok = GnrAutomaton(1, 0, {0}, [])
    assert gnr_accepts(empty_ok, fp.parse("1"), fp)
    assert not gnr_accepts(GnrAutomaton(1, 0, set(), []), fp.parse("1"), fp)
    cof = GnrAutomaton(2, 0, {1}, [(0, 1, GnrLabel(1, "NOTIN", ((2,), (-2,))))])
    assert gnr_accepts(cof, fp.parse("A[7]"), fp)
    assert not gnr_accepts(cof, fp.parse("A[2]"), fp)
    assert not gnr_accepts(cof, fp.parse("a"), fp)


# -- word automata ------------------------------------------------------------------

def test_word_automaton_empty_language():
    pres, _, _ = setup_rel_a()
    assert gnr_to_word_automaton(GnrAutomaton(1, 0, set(), []), pres).is_empty()


def test_word_automaton_finite_label():
    pres, _, _ = setup_rel_a()
    aut = GnrAutomaton(2, 0, {1}, [(0, 1, GnrLabel(1, "IN", ((1,), (2,))))])
    wa = gnr_to_word_automaton(aut, pres)
    x = GenSymbol("x")
    assert wa.accepts((x,)) and wa.accepts((x, x))
    assert not wa.accepts(()) and not wa.accepts((x, x, x)) and not wa.accepts((x.inverse(),))


def test_word_automaton_agrees_with_gnr():
    pres, model, sec = setup_z2()
    c = toy_constants(theta=1, L=2, L1=1, L2=1, L2p=1, A=3)
    aut = build_L_automaton(model, c, sec)
    wa = gnr_to_word_automaton(aut, pres)
    for w in enumerate_long_forms(pres, {1: pres.factor(1).ball(3)}, 4):
        a = pres.fp.from_letters(w)
        assert wa.accepts(element_word(pres, a)) == gnr_accepts(aut, a, pres.fp)
    # non-normal-form words are rejected
    y, x = GenSymbol("y"), GenSymbol("x")
    assert not wa.accepts((y, x))


# -- 𝓛₀ --------------------------------------------------------------------------------

def test_l0_free_group_is_identity_only():
    pres, model, sec = setup_free()
    c = toy_constants(theta=1, L=3, L1=1, L2=0, L2p=6)
    l0 = compute_L0(model, c, sec, max_path=6)
    assert l0 == [pres.fp.parse("1")]


def test_l0_z2_rel_z2_loops_are_trivial():
    pres, model, sec = setup_z2()
    c = toy_constants(theta=1, L=2, L1=1, L2=1, L2p=4, A=3)
    l0 = compute_L0(model, c, sec, letter_radius=2, max_path=4)
    assert pres.fp.parse("1") in l0
    assert len(l0) > 1
    for a in l0:
        vx = vy = 0
        for s in a.syllables:
            if s.factor == 0:
                for g in s.value:
                    vx += g.sign if g.name == "a" else 0
                    vy += g.sign if g.name == "b" else 0
            else:
                vx += s.value[0]
                vy += s.value[1]
        assert (vx, vy) == (0, 0)
        assert membership_L(a, c, model, sec)
    # a loop through the cone vertex
    assert pres.fp.parse("a P[-1,0]") in l0


def test_l_minus_l0_automaton():
    pres, model, sec = setup_z2()
    c = toy_constants(theta=1, L=2, L1=1, L2=1, L2p=1, A=3)
    aut = build_L_automaton(model, c, sec)
    l0 = compute_L0(model, c, sec, letter_radius=2, max_path=3)
    assert len(l0) > 1
    diff = subtract_finite(aut, l0, pres.fp)
    l0set = set(l0)
    for w in enumerate_long_forms(pres, {1: pres.factor(1).ball(3)}, 4):
        a = pres.fp.from_letters(w)
        expected = membership_L(a, c, model, sec) and a not in l0set
        assert gnr_accepts(diff, a, pres.fp) == expected


def test_loop_lemma_on_instances():
    # paths without θ-detour that revisit a cone vertex: Ang(e1,f1) <= a + T(T+θ)
    pres, model, sec = setup_rel_a(cone_radius=3)
    theta = 1
    vals = {1: [(n,) for n in (-3, 1, 2)]}
    seen = 0
    for w in enumerate_long_forms(pres, vals, 6):
        a = pres.fp.from_letters(w)
        if find_detours(a, theta, model, sec):
            continue
        path = model.path_of(pres.fp.long_normal_form(a))
        T = len(path) - 1
        for v in set(path[1:-1]):
            idx = [i for i in range(1, T) if path[i] == v]
            if len(idx) < 2:
                continue
            e1 = path[idx[0] - 1]
            f1, fk = path[idx[0] + 1], path[idx[-1] + 1]
            bound = model.angle(v, e1, fk, 3)
            if bound == float("inf"):
                continue
            seen += 1
            # at a cone vertex of ⟨a⟩ the angle between a^i and a^j is |i-j|
            got = model.angle(v, e1, f1, 4)
            assert got <= bound + T * (T + theta) or got == float("inf") and 4 < bound + T * (T + theta)
    assert seen > 0
