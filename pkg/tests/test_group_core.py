import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhkit.factors import AbelianFactor, FiniteFactor, Unsupported
from rhkit.freeprod import FactorElement, FPElement, FreeProduct, fp_inverse, fp_multiply, fp_normalize, long_normal_form
from rhkit.oracles import builtin_oracles, family_oracles
from rhkit.presentation import ParabolicSpec, parse_presentation, presentation_text
from rhkit.words import GenSymbol, MalformedInput, ParLetter, free_reduce, parse_word, word_str

import bruteforce as bf


def fz2():
    return FreeProduct(["a", "b"], [AbelianFactor("P", 2, (), ("x", "y"))])


def f(w):
    return FactorElement(0, parse_word(w))


def p(*c):
    return FactorElement(1, tuple(c))


def as_string(fp, e):
    out = []
    for s in e.syllables:
        out.append(bf.fz2_string([("f", word_str(s.value))] if s.factor == 0 else [("p", s.value)]))
    return "".join(out)


def random_element(rng, fp, max_syl=5):
    raw = []
    for _ in range(rng.randint(0, max_syl)):
        if rng.random() < 0.5:
            raw.append(f("".join(rng.choice("aAbB") for _ in range(rng.randint(1, 3)))))
        else:
            raw.append(p(rng.randint(-3, 3), rng.randint(-3, 3)))
    return fp.normalize(raw)


def test_gensymbol_inverse_involution():
    g = GenSymbol("a", 1)
    assert g.inverse().inverse() == g
    assert str(g.inverse()) == "A"
    with pytest.raises(MalformedInput):
        GenSymbol("", 1)


def test_free_reduction_idempotent():
    w = parse_word("abBAaab")
    assert free_reduce(w) == parse_word("aab")
    assert free_reduce(free_reduce(w)) == free_reduce(w)


def test_normalize_cancels_inverse_parabolics():
    fp = fz2()
    assert fp_normalize([p(1, 0), p(-1, 0)], fp) == FPElement(())


def test_normalize_merges_adjacent_parabolics():
    fp = fz2()
    e = fp_normalize([f("a"), p(1, 0), p(0, 1), f("b")], fp)
    assert e.syllables == (f("a"), p(1, 1), f("b"))
    # second route: rewriting oracle
    assert as_string(fp, e) == bf.rewrite("a" + "x" + "y" + "b")


def test_normalize_idempotent_on_normal_input():
    fp = fz2()
    e = fp.normalize([f("ab"), p(2, -1), f("B")])
    assert fp.normalize(e.syllables) == e


def test_normalize_unknown_factor():
    with pytest.raises(MalformedInput):
        fz2().normalize([FactorElement(5, (1,))])


def test_multiply_examples():
    fp = fz2()
    a = fp.normalize([f("a")])
    assert fp_multiply(a, fp.normalize([f("A")]), fp) == FPElement(())
    left = fp.normalize([f("a"), p(2, 0)])
    right = fp.normalize([p(-2, 0), f("a")])
    prod = fp_multiply(left, right, fp)
    assert prod.syllables == (f("aa"),)
    assert as_string(fp, prod) == bf.rewrite("axx" + "XXa")


def test_long_normal_form_examples():
    fp = fz2()
    e = fp.normalize([f("ab"), p(1, 1)])
    assert long_normal_form(e, fp) == (GenSymbol("a"), GenSymbol("b"), ParLetter(1, (1, 1)))
    assert long_normal_form(FPElement(()), fp) == ()


def test_random_group_laws():
    fp = fz2()
    rng = random.Random(7)
    for _ in range(500):
        x, y, z = (random_element(rng, fp) for _ in range(3))
        assert fp.multiply(fp.multiply(x, y), z) == fp.multiply(x, fp.multiply(y, z))
        assert fp.multiply(x, fp_inverse(x, fp)) == FPElement(())
        assert fp.from_letters(fp.long_normal_form(x)) == x
        assert fp.is_valid(x)


def test_parse_render_round_trip():
    fp = fz2()
    rng = random.Random(3)
    for _ in range(200):
        x = random_element(rng, fp)
        assert fp.parse(fp.render(x)) == x


@settings(max_examples=150, deadline=None)
@given(st.lists(st.one_of(
    st.builds(lambda w: ("f", w), st.text("aAbB", min_size=1, max_size=3)),
    st.builds(lambda c1, c2: ("p", (c1, c2)), st.integers(-3, 3), st.integers(-3, 3))),
    max_size=6))
def test_normalize_matches_rewriting(raw):
    fp = fz2()
    syl = [f(v) if k == "f" else p(*v) for k, v in raw]
    e = fp.normalize(syl)
    assert as_string(fp, e) == bf.rewrite(bf.fz2_string(raw))
    assert fp.normalize(e.syllables) == e


def test_long_normal_form_injective_on_sample():
    fp = fz2()
    rng = random.Random(11)
    seen = {}
    for _ in range(500):
        x = random_element(rng, fp)
        key = fp.long_normal_form(x)
        assert seen.setdefault(key, x) == x


def test_quotient_to_s3_commutes():
    # F(a,b) * Z/2 -> S3 : a -> (01), b -> (012), parabolic z -> (01)
    fp = FreeProduct(["a", "b"], [AbelianFactor("Q", 0, (2,), ("z",))])
    images = {"a": (1, 0, 2), "b": (1, 2, 0)}
    z_img = (1, 0, 2)

    def phi(e):
        cur = bf.S3_ID
        for s in e.syllables:
            if s.factor == 0:
                cur = bf.compose(cur, bf.eval_perm_word(word_str(s.value), images))
            elif s.value[0] % 2:
                cur = bf.compose(cur, z_img)
        return cur

    rng = random.Random(5)
    for _ in range(1000):
        raw_x = [f(rng.choice("aAbB")) if rng.random() < .6 else FactorElement(1, (rng.randint(0, 1),))
                 for _ in range(rng.randint(0, 5))]
        raw_y = [f(rng.choice("aAbB")) if rng.random() < .6 else FactorElement(1, (rng.randint(0, 1),))
                 for _ in range(rng.randint(0, 5))]
        x, y = fp.normalize(raw_x), fp.normalize(raw_y)
        assert phi(fp.multiply(x, y)) == bf.compose(phi(x), phi(y))


def test_finite_factor_table():
    z3 = FiniteFactor("C", [[0, 1, 2], [1, 2, 0], [2, 0, 1]])
    assert z3.mul(1, 2) == 0 and z3.inv(1) == 2
    with pytest.raises(MalformedInput):
        FiniteFactor("C", [[0, 1], [0, 1]])


Z2_TEXT = """
# the free abelian group of rank two
[group]
generators = a, b
relators = abAB
"""


def test_parse_z2():
    pres = parse_presentation(Z2_TEXT)
    assert len(pres.symmetric_X()) == 4
    assert pres.relators == (parse_word("abAB"),)
    assert pres.derived_letters() == pres.symmetric_X()


def test_parse_free_group_empty_relators():
    pres = parse_presentation("[group]\ngenerators = a, b\n")
    assert pres.relators == ()


def test_parse_relative_with_parabolic_letters():
    text = """
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
    pres = parse_presentation(text)
    assert pres.relators[0] == (GenSymbol("a"), ParLetter(1, (-1, 0)))
    assert ParLetter(1, (1, 0)) in pres.derived_letters()
    assert pres.to_X_word([ParLetter(1, (1, -1))]) == parse_word("aB")
    again = parse_presentation(presentation_text(pres))
    assert again.relators == pres.relators


@pytest.mark.parametrize("text, fragment", [
    ("[group]\ngenerators = a\nrelators = Q[1]\n", "relator"),
    ("[group]\ngenerators = a, a\n", "duplicate"),
    ("[group]\ngenerators = a\nrelators = ab\n", "relator"),
    ("[group]\ngenerators = a\nthis is not a line\n", "line 3"),
    ("[group]\ngenerators = a\n[parabolic.P]\nkind = free-abelian\nrank = 1\ngens = a\n", "duplicate"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(MalformedInput) as exc:
        parse_presentation(text)
    assert fragment in str(exc.value)


def test_parse_triangulate_flag():
    pres = parse_presentation(Z2_TEXT, triangulate=True)
    assert all(len(r) <= 3 for r in pres.relators)
    assert len(pres.generators) == 3
    raw = parse_presentation(Z2_TEXT)
    assert raw.relators == (parse_word("abAB"),)


def test_builtin_oracles_examples():
    spec = ParabolicSpec(1, "P", "free-abelian", 2, gens=("a", "b"))
    wp, nf = builtin_oracles(spec)
    assert wp(parse_word("abAB"))
    wp, nf = builtin_oracles("builtin:free", ["a", "b"])
    assert nf(parse_word("aAb")) == parse_word("b")
    z3 = ParabolicSpec(1, "C", "abelian", 0, torsion=(3,), gens=("x",))
    wp, nf = builtin_oracles(z3)
    assert wp(parse_word("xxx")) and not wp(parse_word("xx"))


def test_oracle_contract_nf_wp():
    rng = random.Random(2)
    for family in ("builtin:free", "builtin:free-abelian", "builtin:cyclic:4"):
        wp, nf = family_oracles(family, ["a", "b"])
        assert wp(())
        for _ in range(100):
            w = parse_word("".join(rng.choice("aAbB") for _ in range(rng.randint(0, 8))))
            v = parse_word("".join(rng.choice("aAbB") for _ in range(rng.randint(0, 8))))
            n = nf(w)
            assert nf(n) == n
            assert wp(w + tuple(x.inverse() for x in reversed(n)))
            assert (nf(w) == nf(v)) == wp(w + tuple(x.inverse() for x in reversed(v)))


def test_oracle_backed_without_procedure():
    spec = ParabolicSpec(1, "O", "oracle", gens=("u",))
    with pytest.raises(Unsupported):
        builtin_oracles(spec)


def test_finite_parabolic_oracle():
    spec = ParabolicSpec(1, "C", "finite", gens=("c",), table=[[0, 1, 2], [1, 2, 0], [2, 0, 1]])
    wp, nf = builtin_oracles(spec)
    assert wp(parse_word("ccc")) and not wp(parse_word("cc"))
