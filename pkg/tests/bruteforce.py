"""Independent brute-force oracles used by the test-suite.

Nothing here imports the library's normal-form code; each helper works on
plain strings or integers so it can serve as a second route.
"""
from __future__ import annotations

import itertools

# F(a,b) * Z^2 with Z^2 generated by x, y: a complete rewriting system.
# Cancellation rules plus "y-letters move right of x-letters".
FZ2_RULES = [
    ("aA", ""), ("Aa", ""), ("bB", ""), ("Bb", ""),
    ("xX", ""), ("Xx", ""), ("yY", ""), ("Yy", ""),
    ("yx", "xy"), ("Yx", "xY"), ("yX", "Xy"), ("YX", "XY"),
]


def rewrite(s: str, rules=FZ2_RULES) -> str:
    changed = True
    while changed:
        changed = False
        for lhs, rhs in rules:
            if lhs in s:
                s = s.replace(lhs, rhs)
                changed = True
    return s


def vector_string(c1: int, c2: int) -> str:
    return ("x" * c1 if c1 > 0 else "X" * -c1) + ("y" * c2 if c2 > 0 else "Y" * -c2)


def fz2_string(syllables) -> str:
    """Expand (kind, value) syllables: ('f', 'aB') or ('p', (c1, c2))."""
    out = []
    for kind, v in syllables:
        out.append(v if kind == "f" else vector_string(*v))
    return "".join(out)


def invert_string(s: str) -> str:
    return s[::-1].swapcase()


# Small finite groups as permutation tuples (composition: apply left first).

def compose(p, q):
    """Apply p then q."""
    return tuple(q[i] for i in p)


def perm_inverse(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


S3 = [tuple(p) for p in itertools.permutations(range(3))]
S3_ID = (0, 1, 2)


def eval_perm_word(word: str, images: dict):
    cur = tuple(range(len(next(iter(images.values())))))
    for ch in word:
        p = images[ch.lower()]
        cur = compose(cur, p if ch.islower() else perm_inverse(p))
    return cur


def free_reduce_str(s: str) -> str:
    out = []
    for ch in s:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def simulate_serialized_automaton(text: str, tokens, factor_names: dict) -> bool:
    """Run a serialized gnr automaton on rendered letters (``a``, ``A``, ``P[1,0]``).

    Works purely on the text records, as a second route to the library's
    own acceptance check.
    """
    accepting, initial, trans = set(), None, []
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "Q" and parts[-1] == "accept":
            accepting.add(parts[1])
        elif parts[0] == "I":
            initial = parts[1]
        elif parts[0] == "T":
            vals = set(parts[5].split(",")) if len(parts) > 5 else set()
            trans.append((parts[1], parts[2], int(parts[3]), parts[4], vals))
    cur = {initial}
    for tok in tokens:
        name = tok.split("[")[0] if "[" in tok else None
        nxt = set()
        for s, t, k, kind, vals in trans:
            if s not in cur:
                continue
            if k == 0:
                ok = name is None and tok in vals
            else:
                ok = name == factor_names[k] and ((tok in vals) == (kind == "IN"))
            if ok:
                nxt.add(t)
        cur = nxt
    return bool(cur & accepting)


# Equation systems over a finite group given by explicit operations.

def brute_system_sat(unknowns, params, equations, inequations, elements, mul, inv, one):
    """Backtracking over all assignments; a word is checked once its unknowns are set."""
    order = {x: i for i, x in enumerate(unknowns)}

    def last(word):
        return max((order[n] for n, _ in word if n in order), default=-1)

    checks = [[] for _ in unknowns]
    pre = []
    for w in equations:
        (checks[last(w)] if last(w) >= 0 else pre).append((w, True))
    for w in inequations:
        (checks[last(w)] if last(w) >= 0 else pre).append((w, False))

    def value(word, env):
        acc = one
        for name, s in word:
            v = env[name]
            acc = mul(acc, v if s == 1 else inv(v))
        return acc

    def ok(items, env):
        return all((value(w, env) == one) == want for w, want in items)

    env = dict(params)
    if not ok(pre, env):
        return False

    def go(i):
        if i == len(unknowns):
            return True
        for g in elements:
            env[unknowns[i]] = g
            if ok(checks[i], env) and go(i + 1):
                return True
        del env[unknowns[i]]
        return False
    return go(0)


# Concrete models for virtually abelian box search.

def zn_word(word, n):
    """Vector of a word over the first n letters a, b, c, ... of ℤⁿ."""
    v = [0] * n
    for x in word:
        v["abcdefgh".index(x.name)] += x.sign
    return tuple(v)


def dinf_mul(p, q):
    """Affine maps x -> s·x + k composed as 'apply q then p' (left to right product)."""
    (s1, k1), (s2, k2) = p, q
    return (s1 * s2, k1 + s1 * k2)


def dinf_inv(p):
    s, k = p
    return (s, -s * k)


def dinf_word(word):
    acc = (1, 0)
    for x in word:
        g = (1, 1) if x.name == "a" else (-1, 0)
        acc = dinf_mul(acc, g if x.sign > 0 else dinf_inv(g))
    return acc
