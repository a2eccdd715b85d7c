"""Relative presentations and the presentation file format.

File format (line oriented, ``#`` starts a comment)::

    [group]
    generators = a, b
    relators = abAB, a P[-1,0]

    [parabolic.P]
    kind = free-abelian          # or abelian | finite | oracle
    rank = 2
    torsion = 3, 3               # abelian only
    table = 0 1 2; 1 2 0; 2 0 1  # finite only
    procedure = builtin:free     # oracle only
    gens = x, y
    embed x = a
    embed y = b

Generators of the group are single lowercase letters (uppercase = inverse).
Parabolic letters inside relators are written ``NAME[c1,...,cn]``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .factors import AbelianFactor, Factor, FiniteFactor, OracleFactor, Unsupported, parse_table
from .freeprod import FreeProduct
from .words import (GenSymbol, MalformedInput, ParLetter, cyclic_reduce, free_reduce,
                    parse_word, word_str)

KINDS = ("free-abelian", "abelian", "finite", "oracle")


@dataclass
class ParabolicSpec:
    index: int
    name: str
    kind: str
    rank: int = 0
    torsion: tuple = ()
    gens: tuple = ()
    embedding: dict = field(default_factory=dict)
    table: list | None = None
    procedure: object = None  # callable nf on words, or a "builtin:..." tag

    def make_factor(self) -> Factor:
        if self.kind == "free-abelian":
            return AbelianFactor(self.name, self.rank, (), self.gens)
        if self.kind == "abelian":
            return AbelianFactor(self.name, self.rank, self.torsion, self.gens)
        if self.kind == "finite":
            if self.table is None:
                raise MalformedInput(f"parabolic {self.name}: finite kind needs a table")
            gens = {g: i + 1 for i, g in enumerate(self.gens)} if self.gens else None
            return FiniteFactor(self.name, self.table, gens)
        if self.kind == "oracle":
            nf = None
            if callable(self.procedure):
                nf = self.procedure
            elif isinstance(self.procedure, str):
                from .oracles import family_oracles
                nf = family_oracles(self.procedure, self.gens)[1]
            return OracleFactor(self.name, self.gens, nf)
        raise MalformedInput(f"unknown parabolic kind {self.kind!r}")


class RelPresentation:
    """Generators X, parabolic factors, relators over X ⊔ H_1 ⊔ ... ⊔ H_q."""

    def __init__(self, generators: Sequence[str], parabolics: Sequence[ParabolicSpec] = (),
                 relators: Sequence[Sequence] = ()):
        self.generators = tuple(generators)
        self.parabolics = list(parabolics)
        self.fp = FreeProduct(self.generators, [p.make_factor() for p in self.parabolics])
        self._check_names()
        rels = []
        for r in relators:
            r = tuple(r)
            for x in r:
                self._check_letter(x)
            rels.append(r)
        self.relators = tuple(rels)

    def _check_names(self):
        seen = set()
        for g in self.generators:
            if g in seen:
                raise MalformedInput(f"duplicate generator name {g!r}")
            seen.add(g)
        for p in self.parabolics:
            for g in p.gens:
                if g in seen:
                    raise MalformedInput(f"duplicate generator name {g!r}")
                seen.add(g)
            for g, w in p.embedding.items():
                if g not in p.gens:
                    raise MalformedInput(f"embed of unknown parabolic generator {g!r}")
                for x in w:
                    if x.name not in self.generators:
                        raise MalformedInput(f"embed {g}: letter {x} outside X")

    def _check_letter(self, x):
        if isinstance(x, GenSymbol):
            if x.name not in self.generators:
                raise MalformedInput(f"relator letter {x} outside the alphabet")
        elif isinstance(x, ParLetter):
            if not 1 <= x.factor <= len(self.parabolics):
                raise MalformedInput(f"relator letter in unknown parabolic {x.factor}")
        else:
            raise MalformedInput(f"bad relator letter {x!r}")

    # -- alphabet helpers ----------------------------------------------------
    @property
    def q(self):
        return len(self.parabolics)

    def factor(self, i) -> Factor:
        return self.fp.factors[i]

    def inv(self, x):
        return self.fp.letter_inverse(x)

    def letter_key(self, x):
        return self.fp.letter_key(x)

    def render_letter(self, x) -> str:
        return self.fp.render_letter(x)

    def render_word(self, w) -> str:
        if not w:
            return "1"
        out = []
        for x in w:
            s = self.render_letter(x)
            out.append(s)
        # single free letters run together, parabolic letters are spaced
        text = out[0]
        for prev, s in zip(out, out[1:]):
            if len(s) > 1 or len(prev) > 1:
                text += " "
            text += s
        return text

    def parse_word(self, text: str) -> tuple:
        return tuple(self.fp.tokenize(text))

    def symmetric_X(self) -> list:
        return [GenSymbol(g, 1) for g in self.generators] + \
               [GenSymbol(g, -1) for g in self.generators]

    def derived_letters(self) -> list:
        """𝒳_𝓡: X together with the parabolic letters occurring in relators,
        closed under inverses, in deterministic order."""
        out = self.symmetric_X()
        par = set()
        for r in self.relators:
            for x in r:
                if isinstance(x, ParLetter):
                    par.add(x)
                    par.add(self.inv(x))
        return out + sorted(par, key=self.letter_key)

    def parabolic_vocabulary(self, i: int) -> list:
        """𝒳_𝓡 ∩ H̃_i (closed under inverses), in the factor's key order."""
        return [x for x in self.derived_letters()
                if isinstance(x, ParLetter) and x.factor == i]

    def cells(self) -> list:
        """Cyclically reduced nonempty relators (the 𝓡-cells)."""
        out = []
        for r in self.relators:
            c = cyclic_reduce(r, self.inv)
            if c and c not in out:
                out.append(c)
        return out

    def reduce(self, w) -> tuple:
        return free_reduce(w, self.inv)

    # -- projection to words over X -------------------------------------------
    def embed_letter(self, x) -> tuple:
        """Word over X for a letter (parabolic letters go through the embedding)."""
        if isinstance(x, GenSymbol):
            return (x,)
        spec = self.parabolics[x.factor - 1]
        f = self.factor(x.factor)
        missing = [g for g in spec.gens if g not in spec.embedding]
        if missing or not spec.gens:
            raise Unsupported(f"parabolic {spec.name} has no embedding for {missing or 'its generators'}")
        if isinstance(f, AbelianFactor):
            out = []
            for g, c in zip(f.gens, f.signed(x.value)):
                piece = spec.embedding[g] if c > 0 else tuple(y.inverse() for y in reversed(spec.embedding[g]))
                out.extend(piece * abs(c))
            return tuple(out)
        if isinstance(f, OracleFactor):
            out = []
            for y in x.value:
                piece = spec.embedding[y.name]
                if y.sign < 0:
                    piece = tuple(z.inverse() for z in reversed(piece))
                out.extend(piece)
            return tuple(out)
        if isinstance(f, FiniteFactor):
            word = _finite_word(f, x.value)
            out = []
            for g in word:
                out.extend(spec.embedding[g])
            return tuple(out)
        raise Unsupported(f"cannot embed letters of {spec.name}")

    def to_X_word(self, w) -> tuple:
        out = []
        for x in w:
            out.extend(self.embed_letter(x))
        return tuple(out)

    def has_embedding(self) -> bool:
        return all(p.gens and all(g in p.embedding for g in p.gens) for p in self.parabolics)

    def describe(self) -> str:
        rels = ", ".join(self.render_word(r) for r in self.relators) or "(none)"
        pars = ", ".join(p.name for p in self.parabolics) or "(none)"
        return f"X={','.join(self.generators)} parabolics={pars} relators={rels}"


def _finite_word(f: FiniteFactor, u: int) -> list:
    """Shortest generator-name word for a finite-factor element (BFS)."""
    if u == 0:
        return []
    names = list(f.gens.items())
    if not names:
        raise Unsupported(f"finite parabolic {f.name} has no named generators")
    from collections import deque
    prev = {0: None}
    q = deque([0])
    while q:
        a = q.popleft()
        for g, val in names:
            b = f.mul(a, val)
            if b not in prev:
                prev[b] = (a, g)
                q.append(b)
    if u not in prev:
        raise Unsupported(f"{f.name}[{u}] is not generated by the named generators")
    out = []
    while prev[u] is not None:
        a, g = prev[u]
        out.append(g)
        u = a
    return out[::-1]


# -- the file format ---------------------------------------------------------

_SECTION = re.compile(r"^\[(group|parabolic\.([A-Za-z][A-Za-z0-9_]*))\]$")
_KEY = re.compile(r"^(embed\s+[A-Za-z][A-Za-z0-9_]*|[a-z]+)\s*=\s*(.*)$")


def split_top(text: str) -> list:
    """Split on commas that are not inside brackets or parentheses."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


def _names(value: str, lineno: int) -> list:
    names = [n.strip() for n in value.split(",") if n.strip()]
    for n in names:
        if not re.fullmatch(r"[a-z][a-z0-9_]*", n):
            raise MalformedInput(f"line {lineno}: bad generator name {n!r}")
    return names


def parse_presentation(text: str, triangulate: bool = False) -> RelPresentation:
    """Parse the presentation file format into a validated RelPresentation."""
    section = None
    group = {"generators": None, "relators": ("", 0)}
    pars: list[dict] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            if m.group(2):
                name = m.group(2)
                if any(p["name"] == name for p in pars):
                    raise MalformedInput(f"line {lineno}: duplicate parabolic {name!r}")
                pars.append({"name": name, "line": lineno, "embed": {}})
                section = pars[-1]
            else:
                section = group
            continue
        m = _KEY.match(line)
        if not m or section is None:
            raise MalformedInput(f"line {lineno}: syntax error: {raw.strip()!r}")
        key, value = m.group(1), m.group(2).strip()
        if section is group:
            if key == "generators":
                names = _names(value, lineno)
                for n in names:
                    if len(n) != 1:
                        raise MalformedInput(f"line {lineno}: generators must be single letters, got {n!r}")
                group["generators"] = (names, lineno)
            elif key == "relators":
                prev, _ = group["relators"]
                group["relators"] = ((prev + "," + value) if prev else value, lineno)
            else:
                raise MalformedInput(f"line {lineno}: unknown key {key!r} in [group]")
        else:
            if key.startswith("embed"):
                g = key.split()[1]
                section["embed"][g] = (value, lineno)
            elif key in ("kind", "rank", "torsion", "gens", "table", "procedure"):
                section[key] = (value, lineno)
            else:
                raise MalformedInput(f"line {lineno}: unknown key {key!r} in parabolic section")
    if group["generators"] is None:
        gens = []
    else:
        gens = group["generators"][0]
    if len(set(gens)) != len(gens):
        raise MalformedInput(f"line {group['generators'][1]}: duplicate generator names")

    specs = []
    for i, p in enumerate(pars, 1):
        if "kind" not in p:
            raise MalformedInput(f"line {p['line']}: parabolic {p['name']} has no kind")
        kind, ln = p["kind"]
        if kind not in KINDS:
            raise MalformedInput(f"line {ln}: unknown kind {kind!r}")
        try:
            rank = int(p.get("rank", ("0", 0))[0])
            torsion = tuple(int(t) for t in p.get("torsion", ("", 0))[0].split(",") if t.strip())
        except ValueError:
            raise MalformedInput(f"line {p['line']}: bad rank/torsion in {p['name']}") from None
        gnames = tuple(_names(p["gens"][0], p["gens"][1])) if "gens" in p else ()
        table = parse_table(p["table"][0]) if "table" in p else None
        embedding = {}
        for g, (w, ln) in p["embed"].items():
            try:
                embedding[g] = parse_word(w)
            except MalformedInput as e:
                raise MalformedInput(f"line {ln}: {e}") from None
        spec = ParabolicSpec(i, p["name"], kind, rank, torsion, gnames, embedding, table,
                             p.get("procedure", (None, 0))[0])
        specs.append(spec)

    try:
        pres = RelPresentation(gens, specs, ())
    except MalformedInput as e:
        raise MalformedInput(f"line {pars[0]['line'] if pars else 1}: {e}") from None

    rel_text, rel_line = group["relators"]
    relators = []
    for item in split_top(rel_text):
        try:
            w = pres.parse_word(item)
        except MalformedInput as e:
            raise MalformedInput(f"line {rel_line}: relator {item!r}: {e}") from None
        relators.append(w)
    if triangulate:
        gens, relators = triangulate_relators(pres, relators)
    return RelPresentation(gens, specs, relators)


def triangulate_relators(pres: RelPresentation, relators) -> tuple:
    """Rewrite relators to length ≤ 3 with fresh generators t = x_1 x_2 ..."""
    gens = list(pres.generators)
    taken = set(gens) | {g for p in pres.parabolics for g in p.gens}
    fresh = (c for c in "tuvwzyxsrqponmlkjihgfedcba" if c not in taken)
    out = []
    for r in relators:
        r = list(cyclic_reduce(r, pres.inv))
        while len(r) > 3:
            try:
                t = next(fresh)
            except StopIteration:
                raise MalformedInput("ran out of fresh generator letters") from None
            taken.add(t)
            gens.append(t)
            tg = GenSymbol(t, 1)
            out.append((r[0], r[1], tg.inverse()))
            r = [tg] + r[2:]
        if r:
            out.append(tuple(r))
    return gens, out


def load_presentation(path: str, triangulate: bool = False) -> RelPresentation:
    with open(path, encoding="utf-8") as fh:
        return parse_presentation(fh.read(), triangulate)


def presentation_text(pres: RelPresentation) -> str:
    """Serialize back to the file format (used for hashing and tests)."""
    lines = ["[group]", "generators = " + ", ".join(pres.generators)]
    lines.append("relators = " + ", ".join(pres.render_word(r) for r in pres.relators))
    for p in pres.parabolics:
        lines.append(f"[parabolic.{p.name}]")
        lines.append(f"kind = {p.kind}")
        if p.kind in ("free-abelian", "abelian"):
            lines.append(f"rank = {p.rank}")
        if p.torsion:
            lines.append("torsion = " + ", ".join(map(str, p.torsion)))
        if p.table is not None:
            lines.append("table = " + "; ".join(" ".join(map(str, r)) for r in p.table))
        if isinstance(p.procedure, str):
            lines.append(f"procedure = {p.procedure}")
        if p.gens:
            lines.append("gens = " + ", ".join(p.gens))
        for g in p.gens:
            if g in p.embedding:
                lines.append(f"embed {g} = {word_str(p.embedding[g])}")
    return "\n".join(lines) + "\n"
