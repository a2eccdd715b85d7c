"""Van Kampen diagrams as half-edge maps.

A diagram is stored as a planar combinatorial map: darts ``0..2E-1``, the
involution ``d ^ 1`` pairing the two darts of an edge, and the face
permutation ``phi`` (next dart along the same face).  Each dart carries a
letter (its partner carries the inverse letter) and the tag of its face:
``("O",)`` for the outer face, ``("R", j)`` for a relator cell,
``("T", i)`` for a triangle of 𝒯(H̃_i), ``("P", i)`` transiently for a
polygon that is about to be triangulated.

Vertices are the orbits of ``d -> phi[d ^ 1]`` and are never stored.

Diagrams are built by gluing cells along arcs of the boundary, which is also
how the enumeration works.  ``word_area`` computes areas the other way
around, by peeling cells off a boundary word; the two routes are independent
and the tests compare them.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .words import GenSymbol, MalformedInput, ParLetter, cyclic_reduce, free_reduce, word_inverse

OUTER = ("O",)


class StructuralError(MalformedInput):
    """A diagram violates the map or labelling invariants."""


def letter_code(x) -> tuple:
    """Sortable key of a letter, stable across runs."""
    if isinstance(x, GenSymbol):
        return (0, x.name, x.sign)
    return (1, x.factor, repr(x.value))


def tag_code(t) -> tuple:
    return tuple(str(p) for p in t)


def cyclic_key(w: Sequence, inv) -> tuple:
    """Canonical key of a cyclic word up to rotation and inversion."""
    w = tuple(w)
    if not w:
        return ()
    best = None
    for cand in (w, word_inverse(w, inv)):
        for i in range(len(cand)):
            r = cand[i:] + cand[:i]
            k = tuple(letter_code(x) for x in r)
            if best is None or k < best[0]:
                best = (k, r)
    return best[1]


def reduced_key(w: Sequence, inv) -> tuple:
    """Cyclic key after free and cyclic reduction."""
    return cyclic_key(cyclic_reduce(w, inv), inv)


def dilate(w: Sequence, m: int) -> tuple:
    """Repeat every letter m times (a^m b^m ... for the word ab...)."""
    return tuple(x for x in w for _ in range(m))


class VKDiagram:
    """A planar diagram with labelled darts and tagged faces."""

    __slots__ = ("labels", "phi", "tags", "inv", "_faces", "_code")

    def __init__(self, labels, phi, tags, inv):
        self.labels = list(labels)
        self.phi = list(phi)
        self.tags = list(tags)
        self.inv = inv
        self._faces = None
        self._code = None

    # -- construction ---------------------------------------------------------
    @classmethod
    def single_cell(cls, word: Sequence, tag, inv) -> "VKDiagram":
        word = tuple(word)
        n = len(word)
        if n == 0:
            raise StructuralError("a cell needs a nonempty boundary")
        labels, phi, tags = [None] * 2 * n, [0] * 2 * n, [None] * 2 * n
        for j, x in enumerate(word):
            labels[2 * j], labels[2 * j + 1] = x, inv(x)
            phi[2 * j] = 2 * ((j + 1) % n)
            phi[2 * j + 1] = 2 * ((j - 1) % n) + 1
            tags[2 * j], tags[2 * j + 1] = tuple(tag), OUTER
        return cls(labels, phi, tags, inv)

    def copy(self) -> "VKDiagram":
        return VKDiagram(self.labels, self.phi, self.tags, self.inv)

    # -- structure ------------------------------------------------------------
    @property
    def n_darts(self) -> int:
        return len(self.labels)

    def faces(self) -> list:
        """Dart cycles of faces, each starting at its least dart, sorted."""
        if self._faces is None:
            seen = [False] * self.n_darts
            out = []
            for d in range(self.n_darts):
                if seen[d]:
                    continue
                cyc = []
                x = d
                while not seen[x]:
                    seen[x] = True
                    cyc.append(x)
                    x = self.phi[x]
                out.append(cyc)
            self._faces = out
        return self._faces

    def face_index(self) -> list:
        idx = [0] * self.n_darts
        for i, cyc in enumerate(self.faces()):
            for d in cyc:
                idx[d] = i
        return idx

    def vertices(self) -> list:
        seen = [False] * self.n_darts
        out = []
        for d in range(self.n_darts):
            if seen[d]:
                continue
            orb = []
            x = d
            while not seen[x]:
                seen[x] = True
                orb.append(x)
                x = self.phi[x ^ 1]
            out.append(orb)
        return out

    def euler(self) -> int:
        return len(self.vertices()) - self.n_darts // 2 + len(self.faces())

    def cells(self) -> list:
        """(tag, dart cycle) for every face except the outer one."""
        return [(self.tags[c[0]], c) for c in self.faces() if self.tags[c[0]] != OUTER]

    @property
    def area(self) -> int:
        return len(self.cells())

    def outer_cycle(self) -> list:
        outs = [c for c in self.faces() if self.tags[c[0]] == OUTER]
        if len(outs) != 1:
            raise StructuralError(f"expected one outer face, found {len(outs)}")
        return outs[0]

    def boundary_word(self) -> tuple:
        """Boundary label, read so that a one-cell diagram of r reads r."""
        outer = self.outer_cycle()
        return tuple(self.labels[o ^ 1] for o in outer[:1] + outer[:0:-1])

    def face_word(self, cyc) -> tuple:
        return tuple(self.labels[d] for d in cyc)

    # -- canonical form -------------------------------------------------------
    def _mirror(self):
        phi = self.phi
        inv_phi = [0] * len(phi)
        for d, e in enumerate(phi):
            inv_phi[e] = d
        mphi = [inv_phi[d ^ 1] ^ 1 for d in range(len(phi))]
        mtags = [self.tags[d ^ 1] for d in range(len(phi))]
        return mphi, mtags

    @staticmethod
    def _rooted(root, phi, labs, tags):
        num = {root: 0}
        order = [root]
        i = 0
        while i < len(order):
            d = order[i]
            i += 1
            for e in (phi[d], d ^ 1):
                if e not in num:
                    num[e] = len(order)
                    order.append(e)
        return tuple((num[phi[d]], num[d ^ 1], labs[d], tags[d]) for d in order)

    def canonical_code(self) -> tuple:
        """Least rooted encoding over all darts and both orientations.

        Two diagrams get the same code iff they are isomorphic as labelled
        2-complexes (orientation reversal allowed)."""
        if self._code is None:
            labs = [letter_code(x) for x in self.labels]
            best = None
            for phi, tags in ((self.phi, self.tags), self._mirror()):
                tcodes = [tag_code(t) for t in tags]
                for r in range(self.n_darts):
                    c = self._rooted(r, phi, labs, tcodes)
                    if best is None or c < best:
                        best = c
            self._code = best
        return self._code

    # -- gluing -----------------------------------------------------------------
    def attach(self, word: Sequence, tag, start: int, k: int):
        """Glue a cell whose face word starts with the outer arc of length k
        beginning at position ``start`` of the outer cycle.  Returns the new
        diagram or None when the labels do not match or the result would not
        be a disk diagram."""
        word = tuple(word)
        outer = self.outer_cycle()
        m = len(outer)
        if not 1 <= k <= min(m, len(word)):
            return None
        arc = [outer[(start + t) % m] for t in range(k)]
        for t, d in enumerate(arc):
            if self.labels[d] != word[t]:
                return None
        rest = word[k:]
        q = len(rest)
        if q == 0 and k == m:
            return None  # would close up into a sphere
        labels, phi, tags = list(self.labels), list(self.phi), list(self.tags)
        base = len(labels)
        new = [base + 2 * t for t in range(q)]
        for x in rest:
            labels += [x, self.inv(x)]
            phi += [0, 0]
            tags += [tuple(tag), OUTER]
        for d in arc:
            tags[d] = tuple(tag)
        # the new cell
        cell = arc + new
        for a, b in zip(cell, cell[1:] + cell[:1]):
            phi[a] = b
        # the outer face
        if k == m:
            back = [n ^ 1 for n in reversed(new)]
            for a, b in zip(back, back[1:] + back[:1]):
                phi[a] = b
        else:
            pred, succ = outer[(start - 1) % m], outer[(start + k) % m]
            chain = [pred] + [n ^ 1 for n in reversed(new)] + [succ]
            for a, b in zip(chain, chain[1:]):
                phi[a] = b
        out = VKDiagram(labels, phi, tags, self.inv)
        if out.euler() != 2:
            return None
        return out

    def split_face(self, a: int, b: int, label) -> int:
        """Add an edge inside the face containing darts a and b, from tail(a)
        to tail(b), in place.  Returns the new dart lying in b's part."""
        cyc = None
        for c in self.faces():
            if a in c:
                cyc = c
                break
        if cyc is None or b not in cyc or a == b:
            raise StructuralError("split endpoints must be distinct darts of one face")
        i = cyc.index(a)
        cyc = cyc[i:] + cyc[:i]
        j = cyc.index(b)
        pa, pb = cyc[-1], cyc[j - 1]
        e = len(self.labels)
        self.labels += [label, self.inv(label)]
        tag = self.tags[a]
        self.tags += [tag, tag]
        self.phi += [b, a]
        self.phi[pa] = e
        self.phi[pb] = e + 1
        self._faces = None
        self._code = None
        return e

    # -- validation ------------------------------------------------------------
    def validate(self, relator_cells: Sequence = (), factors: dict | None = None) -> None:
        """Check the map, Euler characteristic, labels and cell inventory.

        ``relator_cells`` are the 𝓡-cell words (index j for tag ("R", j));
        ``factors`` maps parabolic index to its Factor, for 𝒯-cells."""
        n = self.n_darts
        if n % 2 or sorted(self.phi) != list(range(n)):
            raise StructuralError("phi is not a permutation of the darts")
        for d in range(0, n, 2):
            if self.labels[d + 1] != self.inv(self.labels[d]):
                raise StructuralError(f"dart {d + 1} is not labelled by the inverse of dart {d}")
        for c in self.faces():
            if len({self.tags[d] for d in c}) != 1:
                raise StructuralError("face with mixed tags")
        if len(self.vertices()) and self.euler() != 2:
            raise StructuralError(f"Euler characteristic {self.euler()} != 2")
        self.outer_cycle()
        for tag, cyc in self.cells():
            w = self.face_word(cyc)
            if tag[0] == "R":
                r = tuple(relator_cells[tag[1]])
                if cyclic_key(w, self.inv) != cyclic_key(r, self.inv):
                    raise StructuralError(f"R-cell does not read relator {tag[1]}")
            elif tag[0] == "T":
                i = tag[1]
                if len(w) > 3 or any(not isinstance(x, ParLetter) or x.factor != i for x in w):
                    raise StructuralError(f"T-cell of H_{i} with boundary {w!r}")
                if factors is not None:
                    f = factors[i]
                    if not f.is_identity(f.product([x.value for x in w])):
                        raise StructuralError("T-cell boundary is not a relation of its factor")
            else:
                raise StructuralError(f"unknown cell tag {tag!r}")


# -- polygons -----------------------------------------------------------------

def _product_ok(factor, values) -> bool:
    return not factor.is_identity(factor.product(values))


def _fan_bases(word, factor) -> list:
    n = len(word)
    vals = [x.value for x in word]
    out = []
    for b in range(n):
        rot = vals[b:] + vals[:b]
        if all(_product_ok(factor, rot[:j]) for j in range(2, n - 1)):
            out.append(b)
    return out


def _triangulation_dp(word, factor):
    """Chords (i, j) of some triangulation whose diagonals are all nontrivial.

    Polygon vertices are 0..n-1; the chord i→j reads word[i:j]."""
    n = len(word)
    vals = [x.value for x in word]

    def ok(i, j):
        return j - i == 1 or (i, j) == (0, n - 1) or _product_ok(factor, vals[i:j])

    memo = {}

    def solve(i, j):
        if j - i < 2:
            return []
        if (i, j) in memo:
            return memo[(i, j)]
        res = None
        for m in range(i + 1, j):
            if ok(i, m) and ok(m, j):
                left, right = solve(i, m), solve(m, j)
                if left is not None and right is not None:
                    res = left + right + [c for c in ((i, m), (m, j)) if c[1] - c[0] > 1]
                    break
        memo[(i, j)] = res
        return res

    return solve(0, n - 1)


def triangulate_face(d: VKDiagram, cyc: list, index: int, factor) -> None:
    """Subdivide the polygon face ``cyc`` (darts labelled in H̃_index) into
    |cyc|-2 triangles, in place.  Fans from the base giving the least rotated
    word are preferred; otherwise any triangulation with nontrivial
    diagonals."""
    word = d.face_word(cyc)
    n = len(word)
    ttag = ("T", index)
    if n <= 3:
        for x in cyc:
            d.tags[x] = ttag
        d._faces = None
        d._code = None
        return
    bases = _fan_bases(word, factor)
    if bases:
        b = min(bases, key=lambda b: tuple(letter_code(x) for x in word[b:] + word[:b]))
        darts = cyc[b:] + cyc[:b]
        vals = [d.labels[x].value for x in darts]
        a = darts[0]
        for j in range(2, n - 1):
            lab = ParLetter(index, factor.product(vals[:j]))
            e = d.split_face(a, darts[j], lab)
            # the triangle just cut off is a, ..., darts[j-1], e^1
            x = e ^ 1
            while True:
                d.tags[x] = ttag
                x = d.phi[x]
                if x == e ^ 1:
                    break
            a = e
        x = a
        while True:
            d.tags[x] = ttag
            x = d.phi[x]
            if x == a:
                break
        d._faces = None
        d._code = None
        return
    chords = _triangulation_dp(word, factor)
    if chords is None:
        raise MalformedInput("polygon admits no triangulation with nontrivial diagonals")
    vals = [x.value for x in word]
    vert = {x: t for t, x in enumerate(cyc)}
    for i, j in sorted(chords, key=lambda c: (c[1] - c[0], c)):
        for c in d.faces():
            if d.tags[c[0]] != ("P", index):
                continue
            a = next((x for x in c if vert.get(x) == i), None)
            b = next((x for x in c if vert.get(x) == j % n), None)
            if a is not None and b is not None:
                e = d.split_face(a, b, ParLetter(index, factor.product(vals[i:j])))
                vert[e], vert[e ^ 1] = i, j % n
                break
        else:
            raise StructuralError("chord endpoints not on a common face")
    for tag, c in d.cells():
        if tag == ("P", index):
            for x in c:
                d.tags[x] = ttag
    d._faces = None
    d._code = None


def min_polygon_triangulation(w: Sequence, factor, index: int | None = None, wp=None) -> VKDiagram:
    """Minimal diagram of a trivial word of H̃_i: |w|-2 triangles."""
    w = tuple(w)
    if len(w) < 3:
        raise MalformedInput("polygon needs at least 3 letters")
    if any(not isinstance(x, ParLetter) for x in w):
        raise MalformedInput("polygon letters must be parabolic letters")
    if index is None:
        index = w[0].factor
    if any(x.factor != index for x in w):
        raise MalformedInput("polygon letters must lie in one factor")
    trivial = wp(w) if wp is not None else factor.is_identity(factor.product([x.value for x in w]))
    if not trivial:
        raise MalformedInput("word is not trivial in the factor")

    def inv(x):
        return ParLetter(x.factor, factor.inv(x.value))

    d = VKDiagram.single_cell(w, ("P", index), inv)
    triangulate_face(d, d.cells()[0][1], index, factor)
    return d


def is_pinched(w: Sequence, factor) -> bool:
    """True when a proper contiguous cyclic subword of length ≥ 2 is trivial."""
    vals = [x.value for x in w]
    n = len(vals)
    for i in range(n):
        acc = factor.identity()
        for t in range(n - 1):
            acc = factor.mul(acc, vals[(i + t) % n])
            if t >= 1 and factor.is_identity(acc):
                return True
    return False


# -- clusters -------------------------------------------------------------------

@dataclass
class Cluster:
    index: int
    cells: list                   # face ids (into diagram.faces())
    boundaries: list              # dart cycles of ∂C
    exterior: int                 # position of the exterior cycle in ``boundaries``
    on_boundary: int = 0          # edges of ∂C lying on ∂D

    def exterior_word(self, d: VKDiagram) -> tuple:
        return tuple(d.labels[x] for x in self.boundaries[self.exterior])


def clusters(d: VKDiagram) -> list:
    """Maximal edge-connected families of 𝒯(H̃_i)-cells.

    Sharing an edge is what "connected without global cut point" amounts
    to for unions of closed cells.  Every boundary edge of a cluster must lie
    on ∂D or in an 𝓡-cell; a violation raises StructuralError."""
    faces = d.faces()
    fidx = d.face_index()
    tcells = [i for i, c in enumerate(faces) if d.tags[c[0]][0] == "T"]
    parent = {i: i for i in tcells}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in tcells:
        for x in faces[i]:
            j = fidx[x ^ 1]
            if j in parent and d.tags[faces[j][0]] == d.tags[faces[i][0]]:
                a, b = find(i), find(j)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: dict = {}
    for i in tcells:
        groups.setdefault(find(i), []).append(i)
    outer_face = next(i for i, c in enumerate(faces) if d.tags[c[0]] == OUTER)
    out = []
    for root in sorted(groups):
        cells = sorted(groups[root])
        cset = set(cells)
        bdarts = [x for i in cells for x in faces[i] if fidx[x ^ 1] not in cset]
        for x in bdarts:
            other = d.tags[x ^ 1]
            if other != OUTER and other[0] != "R":
                raise StructuralError("cluster boundary edge shared with a non-relator cell")
        # chain boundary darts into cycles
        bset = set(bdarts)
        seen = set()
        cycles = []
        for x0 in sorted(bdarts):
            if x0 in seen:
                continue
            cyc = []
            x = x0
            while x not in seen:
                seen.add(x)
                cyc.append(x)
                y = d.phi[x]
                while y not in bset:
                    y = d.phi[y ^ 1]
                x = y
            cycles.append(cyc)
        # faces outside the cluster, grouped by edge adjacency
        rest = [i for i in range(len(faces)) if i not in cset]
        comp = {i: i for i in rest}

        def cf(i):
            while comp[i] != i:
                comp[i] = comp[comp[i]]
                i = comp[i]
            return i

        for i in rest:
            for x in faces[i]:
                j = fidx[x ^ 1]
                if j in comp:
                    a, b = cf(i), cf(j)
                    if a != b:
                        comp[max(a, b)] = min(a, b)
        outer_root = cf(outer_face)
        ext = 0
        for t, cyc in enumerate(cycles):
            if any(cf(fidx[x ^ 1]) == outer_root for x in cyc):
                ext = t
                break
        on_b = sum(1 for x in bdarts if d.tags[x ^ 1] == OUTER)
        out.append(Cluster(d.tags[faces[cells[0]][0]][1], cells, cycles, ext, on_b))
    return out


# -- inventory and enumeration --------------------------------------------------

@dataclass(frozen=True)
class InventoryCell:
    """An enumeration unit: a relator cell (weight 1) or a minimal polygon
    of H̃_i (weight |w|-2, glued and then triangulated)."""
    word: tuple
    tag: tuple
    weight: int

    @property
    def is_polygon(self) -> bool:
        return self.tag[0] == "P"


def relator_inventory(cells: Sequence) -> list:
    return [InventoryCell(tuple(c), ("R", j), 1) for j, c in enumerate(cells)]


def polygon_inventory(index: int, words: Iterable) -> list:
    return [InventoryCell(tuple(w), ("P", index), len(w) - 2) for w in words]


def _orientations(word, inv) -> list:
    out = []
    seen = set()
    for cand in (tuple(word), word_inverse(word, inv)):
        for i in range(len(cand)):
            r = cand[i:] + cand[:i]
            if r not in seen:
                seen.add(r)
                out.append(r)
    return out


@dataclass
class DiagramList:
    diagrams: list = field(default_factory=list)
    truncated: bool = False
    reason: str = ""

    def __iter__(self):
        return iter(self.diagrams)

    def __len__(self):
        return len(self.diagrams)


def _place(d: VKDiagram, unit: InventoryCell, word, start, k, factors):
    tag = unit.tag
    nd = d.attach(word, tag, start, k)
    if nd is None or not unit.is_polygon:
        return nd
    i = tag[1]
    cyc = next(c for t, c in nd.cells() if t == tag)
    triangulate_face(nd, cyc, i, factors[i])
    return nd


def enumerate_diagrams(inventory: Sequence[InventoryCell], inv, max_cells: int,
                       boundary_cap: int | None = None, max_diagrams: int | None = None,
                       factors: dict | None = None) -> DiagramList:
    """All disk diagrams over the inventory with at most ``max_cells`` cells
    (polygons count their triangles), up to labelled isomorphism.

    Diagrams are grown by gluing a unit along an arc of the boundary, which
    reaches every shellable disk diagram; deduplication is by canonical code.
    Output order is (area, code).  Exceeding ``max_diagrams`` stops early and
    flags the list as truncated."""
    factors = factors or {}
    out = DiagramList()
    levels: dict = {}
    units = [(u, _orientations(u.word, inv)) for u in inventory if u.weight <= max_cells]

    def add(nd):
        if boundary_cap is not None and len(nd.outer_cycle()) > boundary_cap:
            return True
        a = nd.area
        bucket = levels.setdefault(a, {})
        code = nd.canonical_code()
        if code in bucket:
            return True
        if max_diagrams is not None and sum(len(b) for b in levels.values()) >= max_diagrams:
            out.truncated = True
            out.reason = f"more than {max_diagrams} diagrams"
            return False
        bucket[code] = nd
        return True

    for u, words in units:
        nd = VKDiagram.single_cell(words[0], u.tag, inv)
        if u.is_polygon:
            triangulate_face(nd, nd.cells()[0][1], u.tag[1], factors[u.tag[1]])
        if not add(nd):
            break
    area = 0
    while not out.truncated and area <= max_cells:
        bucket = levels.get(area, {})
        for code in sorted(bucket):
            d = bucket[code]
            m = len(d.outer_cycle())
            for u, words in units:
                if area + u.weight > max_cells:
                    continue
                for w in words:
                    for start in range(m):
                        for k in range(1, min(m, len(w)) + 1):
                            nd = _place(d, u, w, start, k, factors)
                            if nd is not None and not add(nd):
                                break
                        if out.truncated:
                            break
                    if out.truncated:
                        break
                if out.truncated:
                    break
            if out.truncated:
                break
        area += 1
    for a in sorted(levels):
        for code in sorted(levels[a]):
            out.diagrams.append(levels[a][code])
    return out


def min_area_table(diagrams: Iterable[VKDiagram], inv) -> dict:
    """Reduced boundary key -> least area among the given diagrams.

    Boundary words are compared after free and cyclic reduction (folding
    spurs does not change area); diagrams whose boundary reduces to the
    empty word are skipped."""
    table: dict = {}
    for d in diagrams:
        key = reduced_key(d.boundary_word(), inv)
        if not key:
            continue
        a = d.area
        if key not in table or a < table[key]:
            table[key] = a
    return table


# -- area by peeling -------------------------------------------------------------

@dataclass
class AreaResult:
    area: int | None
    nodes: int
    exhausted: bool      # True when the search ran out of budget before deciding


class _Codec:
    """Letters as small ints; ``inv[c]`` is the code of the inverse letter."""

    def __init__(self, inv):
        self._inv = inv
        self.code: dict = {}
        self.letters: list = []
        self.inv: list = []

    def __call__(self, x) -> int:
        c = self.code.get(x)
        if c is None:
            y = self._inv(x)
            c = len(self.letters)
            self.code[x] = c
            self.letters.append(x)
            if y == x:
                self.inv.append(c)
            else:
                self.code[y] = c + 1
                self.letters.append(y)
                self.inv += [c + 1, c]
        return c

    def word(self, w) -> tuple:
        return tuple(self(x) for x in w)


def _reduce_codes(w, inv) -> tuple:
    st: list = []
    for c in w:
        if st and st[-1] == inv[c]:
            st.pop()
        else:
            st.append(c)
    i, j = 0, len(st) - 1
    while i < j and st[i] == inv[st[j]]:
        i += 1
        j -= 1
    return tuple(st[i:j + 1])


def _ckey(w, inv) -> tuple:
    if not w:
        return w
    n = len(w)
    ww = w + w
    vv = tuple(inv[c] for c in reversed(ww))
    return min(min(ww[i:i + n] for i in range(n)), min(vv[i:i + n] for i in range(n)))


def word_area(word: Sequence, cells: Sequence, inv, factors: dict | None = None,
              polygons: Sequence = (), max_area: int | None = None,
              max_nodes: int = 200_000, slack: int | None = None, greedy: bool = False) -> AreaResult:
    """Least number of cells needed to fill ``word``, found by peeling.

    A move replaces a subword U of the cyclic boundary by Y when U·Y⁻¹ reads
    a cell (relator or polygon, either orientation, any rotation), at the
    cell's weight.  With ``factors`` two adjacent letters of one parabolic
    factor merge into their product at cost 1 (a triangle of 𝒯(H̃_i)).
    Words are kept freely and cyclically reduced.  Intermediate words longer
    than |word| + slack are not explored, so a returned area is exact within
    that window and an upper bound in general.  ``greedy`` explores short
    boundaries first and returns the first filling found (an upper bound)."""
    codec = _Codec(inv)
    units = [(tuple(c), 1) for c in cells] + [(tuple(p), len(p) - 2) for p in polygons]
    maxlen = max([len(c) for c, _ in units] + [3])
    if slack is None:
        slack = maxlen
    moves: dict = {}
    for c, wgt in units:
        for r in _orientations(c, inv):
            r = codec.word(r)
            for k in range(1, len(r) + 1):
                u = r[:k]
                y = tuple(codec.inv[x] for x in reversed(r[k:]))
                moves.setdefault(u[0], []).append((u, y, wgt))
    start = _reduce_codes(codec.word(word), codec.inv)
    limit = len(start) + slack
    if not start:
        return AreaResult(0, 0, False)
    cinv = codec.inv
    best = {_ckey(start, cinv): 0}
    heap = [(0, 0, 0, start)]
    tie = itertools.count(1)
    nodes = 0
    while heap:
        _, cost, _, w = heapq.heappop(heap)
        if not w:
            return AreaResult(cost, nodes, False)
        if best.get(_ckey(w, cinv), cost) < cost:
            continue
        if max_area is not None and cost >= max_area:
            continue
        nodes += 1
        if nodes > max_nodes:
            return AreaResult(None, nodes, True)
        n = len(w)
        ww = w + w
        succ = []
        for i in range(n):
            for u, y, wgt in moves.get(w[i], ()):
                k = len(u)
                if k > n or ww[i:i + k] != u:
                    continue
                succ.append((cost + wgt, y + ww[i + k:i + n]))
            if factors and n >= 2:
                x, z = codec.letters[w[i]], codec.letters[ww[i + 1]]
                if isinstance(x, ParLetter) and isinstance(z, ParLetter) and x.factor == z.factor:
                    f = factors[x.factor]
                    v = f.mul(x.value, z.value)
                    if not f.is_identity(v):
                        succ.append((cost + 1, (codec(ParLetter(x.factor, v)),) + ww[i + 2:i + n]))
        for c, nw in succ:
            nw = _reduce_codes(nw, cinv)
            if len(nw) > limit or (max_area is not None and c > max_area):
                continue
            kk = _ckey(nw, cinv)
            if c < best.get(kk, c + 1):
                best[kk] = c
                heapq.heappush(heap, (len(nw) if greedy else c, c, next(tie), nw))
    return AreaResult(None, nodes, False)


def free_area_zero(word: Sequence, inv) -> bool:
    return not free_reduce(word, inv)
