"""Bounded exploration of the coned-off Cayley graph.

Group vertices are elements of Γ (canonical words over X).  Each left coset
gP_k of a parabolic subgroup gets one extra cone vertex joined to every
element of the coset.  Cone vertices have infinite valence when P_k is
infinite, so their stars are truncated to the images of a finite ball of the
parabolic factor; fragments record where that happened.

``ConedGraph`` is the implicit (lazily evaluated) graph.  ``explore`` turns a
ball of it into an immutable ``GraphFragment``, on which angle, cone, sector
and distance queries run.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .factors import AbelianFactor, FiniteFactor
from .lattice import coset_rep, echelon_basis, solve_integer
from .oracles import family_oracles
from .words import GenSymbol, MalformedInput, ParLetter, free_reduce, word_str

INF = math.inf


class ContractViolation(ValueError):
    """A query violated its precondition (edge not at vertex, fragment too small)."""


class InsufficientExploration(ContractViolation):
    def __init__(self, needed: int, have: int, what: str = "query"):
        super().__init__(f"{what} needs exploration radius >= {needed} (fragment has {have})")
        self.needed = needed


def group_vertex(word) -> tuple:
    return ("g", tuple(word))


def is_cone(v) -> bool:
    return v[0] == "c"


class Distance(NamedTuple):
    value: float
    exact: bool


class ConedGraph:
    """The coned-off Cayley graph of Γ relative to the parabolic images.

    ``family`` is a built-in oracle tag for Γ itself (``builtin:free``,
    ``builtin:free-abelian``, ...) or None when ``nf`` is supplied directly.
    Cosets are identified exactly for free abelian Γ, for finite parabolics,
    and for cyclic parabolics in free Γ; otherwise by searching a ball of
    radius ``member_radius`` of the factor (cosets that differ only by far
    elements may then be split).
    """

    def __init__(self, pres, family: str | None = None, nf: Callable | None = None,
                 cone_radius: int = 2, member_radius: int | None = None):
        self.pres = pres
        self.family = family
        if nf is None:
            if family is None:
                raise MalformedInput("need a group family or a normal-form oracle")
            nf = family_oracles(family, pres.generators)[1]
        self.nf = nf
        self.cone_radius = cone_radius
        self.member_radius = member_radius if member_radius is not None else 2 * cone_radius + 4
        self.X = pres.symmetric_X()
        self._reps: dict = {}
        self._registry: dict = {}
        self._members: dict = {}
        self._coset_mode = {k: self._pick_mode(k) for k in range(1, pres.q + 1)}
        self._star_cache: dict = {}
        self._neighbor_cache: dict = {}

    # -- group arithmetic -------------------------------------------------------
    def canon(self, word) -> tuple:
        return tuple(self.nf(tuple(word)))

    def image(self, k: int, value) -> tuple:
        """π_k(value) as a canonical word over X."""
        f = self.pres.factor(k)
        if f.is_identity(value):
            return ()
        return self.canon(self.pres.embed_letter(ParLetter(k, value)))

    def _vector(self, word) -> tuple:
        idx = {g: i for i, g in enumerate(self.pres.generators)}
        v = [0] * len(idx)
        for x in word:
            v[idx[x.name]] += x.sign
        return tuple(v)

    def _word_of_vector(self, v) -> tuple:
        out = []
        for g, c in zip(self.pres.generators, v):
            out.extend([GenSymbol(g, 1 if c > 0 else -1)] * abs(c))
        return self.canon(out)

    def _pick_mode(self, k):
        f = self.pres.factor(k)
        spec = self.pres.parabolics[k - 1]
        fam = (self.family or "").replace("builtin:", "")
        if fam in ("free-abelian", "abelian") and self.pres.has_embedding():
            gens = []
            for g in spec.gens:
                gens.append(self._vector(spec.embedding[g]))
            self._lattice_gens = getattr(self, "_lattice_gens", {})
            self._lattice_gens[k] = gens
            return ("lattice", echelon_basis(gens, len(self.pres.generators)))
        if isinstance(f, FiniteFactor):
            return ("finite", None)
        if fam == "free" and len(spec.gens) == 1 and spec.gens[0] in spec.embedding:
            u = free_reduce(spec.embedding[spec.gens[0]])
            return ("cyclic", u)
        return ("search", None)

    def coset_key(self, k: int, g) -> tuple:
        """Canonical key of the coset gP_k, together with a representative."""
        g = tuple(g)
        mode, data = self._coset_mode[k]
        if mode == "lattice":
            rep_vec = coset_rep(self._vector(g), data)
            return rep_vec, self._word_of_vector(rep_vec)
        if mode == "finite":
            f = self.pres.factor(k)
            best = min((self.canon(g + self.image(k, h)) for h in range(f.n)),
                       key=lambda w: (len(w), [self.X.index(x) for x in w]))
            return best, best
        if mode == "cyclic":
            u = data
            ui = tuple(x.inverse() for x in reversed(u))
            span = len(g) + 2
            cands = []
            for n in range(-span, span + 1):
                w = g + (u * n if n > 0 else ui * (-n))
                cands.append(self.canon(w))
            best = min(cands, key=lambda w: (len(w), [self.X.index(x) for x in w]))
            return best, best
        return self._search_key(k, g)

    def _member_map(self, k):
        if k not in self._members:
            f = self.pres.factor(k)
            table = {(): f.identity()}
            for h in f.ball(self.member_radius):
                table.setdefault(self.image(k, h), h)
            self._members[k] = table
        return self._members[k]

    def _search_key(self, k, g):
        members = self._member_map(k)
        ginv = tuple(x.inverse() for x in reversed(g))
        for rep in self._registry.setdefault(k, []):
            if self.canon(tuple(x.inverse() for x in reversed(rep)) + g) in members:
                return rep, rep
            if self.canon(ginv + rep) in members:
                return rep, rep
        self._registry[k].append(g)
        return g, g

    def relative_value(self, k: int, rep, g):
        """Some h ∈ H_k with rep·π(h) = g, or None if not found."""
        f = self.pres.factor(k)
        diff = self.canon(tuple(x.inverse() for x in reversed(rep)) + tuple(g))
        mode, data = self._coset_mode[k]
        if not diff:
            return f.identity()
        if mode == "lattice" and isinstance(f, AbelianFactor):
            gens = self._lattice_gens[k]
            target = self._vector(diff)
            m = [[vec[i] for vec in gens] for i in range(len(target))]
            sol = solve_integer(m, list(target))
            if sol is None:
                return None
            return f.reduce(sol[0])
        if mode == "finite":
            for h in range(f.n):
                if self.image(k, h) == diff:
                    return h
            return None
        if mode == "cyclic" and isinstance(f, AbelianFactor):
            u = data
            for n in range(1, len(diff) + 2):
                for sgn in (1, -1):
                    w = u * n if sgn > 0 else tuple(x.inverse() for x in reversed(u)) * n
                    if self.canon(w) == diff:
                        return f.reduce([sgn * n])
            return None
        return self._member_map(k).get(diff)

    # -- vertices and neighbors ------------------------------------------------------
    def vertex(self, word) -> tuple:
        return group_vertex(self.canon(word))

    def cone_vertex(self, k: int, g) -> tuple:
        key, rep = self.coset_key(k, g)
        v = ("c", k, key)
        self._reps.setdefault(v, rep)
        return v

    def rep(self, v) -> tuple:
        return self._reps[v]

    def star_values(self, k: int) -> list:
        f = self.pres.factor(k)
        return [f.identity()] + list(f.ball(self.cone_radius))

    def star_is_truncated(self, k: int) -> bool:
        f = self.pres.factor(k)
        if not f.is_finite():
            return True
        order = f.n if isinstance(f, FiniteFactor) else math.prod(f.orders)
        return len(self.star_values(k)) < order

    def neighbors(self, v) -> list:
        """(neighbor, label) pairs in deterministic order."""
        if v in self._neighbor_cache:
            return self._neighbor_cache[v]
        out = []
        seen = {v}
        if v[0] == "g":
            g = v[1]
            for x in self.X:
                u = self.vertex(g + (x,))
                if u not in seen:
                    seen.add(u)
                    out.append((u, str(x)))
            for k in range(1, self.pres.q + 1):
                c = self.cone_vertex(k, g)
                h = self.relative_value(k, self._reps[c], g)
                out.append((c, self.edge_label(k, h)))
        else:
            out = self.cone_star(v, self._reps[v])
        self._neighbor_cache[v] = out
        return out

    def cone_star(self, v, center) -> list:
        """Truncated star of cone vertex ``v``: center·π(h) for h in the star ball.

        Labels stay relative to the coset representative.
        """
        k = v[1]
        rep = self._reps[v]
        out = []
        seen = set()
        for h in self.star_values(k):
            u = self.vertex(tuple(center) + self.image(k, h))
            if u in seen:
                continue
            seen.add(u)
            if tuple(center) != rep:
                h = self.relative_value(k, rep, u[1])
            out.append((u, self.edge_label(k, h)))
        return out

    def edge_label(self, k, h) -> str:
        f = self.pres.factor(k)
        if h is None:
            return f.name
        return f.render(h)

    def render_vertex(self, v) -> str:
        if v[0] == "g":
            return word_str(v[1])
        return f"{self.pres.factor(v[1]).name}@{word_str(self._reps[v])}"

    # -- implicit-graph queries ---------------------------------------------------------
    def distance(self, u, v, cutoff: int = 12) -> float:
        """Bidirectional BFS distance, or ∞ beyond ``cutoff``.

        Each side only uses its own forward stars, so two vertices of the same
        coset always meet at the shared cone vertex even when the star is
        truncated.
        """
        if u == v:
            return 0
        da, db = {u: 0}, {v: 0}
        fa, fb = [u], [v]
        best = INF
        depth_a = depth_b = 0
        while fa and fb and depth_a + depth_b < cutoff:
            if len(fa) <= len(fb):
                depth_a += 1
                fa = self._grow(fa, da, depth_a)
                for w in fa:
                    if w in db:
                        best = min(best, da[w] + db[w])
            else:
                depth_b += 1
                fb = self._grow(fb, db, depth_b)
                for w in fb:
                    if w in da:
                        best = min(best, da[w] + db[w])
            if best <= depth_a + depth_b:
                break
        return best if best <= cutoff else INF

    def _grow(self, frontier, dist, d, avoid=None):
        nxt = []
        for w in frontier:
            for n, _ in self.neighbors(w):
                if n != avoid and n not in dist:
                    dist[n] = d
                    nxt.append(n)
        return nxt

    def angle(self, v, u1, u2, cutoff: int) -> float:
        """Angle at ``v`` between the edges to ``u1`` and ``u2``: BFS in the graph minus v."""
        if u1 == u2:
            return 0
        dist = {u1: 0}
        frontier = [u1]
        for d in range(1, cutoff + 1):
            frontier = self._grow(frontier, dist, d, avoid=v)
            if u2 in dist:
                return dist[u2]
            if not frontier:
                break
        return INF

    def path_of(self, letters) -> list:
        """Vertex sequence of the path labeled by a long normal form from 1."""
        g = ()
        out = [group_vertex(())]
        for x in letters:
            if isinstance(x, GenSymbol):
                g = self.canon(g + (x,))
                out.append(group_vertex(g))
            else:
                out.append(self.cone_vertex(x.factor, g))
                g = self.canon(g + self.image(x.factor, x.value))
                out.append(group_vertex(g))
        return out

    def sector(self, k: int, theta: int) -> list:
        """Sec_k(θ) by BFS around the cone vertex of P_k (identity included)."""
        f = self.pres.factor(k)
        c = self.cone_vertex(k, ())
        base = group_vertex(())
        dist = {base: 0}
        frontier = [base]
        reached = [base]
        for d in range(1, theta + 1):
            frontier = self._grow(frontier, dist, d, avoid=c)
            reached.extend(frontier)
        out = []
        for w in reached:
            if w[0] != "g" or self.cone_vertex(k, w[1]) != c:
                continue
            h = self.relative_value(k, self._reps[c], w[1])
            if h is not None and h not in out:
                out.append(h)
        return sorted(out, key=f.key)


# -- fragments -------------------------------------------------------------------------

@dataclass
class GraphFragment:
    vertices: list
    kinds: list
    names: list
    adjacency: list
    labels: dict
    base: int = 0
    radius: int = 0
    truncation: dict = field(default_factory=dict)
    truncated: bool = False
    depth: list = field(default_factory=list)

    def __post_init__(self):
        self.index = {v: i for i, v in enumerate(self.vertices)}

    def __len__(self):
        return len(self.vertices)

    def id_of(self, v) -> int:
        if isinstance(v, int):
            return v
        if v in self.index:
            return self.index[v]
        for i, n in enumerate(self.names):
            if n == v:
                return i
        raise ContractViolation(f"vertex {v!r} not in fragment")

    def edges(self) -> list:
        return sorted(self.labels.items())

    def label(self, i, j) -> str:
        if (i, j) in self.labels:
            return self.labels[(i, j)]
        return self.labels.get((j, i), "")

    def serialize(self) -> str:
        lines = [f"R {self.radius} {self.base} {int(self.truncated)}"]
        for i, (kind, name) in enumerate(zip(self.kinds, self.names)):
            lines.append(f"V {i} {kind} {name}")
        for (i, j), lab in self.edges():
            lines.append(f"E {i} {j} {lab}")
        for i, note in sorted(self.truncation.items()):
            lines.append(f"T {i} {note}")
        return "\n".join(lines) + "\n"


def parse_fragment(text: str) -> GraphFragment:
    kinds, names, labels, trunc = [], [], {}, {}
    radius = base = 0
    truncated = False
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(" ", 3)
        try:
            tag = parts[0]
            if tag == "R":
                radius, base, truncated = int(parts[1]), int(parts[2]), bool(int(parts[3]))
            elif tag == "V":
                if int(parts[1]) != len(kinds):
                    raise MalformedInput(f"line {lineno}: vertex ids must be consecutive")
                kinds.append(parts[2])
                names.append(parts[3] if len(parts) > 3 else "1")
            elif tag == "E":
                labels[(int(parts[1]), int(parts[2]))] = parts[3] if len(parts) > 3 else ""
            elif tag == "T":
                trunc[int(parts[1])] = " ".join(parts[2:])
            else:
                raise MalformedInput(f"line {lineno}: unknown record {tag!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, MalformedInput):
                raise
            raise MalformedInput(f"line {lineno}: bad record {line!r}") from None
    adj = [[] for _ in kinds]
    for (i, j) in labels:
        if not (0 <= i < len(kinds) and 0 <= j < len(kinds)):
            raise MalformedInput(f"edge {i}-{j} refers to a missing vertex")
        adj[i].append(j)
        adj[j].append(i)
    for a in adj:
        a.sort()
    vertices = [(k, n) for k, n in zip(kinds, names)]
    frag = GraphFragment(vertices, kinds, names, adj, labels, base, radius, trunc, truncated)
    frag.depth = _bfs(frag.adjacency, frag.base)
    return frag


def _bfs(adj, src, avoid=None, cutoff=None) -> list:
    dist = [INF] * len(adj)
    if src == avoid:
        return dist
    dist[src] = 0
    q = deque([src])
    while q:
        a = q.popleft()
        if cutoff is not None and dist[a] >= cutoff:
            continue
        for b in adj[a]:
            if b != avoid and dist[b] == INF:
                dist[b] = dist[a] + 1
                q.append(b)
    return dist


def explore(model: ConedGraph, radius: int, base=(), max_vertices: int | None = None) -> GraphFragment:
    """All vertices within ``radius`` of ``base`` and the edges among them.

    Deterministic BFS.  Cone stars are truncated to ``model.cone_radius``;
    each cone vertex with a truncated star gets a truncation record.  When
    ``max_vertices`` is hit, the partial fragment is flagged truncated.
    """
    if radius < 0:
        raise MalformedInput("radius must be >= 0")
    start = model.vertex(base)
    order = [start]
    dist = {start: 0}
    # truncated stars are centered where BFS first meets the cone vertex,
    # which keeps fragments translation-equivariant
    center = {}
    truncated = False
    q = deque([start])
    while q:
        v = q.popleft()
        if dist[v] >= radius:
            continue
        nbrs = model.neighbors(v) if v[0] == "g" else model.cone_star(v, center[v])
        for u, _ in nbrs:
            if u[0] == "c":
                center.setdefault(u, v[1])
            if u not in dist:
                if max_vertices is not None and len(order) >= max_vertices:
                    truncated = True
                    break
                dist[u] = dist[v] + 1
                order.append(u)
                q.append(u)
    index = {v: i for i, v in enumerate(order)}
    labels = {}
    adj = [set() for _ in order]
    for v in order:
        i = index[v]
        if v[0] == "c":
            continue  # cone edges are all seen from the group side
        for u, lab in model.neighbors(v):
            j = index.get(u)
            if j is None or j == i:
                continue
            if (j, i) in labels:
                continue
            if (i, j) not in labels:
                # Cayley labels read from the lower id; cone labels name the coset element
                if v[0] == "g" and u[0] == "g" and i > j:
                    continue
                labels[(i, j)] = lab
            adj[i].add(j)
            adj[j].add(i)
    trunc = {}
    for v in order:
        if v[0] == "c" and model.star_is_truncated(v[1]):
            trunc[index[v]] = f"star radius {model.cone_radius}"
    kinds = ["g" if v[0] == "g" else f"c:{model.pres.factor(v[1]).name}" for v in order]
    names = [word_str(v[1]) if v[0] == "g" else word_str(model.rep(v)) for v in order]
    frag = GraphFragment(order, kinds, names, [sorted(a) for a in adj], labels, 0, radius,
                         trunc, truncated)
    frag.depth = [dist[v] for v in order]
    return frag


# -- fragment queries -------------------------------------------------------------------------

def angle(frag: GraphFragment, v, u1, u2, cutoff: int) -> float:
    """Distance between u1 and u2 in the fragment minus v, ∞ beyond ``cutoff``."""
    v, u1, u2 = frag.id_of(v), frag.id_of(u1), frag.id_of(u2)
    for u in (u1, u2):
        if u not in frag.adjacency[v]:
            raise ContractViolation(f"vertex {frag.names[u]} is not adjacent to {frag.names[v]}")
    if u1 == u2:
        return 0
    d = _bfs(frag.adjacency, u1, avoid=v, cutoff=cutoff)[u2]
    return d if d <= cutoff else INF


def cone(frag: GraphFragment, e, rho: int, theta: int) -> list:
    """Vertices reached by paths of length <= ρ starting with oriented edge e
    whose consecutive edges make angles <= θ (sorted vertex ids)."""
    a, b = frag.id_of(e[0]), frag.id_of(e[1])
    if b not in frag.adjacency[a]:
        raise ContractViolation("cone: e is not an edge of the fragment")
    needed = frag.depth[a] + rho + theta + 1
    if rho > 1 and frag.radius < needed:
        raise InsufficientExploration(needed, frag.radius, "cone")
    if rho <= 0:
        return [a]
    reached = {a, b}
    seen = {(a, b)}
    frontier = [(a, b)]
    angle_cache = {}
    for _ in range(rho - 1):
        nxt = []
        for prev, cur in frontier:
            for w in frag.adjacency[cur]:
                key = (cur, prev, w)
                if key not in angle_cache:
                    angle_cache[key] = 0 if w == prev else angle(frag, cur, prev, w, theta)
                if angle_cache[key] <= theta and (cur, w) not in seen:
                    seen.add((cur, w))
                    reached.add(w)
                    nxt.append((cur, w))
        frontier = nxt
    return sorted(reached)


def sector(frag: GraphFragment, k_name: str, theta: int) -> list:
    """Labels h of the cone edges at the base's cone vertex for parabolic
    ``k_name`` whose angle to the edge towards the base is <= θ."""
    kind = f"c:{k_name}"
    c = None
    for j in frag.adjacency[frag.base]:
        if frag.kinds[j] == kind:
            c = j
            break
    if c is None:
        raise ContractViolation(f"no cone vertex for {k_name} at the basepoint")
    if frag.radius < theta + 1:
        raise InsufficientExploration(theta + 1, frag.radius, "sector")
    dist = _bfs(frag.adjacency, frag.base, avoid=c, cutoff=theta)
    out = []
    for u in frag.adjacency[c]:
        if dist[u] <= theta:
            out.append(frag.label(c, u))
    return sorted(set(out))


def sector_from_loops(pres, k: int, theta: int, loops) -> list:
    """Sec_k(θ) from a list of simple loops (cyclic words over X and parabolic letters).

    A loop through the cone vertex of P_k crosses it via a letter h of H_k;
    the rest of the loop is a path avoiding that vertex between the edges to
    1 and h.  Its length counts free letters once and parabolic letters twice.
    """
    f = pres.factor(k)
    out = {f.identity()}
    for loop in loops:
        loop = tuple(loop)
        n = len(loop)
        for i, x in enumerate(loop):
            if isinstance(x, ParLetter) and x.factor == k:
                rest = loop[i + 1:] + loop[:i]
                length = sum(1 if isinstance(y, GenSymbol) else 2 for y in rest)
                if n > 0 and length <= theta:
                    out.add(x.value)
                    out.add(f.inv(x.value))
    return sorted(out, key=f.key)


def distance(frag: GraphFragment, u, v) -> Distance:
    """BFS distance inside the fragment.  Unreachable pairs give a flagged
    lower bound (two vertices the fragment cannot connect are at least as far
    apart as the fragment's depth allows)."""
    u, v = frag.id_of(u), frag.id_of(v)
    d = _bfs(frag.adjacency, u)[v]
    if d == INF:
        return Distance(max(1, abs(frag.depth[u] - frag.depth[v])), False)
    # a shorter path would stay inside the explored ball
    exact = min(frag.depth[u], frag.depth[v]) + d <= frag.radius and not frag.truncation
    return Distance(d, exact)


def path_of(model: ConedGraph, a, frag: GraphFragment | None = None) -> list:
    """Vertices of the path 𝔭(a) for an FPElement ``a``.

    With a fragment, returns fragment ids and raises if the path leaves it.
    """
    letters = model.pres.fp.long_normal_form(a)
    verts = model.path_of(letters)
    if frag is None:
        return verts
    missing = [v for v in verts if v not in frag.index]
    if missing:
        need = path_length(letters)
        raise InsufficientExploration(need, frag.radius, "path")
    return [frag.index[v] for v in verts]


def path_length(letters) -> int:
    return sum(1 if isinstance(x, GenSymbol) else 2 for x in letters)
