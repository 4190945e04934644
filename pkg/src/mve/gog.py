"""Graphs of groups over a fixed small catalogue of group kinds.

Vertex groups are restricted to the trivial group, Z, Z^2, and the
Klein bottle group BS(1,-1); edge groups to the trivial group and Z.
That is all the certification pipeline ever produces, and restricting
the catalogue keeps collapse rules and presentations exact.

Injections of an edge group into an endpoint group are stored as plain
integer data: an exponent into Z, an exponent pair into Z^2 (basis a,
u), and a normal-form pair (m, n) meaning a^m t^n into BS(1,-1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import (
    InvalidGraphOfGroups,
    NotATree,
    NotCollapsible,
    UnknownVertex,
)
from .verdicts import (
    THEOREM_SHAPE,
    UNKNOWN,
    UNSUPPORTED,
    VANISHING,
    Verdict,
)

TRIVIAL = "Trivial"
Z = "Z"
Z2 = "Z2"
BS11 = "BS11"

VERTEX_KINDS = (TRIVIAL, Z, Z2, BS11)
EDGE_KINDS = (TRIVIAL, Z)


def _bs11_power(m: int, n: int, k: int) -> tuple[int, int]:
    """k-th power of a^m t^n in BS(1,-1), by the closed form.

    For even n the element is central enough to behave like a lattice
    point; for odd n the a-part cancels on even powers.
    """
    if n % 2 == 0:
        return (k * m, k * n)
    return (0 if k % 2 == 0 else m, k * n)


@dataclass(frozen=True)
class EdgeInjection:
    """Injection of an edge group into a vertex group of target_kind.

    ``data`` is None for a trivial edge group, a nonzero integer for
    Z -> Z, and a nonzero integer pair for Z -> Z2 or Z -> BS11.
    """

    target_kind: str
    data: int | tuple[int, int] | None

    def __post_init__(self) -> None:
        if self.target_kind not in VERTEX_KINDS:
            raise InvalidGraphOfGroups(f"unknown vertex kind {self.target_kind!r}")
        data = self.data
        if isinstance(data, list):
            data = tuple(data)
            object.__setattr__(self, "data", data)
        if data is None:
            return
        if isinstance(data, bool):
            raise InvalidGraphOfGroups("injection datum must be an integer")
        if isinstance(data, int):
            if self.target_kind != Z:
                raise InvalidGraphOfGroups(
                    f"integer injection datum requires a Z target, got {self.target_kind}"
                )
            if data == 0:
                raise InvalidGraphOfGroups("Z -> Z injection datum must be nonzero")
            return
        if isinstance(data, tuple):
            if (
                len(data) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in data)
            ):
                raise InvalidGraphOfGroups(f"bad injection datum {data!r}")
            if self.target_kind not in (Z2, BS11):
                raise InvalidGraphOfGroups(
                    f"pair injection datum requires a Z2 or BS11 target, got {self.target_kind}"
                )
            if data == (0, 0):
                raise InvalidGraphOfGroups("injection datum must be nontrivial")
            return
        raise InvalidGraphOfGroups(f"bad injection datum {data!r}")

    @property
    def trivial(self) -> bool:
        return self.data is None

    def is_isomorphism(self, vertex_kind: str) -> bool:
        """Whether the injection is onto the whole vertex group."""
        if self.data is None:
            return vertex_kind == TRIVIAL
        if isinstance(self.data, int):
            return vertex_kind == Z and self.data in (1, -1)
        return False

    def power(self, k: int) -> "EdgeInjection":
        """Injection sending the edge generator to the k-th power of its image."""
        if k == 0:
            raise InvalidGraphOfGroups("zero power would destroy injectivity")
        if self.data is None:
            return self
        if isinstance(self.data, int):
            return EdgeInjection(self.target_kind, k * self.data)
        if self.target_kind == Z2:
            return EdgeInjection(self.target_kind, (k * self.data[0], k * self.data[1]))
        return EdgeInjection(self.target_kind, _bs11_power(self.data[0], self.data[1], k))

    def relator_word(self, gen_indices: tuple[int, ...]) -> tuple[int, ...]:
        """Spell the image as signed generator indices of the target group."""
        if self.data is None:
            return ()
        if isinstance(self.data, int):
            g = gen_indices[0]
            return (g if self.data > 0 else -g,) * abs(self.data)
        a, b = gen_indices
        first, second = self.data
        word = (a if first > 0 else -a,) * abs(first)
        word += (b if second > 0 else -b,) * abs(second)
        return word

    def data_json(self) -> int | list[int] | None:
        if isinstance(self.data, tuple):
            return list(self.data)
        return self.data


@dataclass(frozen=True)
class GogEdge:
    eid: str
    src: str
    dst: str
    kind: str
    inj_src: EdgeInjection
    inj_dst: EdgeInjection


@dataclass(frozen=True)
class GraphOfGroups:
    """Connected graph with vertex kinds and edge injections.

    ``vertices`` is a tuple of (id, kind) pairs; edge records carry one
    chosen orientation per edge pair, with the reversed edge implied.
    """

    vertices: tuple[tuple[str, str], ...]
    edges: tuple[GogEdge, ...]

    def __post_init__(self) -> None:
        if not self.vertices:
            raise InvalidGraphOfGroups("a graph of groups needs at least one vertex")
        object.__setattr__(self, "vertices", tuple((v, k) for v, k in self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        ids = [v for v, _ in self.vertices]
        if len(set(ids)) != len(ids):
            raise InvalidGraphOfGroups("duplicate vertex ids")
        for v, kind in self.vertices:
            if kind not in VERTEX_KINDS:
                raise InvalidGraphOfGroups(f"unknown vertex kind {kind!r} at {v!r}")
        kind_of = dict(self.vertices)
        eids = [e.eid for e in self.edges]
        if len(set(eids)) != len(eids):
            raise InvalidGraphOfGroups("duplicate edge ids")
        for e in self.edges:
            for v in (e.src, e.dst):
                if v not in kind_of:
                    raise UnknownVertex(f"edge {e.eid!r} references unknown vertex {v!r}")
            if e.kind not in EDGE_KINDS:
                raise InvalidGraphOfGroups(f"edge {e.eid!r} has unsupported kind {e.kind!r}")
            if e.inj_src.target_kind != kind_of[e.src] or e.inj_dst.target_kind != kind_of[e.dst]:
                raise InvalidGraphOfGroups(f"edge {e.eid!r} injection targets mismatch endpoints")
            want_trivial = e.kind == TRIVIAL
            if (e.inj_src.trivial != want_trivial) or (e.inj_dst.trivial != want_trivial):
                raise InvalidGraphOfGroups(
                    f"edge {e.eid!r} injections do not match its {e.kind} edge group"
                )
        seen = {ids[0]}
        frontier = [ids[0]]
        adjacent: dict[str, list[str]] = {v: [] for v in ids}
        for e in self.edges:
            adjacent[e.src].append(e.dst)
            adjacent[e.dst].append(e.src)
        while frontier:
            v = frontier.pop()
            for w in adjacent[v]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        if len(seen) != len(ids):
            raise InvalidGraphOfGroups("graph of groups must be connected")

    @cached_property
    def kind_of(self) -> dict[str, str]:
        return dict(self.vertices)

    def edge(self, eid: str) -> GogEdge:
        for e in self.edges:
            if e.eid == eid:
                return e
        raise InvalidGraphOfGroups(f"no edge with id {eid!r}")

    def to_json(self) -> dict:
        return {
            "vertices": [{"id": v, "kind": k} for v, k in self.vertices],
            "edges": [
                {
                    "id": e.eid,
                    "from": e.src,
                    "to": e.dst,
                    "kind": e.kind,
                    "inj_from": e.inj_src.data_json(),
                    "inj_to": e.inj_dst.data_json(),
                }
                for e in self.edges
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GraphOfGroups":
        vertices = tuple((str(v["id"]), str(v["kind"])) for v in obj["vertices"])
        kind_of = dict(vertices)
        edges = []
        for rec in obj.get("edges", ()):
            src, dst = str(rec["from"]), str(rec["to"])
            if src not in kind_of or dst not in kind_of:
                raise UnknownVertex(f"edge {rec.get('id')!r} references an unknown vertex")
            edges.append(
                GogEdge(
                    str(rec["id"]),
                    src,
                    dst,
                    str(rec["kind"]),
                    EdgeInjection(kind_of[src], _datum_from_json(rec.get("inj_from"))),
                    EdgeInjection(kind_of[dst], _datum_from_json(rec.get("inj_to"))),
                )
            )
        return cls(vertices, tuple(edges))


def _datum_from_json(raw) -> int | tuple[int, int] | None:
    if raw is None:
        return None
    if isinstance(raw, list):
        return tuple(int(x) for x in raw)
    return int(raw)


def _collapse_side(g: GraphOfGroups, e: GogEdge) -> tuple[str, str, int, EdgeInjection] | None:
    """(removed, survivor, iso multiplier, injection into survivor) or None."""
    kinds = g.kind_of
    if e.inj_src.is_isomorphism(kinds[e.src]):
        m0 = e.inj_src.data if isinstance(e.inj_src.data, int) else 1
        return e.src, e.dst, m0, e.inj_dst
    if e.inj_dst.is_isomorphism(kinds[e.dst]):
        m0 = e.inj_dst.data if isinstance(e.inj_dst.data, int) else 1
        return e.dst, e.src, m0, e.inj_src
    return None


def collapse(g: GraphOfGroups, eid: str) -> GraphOfGroups:
    """Collapse an edge whose injection on one side is an isomorphism.

    The vertex on the isomorphic side is absorbed into the other
    endpoint; every other injection into the removed vertex is
    recomposed through the isomorphism and the surviving injection.
    """
    e0 = g.edge(eid)
    if e0.src == e0.dst:
        raise NotCollapsible(f"edge {eid!r} is a loop")
    side = _collapse_side(g, e0)
    if side is None:
        raise NotCollapsible(f"neither injection of edge {eid!r} is onto its vertex group")
    removed, survivor, m0, surviving_inj = side

    def retarget(inj: EdgeInjection, at: str) -> tuple[EdgeInjection, str]:
        if at != removed:
            return inj, at
        if inj.data is None:
            return EdgeInjection(g.kind_of[survivor], None), survivor
        return surviving_inj.power(m0 * inj.data), survivor

    new_edges = []
    for e in g.edges:
        if e.eid == eid:
            continue
        inj_src, src = retarget(e.inj_src, e.src)
        inj_dst, dst = retarget(e.inj_dst, e.dst)
        new_edges.append(GogEdge(e.eid, src, dst, e.kind, inj_src, inj_dst))
    new_vertices = tuple((v, k) for v, k in g.vertices if v != removed)
    return GraphOfGroups(new_vertices, tuple(new_edges))


def euler_characteristic(g: GraphOfGroups) -> int:
    """chi = sum over vertices minus sum over edge pairs; only the
    trivial group contributes (chi = 1), all others are aspherical
    with chi = 0."""
    chi_v = sum(1 for _, k in g.vertices if k == TRIVIAL)
    chi_e = sum(1 for e in g.edges if e.kind == TRIVIAL)
    return chi_v - chi_e


def reduce_gog(g: GraphOfGroups, check_invariants: bool = True) -> GraphOfGroups:
    """Collapse collapsible edges (lowest edge id first) until none remain.

    With ``check_invariants`` every step is audited: the abelianization
    of the induced presentation and the Euler characteristic must both
    survive the collapse unchanged.
    """
    current = g
    while True:
        candidates = [
            e.eid
            for e in current.edges
            if e.src != e.dst and _collapse_side(current, e) is not None
        ]
        if not candidates:
            return current
        target = min(candidates)
        before = None
        if check_invariants:
            before = (abelianization(presentation(current)), euler_characteristic(current))
        current = collapse(current, target)
        if check_invariants:
            after = (abelianization(presentation(current)), euler_characteristic(current))
            if after != before:
                raise InvalidGraphOfGroups(
                    f"collapse of {target!r} changed invariants {before} -> {after}"
                )


def spanning_tree(g: GraphOfGroups) -> frozenset[str]:
    """Edge ids of a breadth-first spanning tree (lowest ids preferred)."""
    adjacent: dict[str, list[tuple[str, str]]] = {v: [] for v, _ in g.vertices}
    for e in sorted(g.edges, key=lambda e: e.eid):
        adjacent[e.src].append((e.eid, e.dst))
        adjacent[e.dst].append((e.eid, e.src))
    root = g.vertices[0][0]
    seen = {root}
    tree: set[str] = set()
    queue = [root]
    while queue:
        v = queue.pop(0)
        for eid, w in adjacent[v]:
            if w not in seen:
                seen.add(w)
                tree.add(eid)
                queue.append(w)
    return frozenset(tree)


@dataclass(frozen=True)
class Presentation:
    """Finite presentation: generator names plus relators as tuples of
    signed 1-based generator indices."""

    generators: tuple[str, ...]
    relators: tuple[tuple[int, ...], ...]

    def relator_text(self, relator: tuple[int, ...]) -> str:
        parts = []
        for x in relator:
            name = self.generators[abs(x) - 1]
            parts.append(name if x > 0 else name + "-")
        return " ".join(parts)


_VERTEX_GENERATORS = {
    TRIVIAL: (),
    Z: ("g",),
    Z2: ("a", "u"),
    BS11: ("a", "t"),
}


def presentation(g: GraphOfGroups, tree_ids: frozenset[str] | None = None) -> Presentation:
    """Presentation of the fundamental group relative to a spanning tree.

    Stable letters of tree edges are eliminated (set to 1); every
    non-tree edge contributes one stable letter x conjugating the
    src-side injection to the dst-side injection.
    """
    if tree_ids is None:
        tree_ids = spanning_tree(g)
    tree_ids = frozenset(tree_ids)
    all_ids = {e.eid for e in g.edges}
    if not tree_ids <= all_ids:
        raise NotATree(f"unknown edge ids in tree: {sorted(tree_ids - all_ids)}")
    if len(tree_ids) != len(g.vertices) - 1:
        raise NotATree("spanning tree must have |V| - 1 edges")
    reached = {g.vertices[0][0]}
    remaining = [e for e in g.edges if e.eid in tree_ids]
    while remaining:
        progress = False
        for e in list(remaining):
            if e.src in reached and e.dst in reached:
                raise NotATree(f"tree edge {e.eid!r} closes a cycle")
            if e.src in reached or e.dst in reached:
                reached.update((e.src, e.dst))
                remaining.remove(e)
                progress = True
        if not progress:
            raise NotATree("tree edges do not connect the graph")
    if len(reached) != len(g.vertices):
        raise NotATree("tree edges do not span the graph")

    names: list[str] = []
    vertex_gens: dict[str, tuple[int, ...]] = {}
    relators: list[tuple[int, ...]] = []
    for vid, kind in g.vertices:
        indices = []
        for stem in _VERTEX_GENERATORS[kind]:
            names.append(f"{stem}_{vid}")
            indices.append(len(names))
        vertex_gens[vid] = tuple(indices)
        if kind == Z2:
            a, u = indices
            relators.append((a, u, -a, -u))
        elif kind == BS11:
            a, t = indices
            relators.append((t, a, -t, a))
    stable: dict[str, int] = {}
    for e in g.edges:
        if e.eid not in tree_ids:
            names.append(f"x_{e.eid}")
            stable[e.eid] = len(names)
    for e in g.edges:
        if e.kind == TRIVIAL:
            continue
        w_src = e.inj_src.relator_word(vertex_gens[e.src])
        w_dst = e.inj_dst.relator_word(vertex_gens[e.dst])
        w_dst_inv = tuple(-x for x in reversed(w_dst))
        if e.eid in tree_ids:
            relators.append(w_src + w_dst_inv)
        else:
            x = stable[e.eid]
            relators.append((x,) + w_src + (-x,) + w_dst_inv)
    return Presentation(tuple(names), tuple(relators))


def _smith_diagonal(rows: list[list[int]]) -> list[int]:
    """Diagonal of the Smith normal form (positive, divisibility chain)."""
    mat = [list(r) for r in rows]
    m = len(mat)
    n = len(mat[0]) if m else 0
    diag: list[int] = []
    r0 = 0
    c0 = 0
    while r0 < m and c0 < n:
        best: tuple[int, int] | None = None
        for i in range(r0, m):
            for j in range(c0, n):
                if mat[i][j] != 0 and (
                    best is None or abs(mat[i][j]) < abs(mat[best[0]][best[1]])
                ):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        mat[r0], mat[bi] = mat[bi], mat[r0]
        for row in mat:
            row[c0], row[bj] = row[bj], row[c0]
        if mat[r0][c0] < 0:
            mat[r0] = [-x for x in mat[r0]]
        pivot = mat[r0][c0]
        dirty = False
        for i in range(r0 + 1, m):
            q = mat[i][c0] // pivot
            if q:
                mat[i] = [a - q * b for a, b in zip(mat[i], mat[r0])]
            if mat[i][c0] != 0:
                dirty = True
        for j in range(c0 + 1, n):
            q = mat[r0][j] // pivot
            if q:
                for i in range(m):
                    mat[i][j] -= q * mat[i][c0]
            if mat[r0][j] != 0:
                dirty = True
        if dirty:
            continue
        offender = next(
            (
                i
                for i in range(r0 + 1, m)
                for j in range(c0 + 1, n)
                if mat[i][j] % pivot != 0
            ),
            None,
        )
        if offender is not None:
            mat[r0] = [a + b for a, b in zip(mat[r0], mat[offender])]
            continue
        diag.append(pivot)
        r0 += 1
        c0 += 1
    return diag


def abelianization(p: Presentation) -> tuple[tuple[int, ...], int]:
    """(elementary divisors > 1, free rank) of the abelianized group."""
    n = len(p.generators)
    rows = []
    for rel in p.relators:
        row = [0] * n
        for x in rel:
            row[abs(x) - 1] += 1 if x > 0 else -1
        rows.append(row)
    diag = _smith_diagonal(rows) if rows else []
    divisors = tuple(d for d in diag if d > 1)
    return divisors, n - len(diag)


def shape_verdict(g: GraphOfGroups) -> Verdict:
    """Vanishing verdict for decompositions matching the 2-dimensional
    catalogue: after reduction, every vertex group in {Z, Z2, BS11} and
    some vertex group in {Z2, BS11}."""
    reduced = reduce_gog(g, check_invariants=False)
    vertex_kinds = {v: k for v, k in reduced.vertices}
    edge_kinds = {e.eid: e.kind for e in reduced.edges}
    certificate = {"vertex_kinds": vertex_kinds, "edge_kinds": edge_kinds}
    if TRIVIAL in vertex_kinds.values():
        return Verdict(
            UNSUPPORTED,
            0.0,
            certificate,
            THEOREM_SHAPE,
            note="a trivial vertex group survives reduction; outside the catalogue",
        )
    if any(k in (Z2, BS11) for k in vertex_kinds.values()):
        return Verdict(VANISHING, 0.0, certificate, THEOREM_SHAPE)
    return Verdict(
        UNKNOWN,
        0.0,
        certificate,
        THEOREM_SHAPE,
        note="verify gdim(G) = 2 manually",
    )


def propagate_bound(n: int, m: int, bound: float, direction: str = "index") -> float:
    """Push a lower bound through an index-n subgroup or a degree-n map:
    bound * n^(-1/m)."""
    if n < 1 or m < 1:
        raise ValueError(f"n and m must be positive, got n={n}, m={m}")
    if bound < 0:
        raise ValueError(f"bound must be nonnegative, got {bound}")
    if direction not in ("index", "monotone"):
        raise ValueError(f"unknown direction {direction!r}")
    return bound * n ** (-1.0 / m)


def tree_tubular_decomposition(
    vertices: tuple[str, ...], edges: tuple[tuple[str, str], ...]
) -> GraphOfGroups:
    """Subdivision decomposition of the right-angled Artin group of a forest.

    Each forest edge becomes a Z^2 vertex (the span of its two
    generators), joined to its endpoints' Z vertices by isomorphic-on-
    the-Z-side edges; components are joined by trivial edges so the
    result is a single connected graph of groups.
    """
    from .errors import InvalidGraph

    vertices = tuple(vertices)
    if not vertices:
        raise InvalidGraph("the forest needs at least one vertex")
    if len(set(vertices)) != len(vertices):
        raise InvalidGraph("duplicate vertex labels")
    parent = {v: v for v in vertices}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    gog_vertices: list[tuple[str, str]] = [(v, Z) for v in vertices]
    gog_edges: list[GogEdge] = []
    for i, (u, v) in enumerate(edges):
        if u not in parent or v not in parent:
            raise InvalidGraph(f"edge ({u!r}, {v!r}) references an unknown vertex")
        if u == v or find(u) == find(v):
            raise InvalidGraph("edge set is not a forest")
        parent[find(u)] = find(v)
        mid = f"[{u}|{v}]"
        gog_vertices.append((mid, Z2))
        gog_edges.append(
            GogEdge(
                f"s{2 * i + 1}",
                mid,
                u,
                Z,
                EdgeInjection(Z2, (1, 0)),
                EdgeInjection(Z, 1),
            )
        )
        gog_edges.append(
            GogEdge(
                f"s{2 * i + 2}",
                mid,
                v,
                Z,
                EdgeInjection(Z2, (0, 1)),
                EdgeInjection(Z, 1),
            )
        )
    roots = []
    seen_roots = set()
    for v in vertices:
        r = find(v)
        if r not in seen_roots:
            seen_roots.add(r)
            roots.append(v)
    for i in range(1, len(roots)):
        kind_prev = Z
        gog_edges.append(
            GogEdge(
                f"c{i}",
                roots[i - 1],
                roots[i],
                TRIVIAL,
                EdgeInjection(kind_prev, None),
                EdgeInjection(Z, None),
            )
        )
    return GraphOfGroups(tuple(gog_vertices), tuple(gog_edges))
