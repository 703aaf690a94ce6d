"""Skeleton graphs: one vertex per star, one edge per pasted slit.

An edge with foot c between u and v records that the upper side of the slit
at c in the star of u is pasted to the lower side of the slit at c in the
star of v (``u_side == "+"``), or the other way round.  With the monodromy
convention used here the edge for sheet v and critical value c is
``e_c(v, +) = e_c(sigma_c(v), -)``.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import NamedTuple

import networkx as nx

from .errors import GenericityViolation, InconsistentSides, RadiusTooSmall
from .lifting import RamPoint, choose_generic_basevalue, genericity_gap, monodromy, _config_scale
from .numerics import as_complex

PLUS, MINUS = "+", "-"
GENERICITY_RTOL = 1e-7
FOOT_RTOL = 1e-9


def _opposite(side: str) -> str:
    return MINUS if side == PLUS else PLUS


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    foot: complex
    u_side: str = PLUS
    v_side: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "foot", complex(self.foot))
        if self.v_side is None:
            object.__setattr__(self, "v_side", _opposite(self.u_side))

    def side_at(self, x: int) -> str:
        return self.u_side if x == self.u else self.v_side

    def other(self, x: int) -> int:
        return self.v if x == self.u else self.u

    @property
    def plus_vertex(self) -> int:
        return self.u if self.u_side == PLUS else self.v

    @property
    def minus_vertex(self) -> int:
        return self.v if self.u_side == PLUS else self.u


@dataclass(frozen=True)
class Skeleton:
    vertices: tuple
    base: int
    edges: tuple
    z0: complex
    radius: float = math.inf
    boundary: frozenset = frozenset()
    locations: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "z0", complex(self.z0))
        object.__setattr__(self, "boundary", frozenset(self.boundary))

    @property
    def feet(self) -> list[complex]:
        return _distinct_feet([e.foot for e in self.edges])

    def incident(self) -> dict:
        out = defaultdict(list)
        for e in self.edges:
            out[e.u].append(e)
            if e.v != e.u:
                out[e.v].append(e)
        return out

    def graph(self) -> nx.MultiGraph:
        G = nx.MultiGraph()
        G.add_nodes_from(self.vertices)
        for i, e in enumerate(self.edges):
            G.add_edge(e.u, e.v, key=i, foot=e.foot, u_side=e.u_side)
        return G

    def distances(self) -> dict:
        return nx.single_source_shortest_path_length(self.graph(), self.base)


@dataclass(frozen=True)
class CompletedSkeleton:
    """Skeleton with every finite-order cycle replaced by a hub and spokes."""

    skeleton: Skeleton
    hubs: dict
    spokes: tuple

    @property
    def vertices(self) -> tuple:
        return self.skeleton.vertices + tuple(self.hubs)

    @property
    def edges(self) -> tuple:
        return self.skeleton.edges

    def graph(self) -> nx.MultiGraph:
        G = self.skeleton.graph()
        G.add_nodes_from(self.hubs)
        for h, v in self.spokes:
            G.add_edge(h, v, spoke=True)
        return G


class Violation(NamedTuple):
    axiom: int
    subject: object
    witness: object


def _foot_key(z: complex, tol: float = FOOT_RTOL):
    scale = tol * (1 + abs(z))
    return (round(z.real / scale), round(z.imag / scale)) if scale > 0 else (z.real, z.imag)


def _distinct_feet(feet) -> list[complex]:
    out: list[complex] = []
    for z in feet:
        if not any(abs(z - w) <= FOOT_RTOL * (1 + abs(w)) for w in out):
            out.append(complex(z))
    return out


def _same_foot(a: complex, b: complex, tol: float = FOOT_RTOL) -> bool:
    return abs(a - b) <= tol * (1 + abs(b))


def _canonical_foot(feet: list[complex], z: complex) -> complex:
    for w in feet:
        if _same_foot(z, w):
            return w
    return z


# ---------------------------------------------------------------------------
# construction


def skeleton_build(f, z0: complex | None, radius: int, seed: int = 0) -> Skeleton:
    """Skeleton of the surface of f materialized to graph distance ``radius``."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    singular = f.singular_values()
    values = [sv.value for sv in singular]
    if z0 is None:
        z0 = choose_generic_basevalue(values, seed=seed)
    z0 = complex(z0)
    gap = genericity_gap(z0, values)
    if gap <= GENERICITY_RTOL * _config_scale(values + [z0]):
        raise GenericityViolation(f"z0={z0} lies within {gap:.3g} of a singular value or a line through two")
    table = monodromy(f, z0, radius, singular)
    edges = []
    for k, c in enumerate(table.critical_values):
        for v, w in sorted(table.perms[k].items()):
            if v != w:
                edges.append(Edge(v, w, c, PLUS))
    if table.complete:
        rad, boundary = math.inf, frozenset()
    else:
        rad = radius
        boundary = frozenset(v for v, d in table.depth.items() if d == radius)
    verts = tuple(sorted(table.sheets))
    return Skeleton(verts, table.base, tuple(edges), z0, rad, boundary, dict(table.sheets))


# ---------------------------------------------------------------------------
# axioms


def validate_graph(g: Skeleton) -> list[Violation]:
    """Violations of discreteness, two-sided slits, and opposite pasting."""
    out: list[Violation] = []
    verts = set(g.vertices)
    bad3 = set()
    for i, e in enumerate(g.edges):
        if not (math.isfinite(e.foot.real) and math.isfinite(e.foot.imag)):
            out.append(Violation(1, e, "foot is not a finite point"))
        if e.u not in verts or e.v not in verts:
            out.append(Violation(3, e, "edge endpoint is not a vertex"))
            bad3.add(i)
        elif {e.u_side, e.v_side} != {PLUS, MINUS}:
            out.append(Violation(3, e, f"sides {e.u_side}{e.v_side} are not opposite"))
            bad3.add(i)
    feet = g.feet
    for i, a in enumerate(feet):
        for b in feet[i + 1:]:
            if abs(a - b) <= 1e-6 * (1 + abs(a)):
                out.append(Violation(1, a, b))
    slots: dict = defaultdict(list)
    for i, e in enumerate(g.edges):
        c = _canonical_foot(feet, e.foot)
        slots[(e.u, c)].append((i, e.u_side))
        slots[(e.v, c)].append((i, e.v_side))
    for (v, c), items in sorted(slots.items(), key=lambda kv: (str(kv[0][0]), kv[0][1].real, kv[0][1].imag)):
        if v in g.boundary:
            continue
        labels = sorted(s for _, s in items)
        if len(items) != 2:
            out.append(Violation(2, v, c))
        elif labels != [PLUS, MINUS] and not any(i in bad3 for i, _ in items):
            out.append(Violation(2, v, c))
    return out


# ---------------------------------------------------------------------------
# ramification cycles


def _side_maps(g: Skeleton):
    """(plus, minus): (vertex, foot) -> edge index with that side at vertex."""
    feet = g.feet
    plus, minus = {}, {}
    for i, e in enumerate(g.edges):
        if {e.u_side, e.v_side} != {PLUS, MINUS}:
            raise InconsistentSides(f"edge {e} pastes equal sides")
        c = _canonical_foot(feet, e.foot)
        for key, table in (((e.plus_vertex, c), plus), ((e.minus_vertex, c), minus)):
            if key in table:
                raise InconsistentSides(f"two edges share the label e_{c}({key[0]}, side)")
            table[key] = i
    return plus, minus, feet


def ram_cycles(g: Skeleton) -> list[RamPoint]:
    """Maximal constant-foot chains linked by the side labels."""
    plus, minus, feet = _side_maps(g)
    used = set()
    out = []

    def chain_from(i):
        e = g.edges[i]
        c = _canonical_foot(feet, e.foot)
        seq = [i]
        while True:
            nxt = plus.get((g.edges[seq[-1]].minus_vertex, c))
            if nxt is None or nxt == i:
                return seq, nxt == i
            if nxt in seq:
                raise InconsistentSides(f"chain at foot {c} revisits edge {g.edges[nxt]}")
            seq.append(nxt)

    # open chains start at an edge whose + vertex has no - edge
    for i, e in enumerate(g.edges):
        c = _canonical_foot(feet, e.foot)
        if i in used or (e.plus_vertex, c) in minus:
            continue
        seq, closed = chain_from(i)
        used.update(seq)
        out.append(RamPoint(c, math.inf, tuple(g.edges[j] for j in seq),
                            order_is_lower_bound=math.isfinite(g.radius)))
    for i, e in enumerate(g.edges):
        if i in used:
            continue
        seq, closed = chain_from(i)
        if not closed:
            raise InconsistentSides(f"edge {e} is on neither a cycle nor an open chain")
        used.update(seq)
        out.append(RamPoint(_canonical_foot(feet, e.foot), len(seq), tuple(g.edges[j] for j in seq)))
    return out


def finite_completion(g: Skeleton) -> CompletedSkeleton:
    """Remove each finite cycle and join its vertices to a new hub vertex."""
    rams = ram_cycles(g)
    drop = set()
    hubs = {}
    spokes = []
    next_id = max([v for v in g.vertices if isinstance(v, int)], default=-1) + 1
    for r in rams:
        if not r.is_finite:
            continue
        hub = next_id
        next_id += 1
        hubs[hub] = r
        cycle_verts = []
        for e in r.edge_cycle:
            drop.add(e)
            if e.plus_vertex not in cycle_verts:
                cycle_verts.append(e.plus_vertex)
        spokes.extend((hub, v) for v in cycle_verts)
    kept = tuple(e for e in g.edges if e not in drop)
    reduced = Skeleton(g.vertices, g.base, kept, g.z0, g.radius, g.boundary, g.locations)
    return CompletedSkeleton(reduced, hubs, tuple(spokes))


def pi1_rank(g) -> int:
    """First Betti number |E| - |V| + #components of the materialized graph."""
    G = g.graph()
    return G.number_of_edges() - G.number_of_nodes() + nx.number_connected_components(G)


# ---------------------------------------------------------------------------
# truncation


def truncation_layers(g: Skeleton, n: float) -> tuple[list[set], list[set]]:
    """Cumulative vertex layers V_{n,k} and edge sets E_{n,k}, k = 0..n."""
    inc = g.incident()
    V = [{g.base}]
    E = [set()]
    kmax = int(math.floor(n)) if math.isfinite(n) else 0
    for _ in range(kmax):
        prev = V[-1]
        edges = set(E[-1])
        verts = set(prev)
        for x in prev:
            for e in inc.get(x, ()):
                if abs(e.foot - g.z0) <= n:
                    edges.add(e)
                    verts.add(e.other(x))
        V.append(verts)
        E.append(edges)
    return V, E


def truncate(g: Skeleton, n: int) -> Skeleton:
    """Finite skeleton Gamma_n with every cut chain closed into a cycle."""
    if n < 1:
        raise ValueError("n must be >= 1")
    V, E = truncation_layers(g, n)
    inner = V[-2] if len(V) > 1 else V[-1]
    hit = sorted(v for v in inner if v in g.boundary)
    if hit:
        raise RadiusTooSmall(f"vertices {hit} at the ball boundary are needed for n={n}")
    verts, kept = V[-1], E[-1]
    new_edges = [e for e in g.edges if e in kept]
    for r in ram_cycles(g):
        chain = list(r.edge_cycle)
        inside = [e in kept for e in chain]
        if all(inside) and r.is_finite:
            continue
        if not any(inside):
            continue
        # rotate a cycle so that the arcs do not wrap around the end
        if r.is_finite:
            k = inside.index(False)
            chain, inside = chain[k:] + chain[:k], inside[k:] + inside[:k]
        arc: list = []
        for e, ok in zip(chain + [None], inside + [False]):
            if ok:
                arc.append(e)
                continue
            if arc:
                first = arc[0].plus_vertex
                last = arc[-1].minus_vertex
                new_edges.append(Edge(last, first, r.projection, PLUS))
                arc = []
    order = {v: i for i, v in enumerate(g.vertices)}
    verts_sorted = tuple(sorted(verts, key=lambda v: order.get(v, len(order))))
    locs = {v: g.locations[v] for v in verts_sorted if v in g.locations}
    return Skeleton(verts_sorted, g.base, tuple(new_edges), g.z0, math.inf, frozenset(), locs)


# ---------------------------------------------------------------------------
# ball embeddings


def auto_foot_tol(g: Skeleton) -> float:
    """Half the smallest gap among feet of g and between g's feet and z0."""
    feet = g.feet
    gaps = [abs(a - b) for i, a in enumerate(feet) for b in feet[i + 1:]]
    gaps += [abs(a - g.z0) for a in feet]
    return 0.5 * min(gaps) if gaps else 0.0


def ball(g: Skeleton, r: int) -> set:
    dist = g.distances()
    return {v for v, d in dist.items() if d <= r}


def ball_embed(a: Skeleton, b: Skeleton, r: int, foot_tol: float | None = None) -> bool:
    """Is the radius-r ball of a about its base a labeled subgraph of b?

    Feet must agree to ``foot_tol`` (default: half the separation of a's
    feet, so that feet moving slightly under approximation still match).
    """
    if abs(a.z0 - b.z0) > 1e-9 * (1 + abs(a.z0)):
        return False
    tol = auto_foot_tol(a) if foot_tol is None else foot_tol
    tol = max(tol, FOOT_RTOL * (1 + max((abs(z) for z in a.feet), default=0.0)))
    region = ball(a, r)
    inc_a, inc_b = a.incident(), b.incident()
    phi = {a.base: b.base}
    queue = deque([a.base])
    seen_edges = set()
    while queue:
        x = queue.popleft()
        for e in inc_a.get(x, ()):
            y = e.other(x)
            if y not in region or e in seen_edges:
                continue
            seen_edges.add(e)
            side = e.side_at(x)
            cands = [h for h in inc_b.get(phi[x], ())
                     if abs(h.foot - e.foot) <= tol and h.side_at(phi[x]) == side
                     and (h.u != h.v or e.u == e.v)]
            if not cands:
                return False
            h = min(cands, key=lambda h: abs(h.foot - e.foot))
            img = h.other(phi[x])
            if y in phi:
                if phi[y] != img:
                    return False
            else:
                if img in phi.values():
                    return False
                phi[y] = img
                queue.append(y)
    return True


# ---------------------------------------------------------------------------
# interchange format


def skeleton_to_dict(g: Skeleton) -> dict:
    edges = []
    for e in g.edges:
        d = {"u": e.u, "v": e.v, "foot": [e.foot.real, e.foot.imag], "u_side": e.u_side}
        if e.v_side != _opposite(e.u_side):
            d["v_side"] = e.v_side
        edges.append(d)
    return {
        "z0": [g.z0.real, g.z0.imag],
        "base": g.base,
        "vertices": list(g.vertices),
        "edges": edges,
        "radius": "inf" if math.isinf(g.radius) else int(g.radius),
    }


def skeleton_from_dict(data: dict) -> Skeleton:
    for key in ("z0", "base", "vertices", "edges", "radius"):
        if key not in data:
            raise KeyError(key)
    radius = math.inf if data["radius"] == "inf" else int(data["radius"])
    edges = []
    for i, d in enumerate(data["edges"]):
        for key in ("u", "v", "foot", "u_side"):
            if key not in d:
                raise KeyError(f"edges[{i}].{key}")
        if d["u_side"] not in (PLUS, MINUS):
            raise ValueError(f"edges[{i}].u_side")
        edges.append(Edge(d["u"], d["v"], as_complex(d["foot"]), d["u_side"], d.get("v_side")))
    g = Skeleton(tuple(data["vertices"]), data["base"], tuple(edges), as_complex(data["z0"]), radius)
    if math.isfinite(radius):
        dist = g.distances()
        g = Skeleton(g.vertices, g.base, g.edges, g.z0, radius,
                     frozenset(v for v, d in dist.items() if d >= radius))
    return g
