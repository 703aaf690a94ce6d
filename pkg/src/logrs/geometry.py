"""Metric geometry on a surface rebuilt from its skeleton.

Each star is a copy of the projection plane minus the slits
{c + t (c - z0), t >= 0} at the feet c of its edges.  Samples on a shared
jittered grid are joined inside a star when the chord avoids every slit of
that star, and across a slit when the skeleton pastes the two sides.
Ramification points are extra nodes joined by straight chords to every
sample of an adjacent star that sees them.  Shortest paths on this graph
approximate the flat path metric |d pi| from above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import InfiniteRamificationSet, OutOfWindow
from .lifting import TERMINATED, FiberPoint, RamPoint, lift_segment
from .numerics import PQForm
from .skeleton import MINUS, PLUS, Skeleton, _canonical_foot, ram_cycles, skeleton_build

PARABOLIC = "Parabolic"
INCONCLUSIVE = "Inconclusive"
ZERO_WEIGHT = 1e-14
JITTER = 1e-3
OFFSETS = ((1, 0), (0, 1), (1, 1), (1, -1))


@dataclass(frozen=True)
class SurfacePoint:
    star: int
    z: complex
    boundary: bool = False


@dataclass
class ParabolicityReport:
    n_bound: float
    n_estimates: dict
    verdict: str
    integral_lower_bound_diverges: bool
    flags: tuple = ()


def star_boundary(f, w: FiberPoint, crits: Sequence[complex]) -> list[tuple[float, float, RamPoint]]:
    """Slits of the star of w: (direction, length, foot) for each obstructed ray."""
    z0 = complex(w.value) if w.value is not None else complex(f.value(w.location))
    out = []
    for c in crits:
        c = complex(c)
        res = lift_segment(f, FiberPoint(w.location, w.sheet_tag, z0), z0, c)
        if res.kind == TERMINATED:
            out.append((math.atan2((c - z0).imag, (c - z0).real), res.rho, res.terminal))
    return out


# ---------------------------------------------------------------------------
# mesh


def _crossings(p: np.ndarray, q: np.ndarray, c: complex, d: complex):
    """Mask of chords p->q crossing the ray c + t d (t >= 0), and side of p."""
    dc = np.conj(d)
    sp = ((p - c) * dc).imag
    sq = ((q - c) * dc).imag
    straddle = sp * sq < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(straddle, sp / (sp - sq), 0.0)
    x = p + t * (q - p)
    ahead = ((x - c) * dc).real >= 0
    return straddle & ahead, sp


@dataclass
class CellMap:
    skeleton: Skeleton
    window: tuple
    h: float
    stars: tuple
    points: np.ndarray
    rams: list
    ram_ids: dict
    adjacency: object
    distances: np.ndarray
    assignment: np.ndarray
    boundary: np.ndarray
    boundary_points: dict
    slits: dict
    _tau_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_samples(self) -> int:
        return len(self.stars) * self.points.size

    def node(self, star_index: int, flat: int) -> int:
        return star_index * self.points.size + flat

    def locate(self, w: SurfacePoint) -> tuple[int, complex]:
        x0, x1, y0, y1 = self.window
        z = complex(w.z)
        pad = 1e-9 * (1 + abs(z))
        if w.star not in self.stars or not (x0 - pad <= z.real <= x1 + pad and y0 - pad <= z.imag <= y1 + pad):
            raise OutOfWindow(f"{w} is outside the meshed window {self.window}")
        return self.stars.index(w.star), z

    def _visible(self, star_index: int, z: complex, cand: np.ndarray) -> np.ndarray:
        """Which flat sample indices in ``cand`` see z inside the star."""
        pts = self.points.ravel()[cand]
        ok = np.ones(len(cand), dtype=bool)
        for c, d in self.slits[self.stars[star_index]]:
            hit, _ = _crossings(np.full(len(cand), z), pts, c, d)
            ok &= ~hit
        return ok

    def _near(self, w: SurfacePoint, k: int = 2):
        si, z = self.locate(w)
        ny, nx = self.points.shape
        x0, _, y0, _ = self.window
        i = int(round((z.real - x0) / self.h))
        j = int(round((z.imag - y0) / self.h))
        idx = []
        for jj in range(max(0, j - k), min(ny, j + k + 1)):
            for ii in range(max(0, i - k), min(nx, i + k + 1)):
                idx.append(jj * nx + ii)
        cand = np.array(idx, dtype=int)
        cand = cand[self._visible(si, z, cand)]
        if cand.size == 0:
            raise OutOfWindow(f"no visible sample near {w}")
        legs = np.abs(self.points.ravel()[cand] - z)
        return si, z, cand, legs

    def distance_field(self, w: SurfacePoint) -> np.ndarray:
        """Distances from w to every ramification point."""
        si, z, cand, legs = self._near(w)
        nodes = si * self.points.size + cand
        out = np.min(self.distances[:, nodes] + legs[None, :], axis=1)
        star = self.stars[si]
        for k, r in enumerate(self.rams):
            if star in _ram_stars(r):
                if _chord_clear(self.slits[star], r.projection, z):
                    out[k] = min(out[k], abs(z - r.projection))
        return out

    def tau_field(self, w0: SurfacePoint) -> np.ndarray:
        key = (w0.star, complex(w0.z))
        if key not in self._tau_cache:
            si, z, cand, _ = self._near(w0)
            nodes = si * self.points.size + cand
            c0 = self.rams[int(self.assignment[nodes[0]])].projection
            pts = self.points.ravel()[cand]
            start = np.abs(np.angle((pts - c0) / (z - c0)))
            graph = _tau_graph(self)
            dist = dijkstra(graph, directed=False, indices=nodes)
            self._tau_cache[key] = np.min(dist + start[:, None], axis=0)
        return self._tau_cache[key]


def _chord_clear(slits, a: complex, b: complex) -> bool:
    for c, d in slits:
        if abs(c - a) < 1e-12 or abs(c - b) < 1e-12:
            continue
        hit, _ = _crossings(np.array([a]), np.array([b]), c, d)
        if hit[0]:
            return False
    return True


def _ram_stars(r: RamPoint) -> set:
    out = set()
    for e in r.edge_cycle:
        out.update((e.u, e.v))
    return out


def _star_slits(g: Skeleton) -> dict:
    feet = g.feet
    slits = {v: {} for v in g.vertices}
    plus, minus = {}, {}
    for e in g.edges:
        c = _canonical_foot(feet, e.foot)
        d = c - g.z0
        d = d / abs(d)
        for x in (e.u, e.v):
            slits[x][c] = d
        plus[(e.plus_vertex, c)] = e.minus_vertex
        minus[(e.minus_vertex, c)] = e.plus_vertex
    return {v: list(s.items()) for v, s in slits.items()}, plus, minus


def _grid(window, h, seed):
    x0, x1, y0, y1 = window
    nx = int(math.floor((x1 - x0) / h + 1e-9)) + 1
    ny = int(math.floor((y1 - y0) / h + 1e-9)) + 1
    X, Y = np.meshgrid(x0 + h * np.arange(nx), y0 + h * np.arange(ny))
    rng = np.random.default_rng(seed)
    jitter = JITTER * h * (rng.uniform(-1, 1, X.shape) + 1j * rng.uniform(-1, 1, X.shape))
    return X + 1j * Y + jitter


def _mesh_pairs(shape):
    ny, nx = shape
    idx = np.arange(nx * ny).reshape(ny, nx)
    A, B = [], []
    for di, dj in OFFSETS:
        if dj >= 0:
            a, b = idx[0:ny - dj, 0:nx - di], idx[dj:ny, di:nx]
        else:
            a, b = idx[-dj:ny, 0:nx - di], idx[0:ny + dj, di:nx]
        A.append(a.ravel())
        B.append(b.ravel())
    return np.concatenate(A), np.concatenate(B)


def _build_edges(g: Skeleton, stars, points, slits, plus, minus):
    flat = points.ravel()
    N = flat.size
    A, B = _mesh_pairs(points.shape)
    p, q = flat[A], flat[B]
    feet = sorted({c for s in slits.values() for c, _ in s}, key=lambda z: (z.real, z.imag))
    dirs = {}
    for s in slits.values():
        dirs.update(dict(s))
    cross = {}
    for c in feet:
        cross[c] = _crossings(p, q, c, dirs[c])
    sid = {v: i for i, v in enumerate(stars)}
    rows, cols, wts = [], [], []
    length = np.abs(q - p)
    for v in stars:
        mine = [c for c, _ in slits[v]]
        count = np.zeros(len(A), dtype=int)
        for c in mine:
            count += cross[c][0]
        free = count == 0
        base = sid[v] * N
        rows.append(base + A[free])
        cols.append(base + B[free])
        wts.append(length[free])
        for c in mine:
            hit, sp = cross[c]
            once = hit & (count == 1)
            for sel, table in ((once & (sp < 0), plus), (once & (sp > 0), minus)):
                partner = table.get((v, c))
                if partner is None or partner not in sid or not np.any(sel):
                    continue
                # the far half of the chord must be clear in the partner star
                other = [cc for cc, _ in slits[partner] if cc != c]
                ok = sel.copy()
                for cc in other:
                    ok &= ~cross[cc][0]
                rows.append(base + A[ok])
                cols.append(sid[partner] * N + B[ok])
                wts.append(length[ok])
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(wts)


def kn_cells(source, window: tuple, h: float | None = None, z0: complex | None = None,
             radius: int = 2, seed: int = 0) -> CellMap:
    """Nearest-ramification-point cells on a sampled window of every star.

    ``source`` is a Skeleton or a chart (whose skeleton is built first).
    ``window`` is (xmin, xmax, ymin, ymax) in the projection plane.
    """
    g = source if isinstance(source, Skeleton) else skeleton_build(source, z0, radius, seed)
    window = tuple(float(x) for x in window)
    if h is None:
        h = 0.02 * math.hypot(window[1] - window[0], window[3] - window[2])
    stars = tuple(v for v in g.vertices)
    slits, plus, minus = _star_slits(g)
    points = _grid(window, h, seed)
    N = points.size
    S = len(stars)
    rows, cols, wts = _build_edges(g, stars, points, slits, plus, minus)

    rams = ram_cycles(g)
    ram_ids = {}
    flat = points.ravel()
    r_rows, r_cols, r_wts = [], [], []
    all_idx = np.arange(N)
    for k, r in enumerate(rams):
        node = S * N + k
        ram_ids[id(r)] = k
        for v in sorted(_ram_stars(r), key=stars.index):
            si = stars.index(v)
            ok = np.ones(N, dtype=bool)
            for c, d in slits[v]:
                if abs(c - r.projection) <= 1e-12 * (1 + abs(c)):
                    continue
                hit, _ = _crossings(np.full(N, r.projection), flat, c, d)
                ok &= ~hit
            r_rows.append(np.full(int(ok.sum()), node))
            r_cols.append(si * N + all_idx[ok])
            r_wts.append(np.abs(flat[ok] - r.projection))
    total = S * N + len(rams)
    R = np.concatenate([rows] + r_rows) if r_rows else rows
    C = np.concatenate([cols] + r_cols) if r_cols else cols
    W = np.concatenate([wts] + r_wts) if r_wts else wts
    W = np.maximum(W, ZERO_WEIGHT)
    graph = coo_matrix((W, (R, C)), shape=(total, total)).tocsr()

    mesh = coo_matrix((np.maximum(wts, ZERO_WEIGHT), (rows, cols)), shape=(S * N, S * N)).tocsr()
    if rams:
        D = dijkstra(graph, directed=False, indices=np.arange(S * N, total))[:, :S * N]
        best = D.min(axis=0)
        tie = D <= best[None, :] + 1e-12 * (1 + best[None, :])
        assign = np.argmax(tie, axis=0)
    else:
        D = np.full((0, S * N), np.inf)
        assign = np.zeros(S * N, dtype=int)
    sym = mesh + mesh.T
    coo = sym.tocoo()
    differ = assign[coo.row] != assign[coo.col]
    boundary = np.zeros(S * N, dtype=bool)
    boundary[coo.row[differ]] = True
    bpts: dict = {k: [] for k in range(len(rams))}
    for node in np.flatnonzero(boundary):
        bpts[int(assign[node])].append(SurfacePoint(stars[node // N], complex(flat[node % N]), True))
    return CellMap(g, window, h, stars, points, rams, ram_ids, sym, D, assign, boundary, bpts, slits)


def _tau_graph(cells: CellMap):
    if "graph" in cells._tau_cache:
        return cells._tau_cache["graph"]
    coo = cells.adjacency.tocoo()
    N = cells.points.size
    flat = cells.points.ravel()
    p = flat[coo.row % N]
    q = flat[coo.col % N]
    proj = np.array([r.projection for r in cells.rams]) if cells.rams else np.array([0j])
    ca = proj[cells.assignment[coo.row]]
    cb = proj[cells.assignment[coo.col]]
    wa = np.abs(np.angle((q - ca) / (p - ca)))
    wb = np.abs(np.angle((q - cb) / (p - cb)))
    w = np.maximum(np.minimum(wa, wb), ZERO_WEIGHT)
    g = coo_matrix((w, (coo.row, coo.col)), shape=coo.shape).tocsr()
    cells._tau_cache["graph"] = g
    return g


def kn_distance(cells: CellMap, w: SurfacePoint, targets: Sequence[RamPoint] | None = None) -> list[float]:
    """Mesh path distance from w to each target ramification point."""
    field_ = cells.distance_field(w)
    if targets is None:
        return [float(x) for x in field_]
    out = []
    for t in targets:
        k = cells.ram_ids.get(id(t))
        if k is None:
            k = _match_ram(cells.rams, t)
        out.append(float(field_[k]))
    return out


def _match_ram(rams, t: RamPoint) -> int:
    for k, r in enumerate(rams):
        if abs(r.projection - t.projection) <= 1e-9 * (1 + abs(t.projection)) and (
                not t.edge_cycle or set(t.edge_cycle) == set(r.edge_cycle)):
            return k
    raise KeyError(f"{t} is not a ramification point of this surface")


def tau_sigma(cells: CellMap, w0: SurfacePoint, w: SurfacePoint) -> tuple[float, float]:
    """(tau, sigma): angular path distance from w0, and |log d(w, nearest point)|."""
    tau_all = cells.tau_field(w0)
    si, z, cand, _ = cells._near(w)
    nodes = si * cells.points.size + cand
    d = cells.distance_field(w)
    k = int(np.argmin(d))
    c = cells.rams[k].projection
    pts = cells.points.ravel()[cand]
    legs = np.abs(np.angle((z - c) / (pts - c)))
    tau = float(np.min(tau_all[nodes] + legs))
    if SurfacePoint(w.star, z) == SurfacePoint(w0.star, complex(w0.z)):
        tau = 0.0
    return tau, abs(math.log(d[k])) if d[k] > 0 else math.inf


def level_set_counts(cells: CellMap, w0: SurfacePoint, thetas: Sequence[float]) -> dict:
    """Number of connected components of {tau = theta} on the mesh."""
    tau = cells.tau_field(w0)
    coo = cells.adjacency.tocoo()
    a, b = coo.row, coo.col
    lo, hi = np.minimum(tau[a], tau[b]), np.maximum(tau[a], tau[b])
    out = {}
    n = len(tau)
    for th in thetas:
        sel = np.isfinite(hi) & (lo <= th) & (th < hi)
        if not np.any(sel):
            out[float(th)] = 0
            continue
        g = coo_matrix((np.ones(int(sel.sum())), (a[sel], b[sel])), shape=(n, n))
        ncomp, labels = connected_components(g, directed=False)
        used = np.unique(np.concatenate([a[sel], b[sel]]))
        out[float(th)] = int(len(np.unique(labels[used])))
    return out


def parabolicity(ram, cells: CellMap | None = None, w0: SurfacePoint | None = None,
                 thetas: Sequence[float] | None = None) -> ParabolicityReport:
    """Verdict from the bound n(theta) <= 2 #ram, plus mesh estimates when cells are given."""
    count = ram if isinstance(ram, (int, float)) else len(ram)
    if not math.isfinite(count):
        report = ParabolicityReport(math.inf, {}, INCONCLUSIVE, False, ("infinite ramification set",))
        raise InfiniteRamificationSet("the ramification set is infinite", report)
    n_bound = 2 * int(count)
    estimates = {}
    if cells is not None:
        if w0 is None:
            flat = cells.points.ravel()
            mid = flat[flat.size // 2]
            w0 = SurfacePoint(cells.skeleton.base, complex(mid))
        if thetas is None:
            thetas = np.linspace(0.1, 2 * math.pi, 16)
        estimates = level_set_counts(cells, w0, thetas)
    return ParabolicityReport(n_bound, estimates, PARABOLIC, True)


def ramification_count(f: PQForm) -> int:
    """Number of ramification points of the surface of a PQ-form: d1 + d2."""
    return f.d1 + f.d2
