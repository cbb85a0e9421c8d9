"""Random restrictions: uniform R_p and the grid restrictions R^grid_Delta.

Grid geometry conventions (row-down coordinates, everything mod n):

* side T = 4*Delta^2 per subgrid, m = n/T subgrids per axis;
* subgrid (A, B) holds Delta centers at (A*T + 3*Delta*k, B*T + 3*Delta*k)
  for k = 1..Delta, i.e. equally spaced on the central-square diagonal with
  spacing 3*Delta in each coordinate;
* between two vertically adjacent subgrids there are Delta^2 corridor rows
  straddling the boundary; pair (top center i, bottom center j) owns row
  (A+1)*T - floor(Delta^2/2) + (i-1)*Delta + (j-1).  The connecting path is
  five segments: left offset (i steps) at the bottom center, an up leg, a
  run along the owned row, a down leg, and a right offset (j steps) at the
  top center.  Horizontal adjacency is the transpose.

The construction is only pinned down by the disjointness report
(:func:`validate_disjointness`); see that function for the exact property.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Union

import numpy as np

from . import gridgraph
from .boolcore import CONST_ONE, ConstOne, Dnf, Literal, Restriction, Term
from .gridgraph import LiveGraph, TorusGrid, TseitinInstance


def sample_uniform(variables: Iterable[int], p: float, rng) -> Restriction:
    """R_p: each variable is * with probability p, else a fair bit."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    out = {}
    for v in variables:
        if rng.random() >= p:
            out[v] = int(rng.integers(0, 2))
    return Restriction(out)


# ---------------------------------------------------------------------------
# Grid parameters and centers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridParams:
    n: int
    delta: int

    def __post_init__(self):
        if self.delta < 2:
            raise ValueError("delta must be at least 2")
        if self.n % self.side != 0:
            raise ValueError(f"subgrid side {self.side} must divide n={self.n}")
        if self.m < 3:
            raise ValueError("need at least 3 subgrids per axis")

    @property
    def side(self) -> int:
        """Subgrid side T = 4*delta^2."""
        return 4 * self.delta * self.delta

    @property
    def m(self) -> int:
        """Dimension of the projected grid."""
        return self.n // self.side

    @property
    def central_square_side(self) -> int:
        return 3 * self.delta * self.delta


def layout_centers(params: GridParams) -> dict[tuple[int, int], list[tuple[int, int]]]:
    """Center coordinates per subgrid, k = 1..delta in list order."""
    d, T = params.delta, params.side
    out = {}
    for A in range(params.m):
        for B in range(params.m):
            out[(A, B)] = [(A * T + 3 * d * k, B * T + 3 * d * k)
                           for k in range(1, d + 1)]
    return out


# ---------------------------------------------------------------------------
# Path atlas
# ---------------------------------------------------------------------------

PathKey = tuple[str, int, int, int, int]   # (kind 'v'|'h', A, B, i, j)


class PathConstructionError(ValueError):
    pass


class PathAtlas:
    """All inter-center paths plus a reverse edge index.

    ``paths[key]`` is the ordered edge-id tuple; path endpoints are
    ``endpoints[key] = (from_center, to_center)`` as vertex ids, where the
    path runs from the bottom (resp. right) center to the top (resp. left).
    """

    def __init__(self, params: GridParams):
        self.params = params
        self.grid = TorusGrid(params.n)
        self.centers = layout_centers(params)
        self.center_vertex: dict[tuple[int, int, int], int] = {}
        self.center_info: dict[int, tuple[int, int, int]] = {}
        for (A, B), pts in self.centers.items():
            for k, (r, c) in enumerate(pts, start=1):
                vid = self.grid.vertex_id(r, c)
                self.center_vertex[(A, B, k)] = vid
                self.center_info[vid] = (A, B, k)
        self.paths: dict[PathKey, tuple[int, ...]] = {}
        self.endpoints: dict[PathKey, tuple[int, int]] = {}
        self.edge_index: dict[int, list[tuple[PathKey, int]]] = {}
        self._build()

    # construction ----------------------------------------------------------
    def _walk(self, r: int, c: int, dr: int, dc: int, steps: int) -> list[tuple[int, int]]:
        n = self.params.n
        return [((r + dr * s) % n, (c + dc * s) % n) for s in range(steps + 1)]

    def _vertices_to_edges(self, verts: list[tuple[int, int]]) -> tuple[int, ...]:
        n, g = self.params.n, self.grid
        out = []
        for (r1, c1), (r2, c2) in zip(verts, verts[1:]):
            if r1 == r2:
                if (c1 + 1) % n == c2:
                    out.append(g.horizontal_edge(r1, c1))
                elif (c2 + 1) % n == c1:
                    out.append(g.horizontal_edge(r1, c2))
                else:
                    raise PathConstructionError("non-adjacent path step")
            elif c1 == c2:
                if (r1 + 1) % n == r2:
                    out.append(g.vertical_edge(r1, c1))
                elif (r2 + 1) % n == r1:
                    out.append(g.vertical_edge(r2, c1))
                else:
                    raise PathConstructionError("non-adjacent path step")
            else:
                raise PathConstructionError("diagonal path step")
        if len(set(out)) != len(out):
            raise PathConstructionError("path repeats an edge")
        return tuple(out)

    def _vertical_path(self, A: int, B: int, i: int, j: int) -> list[tuple[int, int]]:
        """Bottom center j of subgrid (A+1, B) up to top center i of (A, B)."""
        p = self.params
        n, T, d = p.n, p.side, p.delta
        row_corridor = ((A + 1) * T - (d * d) // 2 + (i - 1) * d + (j - 1)) % n
        rb, cb = ((A + 1) % p.m) * T + 3 * d * j, B * T + 3 * d * j      # bottom center
        rt, ct = A * T + 3 * d * i, B * T + 3 * d * i                    # top center
        rb %= n; cb %= n; rt %= n; ct %= n
        verts = self._walk(rb, cb, 0, -1, i)                             # left offset
        up_steps = (verts[-1][0] - row_corridor) % n
        verts += self._walk(verts[-1][0], verts[-1][1], -1, 0, up_steps)[1:]
        col_from, col_to = (cb - i) % n, (ct + j) % n
        dc = 1 if col_to > col_from else -1                              # same band, no wrap
        verts += self._walk(row_corridor, col_from, 0, dc, abs(col_to - col_from))[1:]
        down_steps = (row_corridor - rt) % n
        verts += self._walk(row_corridor, col_to, -1, 0, down_steps)[1:]
        verts += self._walk(rt, col_to, 0, -1, j)[1:]                    # into the top center
        assert verts[-1] == (rt, ct)
        return verts

    def _horizontal_path(self, A: int, B: int, a: int, b: int) -> list[tuple[int, int]]:
        """Right center b of subgrid (A, B+1) across to left center a of (A, B)."""
        p = self.params
        n, T, d = p.n, p.side, p.delta
        col_corridor = ((B + 1) * T - (d * d) // 2 + (a - 1) * d + (b - 1)) % n
        rr, cr = A * T + 3 * d * b, ((B + 1) % p.m) * T + 3 * d * b      # right center
        rl, cl = A * T + 3 * d * a, B * T + 3 * d * a                    # left center
        rr %= n; cr %= n; rl %= n; cl %= n
        verts = self._walk(rr, cr, -1, 0, a)                             # up offset
        left_steps = (verts[-1][1] - col_corridor) % n
        verts += self._walk(verts[-1][0], verts[-1][1], 0, -1, left_steps)[1:]
        row_from, row_to = (rr - a) % n, (rl + b) % n
        dr = 1 if row_to > row_from else -1
        verts += self._walk(row_from, col_corridor, dr, 0, abs(row_to - row_from))[1:]
        left2 = (col_corridor - cl) % n
        verts += self._walk(row_to, col_corridor, 0, -1, left2)[1:]
        verts += self._walk(row_to, cl, -1, 0, b)[1:]                    # into the left center
        assert verts[-1] == (rl, cl)
        return verts

    def _build(self):
        p = self.params
        d, m = p.delta, p.m
        for A in range(m):
            for B in range(m):
                for i in range(1, d + 1):
                    for j in range(1, d + 1):
                        key = ("v", A, B, i, j)
                        verts = self._vertical_path(A, B, i, j)
                        self.paths[key] = self._vertices_to_edges(verts)
                        self.endpoints[key] = (
                            self.center_vertex[(((A + 1) % m), B, j)],
                            self.center_vertex[(A, B, i)],
                        )
                        key = ("h", A, B, i, j)
                        verts = self._horizontal_path(A, B, i, j)
                        self.paths[key] = self._vertices_to_edges(verts)
                        self.endpoints[key] = (
                            self.center_vertex[(A, ((B + 1) % m), j)],
                            self.center_vertex[(A, B, i)],
                        )
        for key, edges in self.paths.items():
            for pos, eid in enumerate(edges):
                self.edge_index.setdefault(eid, []).append((key, pos))

    # queries ----------------------------------------------------------------
    def nearest_endpoint(self, key: PathKey, pos: int) -> tuple[int, int]:
        """(center vertex, 0-based edge distance) of the closer path endpoint."""
        L = len(self.paths[key])
        c_from, c_to = self.endpoints[key]
        d_from, d_to = pos, L - 1 - pos
        if d_from < d_to or (d_from == d_to and c_from < c_to):
            return c_from, d_from
        return c_to, d_to

    def associated_center(self, eid: int) -> tuple[int, frozenset[int], int] | None:
        """(associated center, far-endpoint centers S_e, distance) or None.

        The associated center is the common nearest endpoint of every path
        through the edge.
        """
        entries = self.edge_index.get(eid)
        if not entries:
            return None
        picks = [self.nearest_endpoint(key, pos) for key, pos in entries]
        centers = {c for c, _ in picks}
        if len(centers) != 1:
            raise PathConstructionError(
                f"edge {eid} has paths disagreeing on the nearest endpoint")
        center = centers.pop()
        far = set()
        for key, pos in entries:
            c_from, c_to = self.endpoints[key]
            far.add(c_to if c_from == center else c_from)
        return center, frozenset(far), min(d for _, d in picks)

    def path_between(self, c1: int, c2: int) -> PathKey | None:
        for key, (a, b) in self.endpoints.items():
            if {a, b} == {c1, c2}:
                return key
        return None


_atlas_cache: dict[GridParams, PathAtlas] = {}


def build_path_atlas(params: GridParams) -> PathAtlas:
    if params not in _atlas_cache:
        _atlas_cache[params] = PathAtlas(params)
    return _atlas_cache[params]


@dataclass
class DisjointnessReport:
    params: GridParams
    shared_edges: int
    violations: list[tuple[int, str]]

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        lines = [f"path disjointness delta={self.params.delta} n={self.params.n}: {verdict}",
                 f"  shared edges: {self.shared_edges}"]
        for eid, why in self.violations[:20]:
            lines.append(f"  violation at edge {eid}: {why}")
        return "\n".join(lines)


def validate_disjointness(atlas: PathAtlas) -> DisjointnessReport:
    """Check that paths only share edges within delta of a common endpoint."""
    d = atlas.params.delta
    violations = []
    shared = 0
    for eid, entries in atlas.edge_index.items():
        if len(entries) < 2:
            continue
        shared += 1
        picks = [atlas.nearest_endpoint(key, pos) for key, pos in entries]
        centers = {c for c, _ in picks}
        if len(centers) != 1:
            violations.append((eid, f"no common nearest endpoint: {sorted(centers)}"))
            continue
        far = max(dist for _, dist in picks)
        if far >= d:
            violations.append((eid, f"shared edge {far + 1} edges from its endpoint, > delta={d}"))
    return DisjointnessReport(atlas.params, shared, violations)


# ---------------------------------------------------------------------------
# Grid restriction sampling
# ---------------------------------------------------------------------------

class Fixed(NamedTuple):
    bit: int


class Mapped(NamedTuple):
    new_var: int
    negated: bool   # True when the suggested value is 1


@dataclass
class GridRestriction:
    """A sampled full restriction: chosen centers, fixed values, projection.

    ``values[e]`` is the fixed bit for dead edges and -1 for live (path)
    edges.  Live edges carry ``proj_var[e]`` (an edge id on the m x m grid)
    and ``proj_pol[e]`` (the suggested value; assigning b to the new
    variable makes edge e take b XOR proj_pol[e]).

    ``defect_vertex`` is a never-chosen center of subgrid (0, 0) whose
    auxiliary charge is flipped to 0 so the auxiliary system has even total
    charge (T is even, so n is even while m is odd and the textbook charge
    pattern sums odd).  Its own original parity constraint is the one
    constraint back-substitution does not satisfy.
    """

    params: GridParams
    chosen: dict[tuple[int, int], int]
    values: np.ndarray
    proj_var: np.ndarray
    proj_pol: np.ndarray
    defect_vertex: int
    new_instance: TseitinInstance
    representative: dict[int, int]   # new var -> original edge adjacent to the smaller center

    def apply(self, eid: int) -> Union[Fixed, Mapped]:
        v = int(self.values[eid])
        if v >= 0:
            return Fixed(v)
        return Mapped(int(self.proj_var[eid]), bool(self.proj_pol[eid]))

    @property
    def live_edges(self) -> np.ndarray:
        return np.nonzero(self.values < 0)[0]

    def back_substitute(self, new_assignment: dict[int, int]) -> np.ndarray:
        """Full edge assignment induced by values for the new variables."""
        out = self.values.copy()
        for e in self.live_edges:
            out[e] = new_assignment[int(self.proj_var[e])] ^ int(self.proj_pol[e])
        return out

    def to_json(self) -> str:
        return json.dumps({
            "schema": "switchlab.grid_restriction.v1",
            "n": self.params.n,
            "delta": self.params.delta,
            "chosen": {f"{A},{B}": k for (A, B), k in sorted(self.chosen.items())},
            "defect_vertex": self.defect_vertex,
            "values": self.values.tolist(),
            "proj_var": self.proj_var.tolist(),
            "proj_pol": self.proj_pol.tolist(),
        }, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "GridRestriction":
        doc = json.loads(text)
        params = GridParams(doc["n"], doc["delta"])
        chosen = {tuple(map(int, key.split(","))): v for key, v in doc["chosen"].items()}
        atlas = build_path_atlas(params)
        return _assemble(params, atlas, chosen,
                         np.array(doc["values"], dtype=np.int8),
                         np.array(doc["proj_var"], dtype=np.int32),
                         np.array(doc["proj_pol"], dtype=np.int8),
                         int(doc["defect_vertex"]))


def _assemble(params, atlas, chosen, values, proj_var, proj_pol, defect) -> GridRestriction:
    m = params.m
    new_grid = gridgraph.build_grid(m)
    inst = TseitinInstance(LiveGraph(new_grid), gridgraph.all_one_charge(new_grid))
    rep: dict[int, int] = {}
    for (key, new_var) in _live_path_vars(params, atlas, chosen):
        edges = atlas.paths[key]
        c_from, c_to = atlas.endpoints[key]
        rep[new_var] = edges[0] if c_from < c_to else edges[-1]
    return GridRestriction(params, chosen, values, proj_var, proj_pol, defect, inst, rep)


def _live_path_vars(params: GridParams, atlas: PathAtlas,
                    chosen: dict[tuple[int, int], int]) -> list[tuple[PathKey, int]]:
    """(path key, new variable id) for every path between chosen centers."""
    m = params.m
    new_grid = TorusGrid(m)
    out = []
    for A in range(m):
        for B in range(m):
            i = chosen[(A, B)]
            j = chosen[((A + 1) % m, B)]
            out.append((("v", A, B, i, j), new_grid.vertical_edge(A, B)))
            j = chosen[(A, (B + 1) % m)]
            out.append((("h", A, B, i, j), new_grid.horizontal_edge(A, B)))
    return out


def defect_center(params: GridParams, chosen_k_00: int) -> int:
    """The lowest-indexed non-chosen center of subgrid (0, 0)."""
    return 2 if chosen_k_00 == 1 else 1


def auxiliary_charge(params: GridParams, atlas: PathAtlas,
                     chosen: dict[tuple[int, int], int]) -> tuple[np.ndarray, int]:
    """Charge 0 at chosen centers and the defect vertex, 1 elsewhere."""
    grid = atlas.grid
    alpha = gridgraph.all_one_charge(grid)
    for (A, B), k in chosen.items():
        alpha[atlas.center_vertex[(A, B, k)]] = 0
    w = atlas.center_vertex[(0, 0, defect_center(params, chosen[(0, 0)]))]
    alpha[w] = 0
    return alpha, w


def sample_grid_restriction(params: GridParams, rng) -> GridRestriction:
    """Draw from R^grid_Delta: choose centers, solve the auxiliary system.

    Requires m odd so the projected all-one instance is a contradiction.
    """
    if params.m % 2 == 0:
        raise ValueError("sampling needs an odd number of subgrids per axis")
    atlas = build_path_atlas(params)
    m = params.m
    chosen = {(A, B): int(rng.integers(1, params.delta + 1))
              for A in range(m) for B in range(m)}
    alpha, defect = auxiliary_charge(params, atlas, chosen)
    grid = atlas.grid
    aux = TseitinInstance(LiveGraph(grid), alpha)
    solution = gridgraph.sample_uniform_solution(aux, rng)
    values = np.zeros(grid.n_edges, dtype=np.int8)
    for e, b in solution.items():
        values[e] = b
    proj_var = np.full(grid.n_edges, -1, dtype=np.int32)
    proj_pol = np.zeros(grid.n_edges, dtype=np.int8)
    for key, new_var in _live_path_vars(params, atlas, chosen):
        for e in atlas.paths[key]:
            proj_pol[e] = values[e]     # suggested value becomes the polarity
            proj_var[e] = new_var
            values[e] = -1              # live
    return _assemble(params, atlas, chosen, values, proj_var, proj_pol, defect)


def project_dnf(rho: GridRestriction, F: Dnf) -> Union[Dnf, ConstOne]:
    """Rewrite a DNF over grid edges as a DNF over the projected variables.

    A term satisfied outright by the fixed values makes the whole DNF the
    constant 1; terms with a falsified or internally contradictory literal
    drop out; duplicate mapped literals merge.
    """
    new_terms = []
    for t in F.terms:
        lits: dict[int, bool] = {}
        dead = False
        for lit in t.literals:
            act = rho.apply(lit.var)
            if isinstance(act, Fixed):
                if not lit.satisfied_by(act.bit):
                    dead = True
                    break
                continue
            want_positive = lit.positive ^ act.negated
            if act.new_var in lits and lits[act.new_var] != want_positive:
                dead = True
                break
            lits[act.new_var] = want_positive
        if dead:
            continue
        if not lits:
            return CONST_ONE
        new_terms.append(Term(tuple(Literal(v, pos) for v, pos in lits.items())))
    return Dnf(tuple(new_terms), F.width)
