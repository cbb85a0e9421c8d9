"""Torus grid graphs, Tseitin instances, connectivity, bridges and closures.

Edge variables are dense integers.  On the n x n torus the edge with id
``2*(r*n + c) + d`` leaves vertex ``(r, c)`` going right (d=0) or down (d=1),
all coordinates mod n.  Small hand-built graphs (paths, cycles) share the
same machinery through :class:`GraphTopology`.

Connectivity and bridge queries run on flat arrays so the hot loops can be
jit-compiled; each query is a full recompute, cached per immutable LiveGraph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .boolcore import Literal, Restriction

try:
    from numba import njit
    _HAVE_NUMBA = True
except Exception:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        def deco(f):
            return f
        return deco


class UnsatisfiableInstance(ValueError):
    pass


class NotABridge(ValueError):
    pass


# ---------------------------------------------------------------------------
# Topology
# ---------------------------------------------------------------------------

class GraphTopology:
    """Immutable multigraph on dense vertex ids with dense edge ids."""

    def __init__(self, n_vertices: int, edges: Sequence[tuple[int, int]]):
        self.n_vertices = int(n_vertices)
        self.n_edges = len(edges)
        self.edge_u = np.array([u for u, _ in edges], dtype=np.int32)
        self.edge_v = np.array([v for _, v in edges], dtype=np.int32)
        if self.n_edges and (self.edge_u.min() < 0 or
                             max(self.edge_u.max(), self.edge_v.max()) >= n_vertices):
            raise ValueError("edge endpoint out of range")
        # incidence CSR: for each vertex the ids of touching edges + far endpoint
        deg = np.zeros(n_vertices, dtype=np.int32)
        np.add.at(deg, self.edge_u, 1)
        np.add.at(deg, self.edge_v, 1)
        self.inc_ptr = np.zeros(n_vertices + 1, dtype=np.int32)
        np.cumsum(deg, out=self.inc_ptr[1:])
        self.inc_eid = np.zeros(2 * self.n_edges, dtype=np.int32)
        self.inc_other = np.zeros(2 * self.n_edges, dtype=np.int32)
        cursor = self.inc_ptr[:-1].copy()
        for eid in range(self.n_edges):
            u, v = int(self.edge_u[eid]), int(self.edge_v[eid])
            self.inc_eid[cursor[u]] = eid
            self.inc_other[cursor[u]] = v
            cursor[u] += 1
            self.inc_eid[cursor[v]] = eid
            self.inc_other[cursor[v]] = u
            cursor[v] += 1

    def endpoints(self, eid: int) -> tuple[int, int]:
        return int(self.edge_u[eid]), int(self.edge_v[eid])

    def check_var(self, eid: int) -> None:
        if not 0 <= eid < self.n_edges:
            raise ValueError(f"edge id {eid} out of range for this graph")

    def incident_edges(self, vertex: int) -> list[int]:
        lo, hi = int(self.inc_ptr[vertex]), int(self.inc_ptr[vertex + 1])
        return [int(e) for e in self.inc_eid[lo:hi]]


class TorusGrid(GraphTopology):
    """The n x n torus grid; every vertex has degree 4.  n >= 3."""

    def __init__(self, n: int):
        if n < 3:
            raise ValueError("torus side must be at least 3")
        self.n = n
        edges = []
        for r in range(n):
            for c in range(n):
                edges.append((r * n + c, r * n + (c + 1) % n))        # right
                edges.append((r * n + c, ((r + 1) % n) * n + c))      # down
        # reorder: var id 2*(r*n+c)+dir
        ordered = [None] * (2 * n * n)
        idx = 0
        for r in range(n):
            for c in range(n):
                ordered[2 * (r * n + c) + 0] = edges[idx]; idx += 1
                ordered[2 * (r * n + c) + 1] = edges[idx]; idx += 1
        super().__init__(n * n, ordered)

    def vertex_id(self, r: int, c: int) -> int:
        return (r % self.n) * self.n + (c % self.n)

    def vertex_coords(self, vid: int) -> tuple[int, int]:
        return vid // self.n, vid % self.n

    def edge_id(self, r: int, c: int, direction: int) -> int:
        """direction 0 = right edge of (r, c), 1 = down edge."""
        return 2 * self.vertex_id(r, c) + direction

    def horizontal_edge(self, r: int, c: int) -> int:
        """Edge between (r, c) and (r, c+1)."""
        return self.edge_id(r, c, 0)

    def vertical_edge(self, r: int, c: int) -> int:
        """Edge between (r, c) and (r+1, c)."""
        return self.edge_id(r, c, 1)


def build_grid(n: int) -> TorusGrid:
    """The torus grid of odd dimension n >= 3."""
    if n < 3:
        raise ValueError("grid dimension must be >= 3")
    if n % 2 == 0:
        raise ValueError("grid dimension must be odd")
    return TorusGrid(n)


def path_graph(k: int) -> GraphTopology:
    """k-vertex path, a test fixture."""
    return GraphTopology(k, [(i, i + 1) for i in range(k - 1)])


def cycle_graph(k: int) -> GraphTopology:
    return GraphTopology(k, [(i, (i + 1) % k) for i in range(k)])


# ---------------------------------------------------------------------------
# Flat-array kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _component_labels(inc_ptr, inc_eid, inc_other, alive, n_vertices):
    labels = np.full(n_vertices, -1, dtype=np.int32)
    queue = np.empty(n_vertices, dtype=np.int32)
    comp = 0
    for start in range(n_vertices):
        if labels[start] >= 0:
            continue
        labels[start] = comp
        queue[0] = start
        head, tail = 0, 1
        while head < tail:
            v = queue[head]
            head += 1
            for k in range(inc_ptr[v], inc_ptr[v + 1]):
                if not alive[inc_eid[k]]:
                    continue
                w = inc_other[k]
                if labels[w] < 0:
                    labels[w] = comp
                    queue[tail] = w
                    tail += 1
        comp += 1
    return labels


@njit(cache=True)
def _bridge_mask(inc_ptr, inc_eid, inc_other, alive, n_vertices, n_edges):
    # iterative Tarjan low-link; parent skipping is by edge id so parallel
    # edges are handled correctly
    disc = np.full(n_vertices, -1, dtype=np.int32)
    low = np.zeros(n_vertices, dtype=np.int32)
    out = np.zeros(n_edges, dtype=np.uint8)
    stack_v = np.empty(n_vertices + 1, dtype=np.int32)
    stack_pe = np.empty(n_vertices + 1, dtype=np.int32)
    stack_it = np.empty(n_vertices + 1, dtype=np.int32)
    timer = 0
    for root in range(n_vertices):
        if disc[root] >= 0:
            continue
        sp = 0
        stack_v[0] = root
        stack_pe[0] = -1
        stack_it[0] = inc_ptr[root]
        disc[root] = timer
        low[root] = timer
        timer += 1
        while sp >= 0:
            v = stack_v[sp]
            k = stack_it[sp]
            if k < inc_ptr[v + 1]:
                stack_it[sp] = k + 1
                eid = inc_eid[k]
                if not alive[eid] or eid == stack_pe[sp]:
                    continue
                w = inc_other[k]
                if disc[w] < 0:
                    disc[w] = timer
                    low[w] = timer
                    timer += 1
                    sp += 1
                    stack_v[sp] = w
                    stack_pe[sp] = eid
                    stack_it[sp] = inc_ptr[w]
                else:
                    if disc[w] < low[v]:
                        low[v] = disc[w]
            else:
                sp -= 1
                if sp >= 0:
                    p = stack_v[sp]
                    if low[v] < low[p]:
                        low[p] = low[v]
                    if low[v] > disc[p]:
                        out[stack_pe[sp + 1]] = 1
        # root done
    return out


def components_mask(top: GraphTopology, alive: np.ndarray) -> np.ndarray:
    return _component_labels(top.inc_ptr, top.inc_eid, top.inc_other,
                             alive, top.n_vertices)


def bridges_mask(top: GraphTopology, alive: np.ndarray) -> np.ndarray:
    return _bridge_mask(top.inc_ptr, top.inc_eid, top.inc_other,
                        alive, top.n_vertices, top.n_edges)


def bridges_oracle(top: GraphTopology, alive: np.ndarray) -> set[int]:
    """Remove-one-edge-and-count-components reference; O(E*(V+E))."""
    base = int(components_mask(top, alive).max()) + 1
    out = set()
    for eid in range(top.n_edges):
        if not alive[eid]:
            continue
        trial = alive.copy()
        trial[eid] = False
        if int(components_mask(top, trial).max()) + 1 > base:
            out.add(eid)
    return out


# ---------------------------------------------------------------------------
# LiveGraph / charges / Tseitin
# ---------------------------------------------------------------------------

def all_one_charge(top: GraphTopology) -> np.ndarray:
    return np.ones(top.n_vertices, dtype=np.uint8)


def all_zero_charge(top: GraphTopology) -> np.ndarray:
    return np.zeros(top.n_vertices, dtype=np.uint8)


class LiveGraph:
    """A topology minus a set of removed edges.  Immutable; queries cached."""

    __slots__ = ("base", "removed", "_alive", "_labels", "_bridges", "_hash")

    def __init__(self, base: GraphTopology, removed: Iterable[int] = ()):
        self.base = base
        self.removed = frozenset(int(e) for e in removed)
        for e in self.removed:
            base.check_var(e)
        self._alive = None
        self._labels = None
        self._bridges = None
        self._hash = None

    @property
    def alive(self) -> np.ndarray:
        if self._alive is None:
            m = np.ones(self.base.n_edges, dtype=np.uint8)
            if self.removed:
                m[list(self.removed)] = 0
            self._alive = m
        return self._alive

    def without(self, edges: Iterable[int]) -> "LiveGraph":
        return LiveGraph(self.base, self.removed | set(edges))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((id(self.base), self.removed))
        return self._hash

    def __eq__(self, other):
        return (isinstance(other, LiveGraph) and other.base is self.base
                and other.removed == self.removed)

    def is_alive(self, eid: int) -> bool:
        return eid not in self.removed

    def component_labels(self) -> np.ndarray:
        if self._labels is None:
            self._labels = components_mask(self.base, self.alive)
        return self._labels

    def live_degree(self, vertex: int) -> int:
        lo, hi = int(self.base.inc_ptr[vertex]), int(self.base.inc_ptr[vertex + 1])
        return int(self.alive[self.base.inc_eid[lo:hi]].sum())


@dataclass(frozen=True)
class TseitinInstance:
    graph: LiveGraph
    charge: np.ndarray  # uint8 per vertex

    def __post_init__(self):
        if len(self.charge) != self.graph.base.n_vertices:
            raise ValueError("charge vector length mismatch")


def components(G: LiveGraph) -> list[frozenset[int]]:
    labels = G.component_labels()
    ncomp = int(labels.max()) + 1
    out: list[set[int]] = [set() for _ in range(ncomp)]
    for v, lab in enumerate(labels):
        out[lab].add(v)
    return [frozenset(s) for s in out]


def giant_component(G: LiveGraph) -> frozenset[int] | None:
    """The unique component with more than half of ALL vertices, if any."""
    labels = G.component_labels()
    counts = np.bincount(labels)
    half = G.base.n_vertices / 2
    winners = np.nonzero(counts > half)[0]
    if len(winners) == 0:
        return None
    lab = int(winners[0])
    return frozenset(int(v) for v in np.nonzero(labels == lab)[0])


def bridges(G: LiveGraph) -> set[int]:
    if G._bridges is None:
        mask = bridges_mask(G.base, G.alive)
        G._bridges = set(int(e) for e in np.nonzero(mask)[0])
    return set(G._bridges)


def is_independent(G: LiveGraph, edge_set: Iterable[int]) -> bool:
    """True iff removing edge_set keeps G connected.  G must be connected."""
    labels = G.component_labels()
    if int(labels.max()) != 0:
        raise ValueError("is_independent is defined for connected graphs")
    trial = G.alive.copy()
    es = list(edge_set)
    if es:
        trial[es] = 0
    return int(components_mask(G.base, trial).max()) == 0


def restrict_charge(alpha: np.ndarray, beta: Restriction, G: LiveGraph) -> np.ndarray:
    """Toggle the charge of a vertex per incident edge set to 1 by beta."""
    out = alpha.copy()
    for e, b in beta.items():
        if not G.is_alive(e):
            raise ValueError(f"edge {e} of the restriction is not live")
        if b == 1:
            u, v = G.base.endpoints(e)
            out[u] ^= 1
            out[v] ^= 1
    return out


def component_charge(G: LiveGraph, alpha: np.ndarray) -> np.ndarray:
    """Per-component mod-2 charge sums, indexed by component label."""
    labels = G.component_labels()
    sums = np.zeros(int(labels.max()) + 1, dtype=np.int64)
    np.add.at(sums, labels, alpha.astype(np.int64))
    return (sums % 2).astype(np.uint8)


def is_nice(G: LiveGraph, alpha: np.ndarray) -> bool:
    """A giant component exists and a component's charge is odd iff giant."""
    labels = G.component_labels()
    counts = np.bincount(labels)
    half = G.base.n_vertices / 2
    giant_labels = np.nonzero(counts > half)[0]
    if len(giant_labels) == 0:
        return False
    parities = component_charge(G, alpha)
    want = np.zeros_like(parities)
    want[giant_labels[0]] = 1
    return bool(np.array_equal(parities, want))


def pushes_contradiction(G: LiveGraph, alpha: np.ndarray, beta: Restriction) -> bool:
    """beta keeps the restricted pair nice."""
    G2 = G.without(beta.support)
    return is_nice(G2, restrict_charge(alpha, beta, G))


def closure_set(G: LiveGraph, edge_set: Iterable[int]) -> frozenset[int]:
    """One bridge-adding round: S together with all bridges of G - S.

    One round is a fixed point: removing every bridge of a graph leaves its
    2-edge-connected components, which are bridgeless.
    """
    S = frozenset(edge_set)
    return S | frozenset(bridges(G.without(S)))


def forced_bridge_value(G: LiveGraph, alpha: np.ndarray, e: int) -> int:
    """The unique value of bridge e keeping the charge split lawful.

    Both cases of the split (component charge even or odd) force the smaller
    side C2 to even induced charge; ties pick the side holding the smallest
    vertex id as C1.
    """
    if e not in bridges(G):
        raise NotABridge(f"edge {e} is not a bridge")
    u, v = G.base.endpoints(e)
    cut = G.without([e])
    labels = cut.component_labels()
    lu, lv = int(labels[u]), int(labels[v])
    size_u = int(np.count_nonzero(labels == lu))
    size_v = int(np.count_nonzero(labels == lv))
    if size_u != size_v:
        side2 = lu if size_u < size_v else lv
    else:
        # C1 is the side containing the lexicographically smallest vertex
        min_u = int(np.nonzero(labels == lu)[0][0])
        min_v = int(np.nonzero(labels == lv)[0][0])
        side2 = lv if min_u < min_v else lu
    s2 = int(alpha[labels == side2].sum()) % 2
    return s2


class ClosureError(ValueError):
    pass


def close_restriction(G: LiveGraph, alpha: np.ndarray, beta: Restriction) -> Restriction:
    """Extend beta by the forced value of every bridge of G - supp(beta).

    No preconditions beyond live support; callers who need the contract of
    the closure definition use :func:`closure_restriction`.
    """
    stripped = G.without(beta.support)
    alpha2 = restrict_charge(alpha, beta, G)
    extra = {}
    for e in sorted(bridges(stripped)):
        extra[e] = forced_bridge_value(stripped, alpha2, e)
    if not extra:
        return beta
    return beta.compose(Restriction(extra))


def closure_restriction(G: LiveGraph, alpha: np.ndarray, beta: Restriction) -> Restriction:
    """The unique forced extension of an independent restriction.

    Preconditions: supp(beta) is G-independent, and removing its closure
    still leaves a giant component.  Violations raise.
    """
    if not is_independent(G, beta.support):
        raise ClosureError("restriction support is not independent")
    closed = close_restriction(G, alpha, beta)
    if giant_component(G.without(closed.support)) is None:
        raise ClosureError("closure destroys the giant component")
    return closed


# ---------------------------------------------------------------------------
# Clauses, DIMACS, solution sampling
# ---------------------------------------------------------------------------

def tseitin_clauses(inst: TseitinInstance) -> list[tuple[Literal, ...]]:
    """Per degree-4 vertex, the 8 width-4 clauses excluding bad parities."""
    G = inst.graph
    out: list[tuple[Literal, ...]] = []
    for v in range(G.base.n_vertices):
        edges = [e for e in G.base.incident_edges(v) if G.is_alive(e)]
        if len(edges) != 4:
            raise ValueError(f"vertex {v} has live degree {len(edges)}, need 4")
        edges.sort()
        for a in range(16):
            bits = [(a >> i) & 1 for i in range(4)]
            if sum(bits) % 2 != int(inst.charge[v]):
                out.append(tuple(Literal(edges[i], bits[i] == 0) for i in range(4)))
    return out


def to_dimacs(inst: TseitinInstance) -> str:
    clauses = tseitin_clauses(inst)
    nvars = inst.graph.base.n_edges
    lines = [f"p cnf {nvars} {len(clauses)}"]
    for cl in clauses:
        lines.append(" ".join(str(l.var + 1 if l.positive else -(l.var + 1)) for l in cl) + " 0")
    return "\n".join(lines) + "\n"


def is_satisfiable(inst: TseitinInstance) -> bool:
    return not component_charge(inst.graph, inst.charge).any()


def sample_uniform_solution(inst: TseitinInstance, rng) -> dict[int, int]:
    """Uniform satisfying assignment of all live edges.

    Spanning forest per component; the non-forest edges get independent fair
    bits and the forest edges are solved leaf-upward by parity.  Raises when
    some component has odd total charge.
    """
    G, alpha = inst.graph, inst.charge
    if not is_satisfiable(inst):
        raise UnsatisfiableInstance("some component has odd total charge")
    top = G.base
    alive = G.alive
    values: dict[int, int] = {}
    visited = np.zeros(top.n_vertices, dtype=bool)
    parent_edge = np.full(top.n_vertices, -1, dtype=np.int64)
    tree_edges: set[int] = set()
    for root in range(top.n_vertices):
        if visited[root]:
            continue
        order = [root]
        visited[root] = True
        head = 0
        while head < len(order):
            v = order[head]
            head += 1
            for k in range(int(top.inc_ptr[v]), int(top.inc_ptr[v + 1])):
                eid = int(top.inc_eid[k])
                if not alive[eid]:
                    continue
                w = int(top.inc_other[k])
                if not visited[w]:
                    visited[w] = True
                    parent_edge[w] = eid
                    tree_edges.add(eid)
                    order.append(w)
        # free bits on non-tree edges of this component, then solve upward
        for v in order:
            for eid in top.incident_edges(v):
                if alive[eid] and eid not in tree_edges and eid not in values:
                    values[eid] = int(rng.integers(0, 2))
        for v in reversed(order):
            pe = int(parent_edge[v])
            if pe < 0:
                continue
            acc = int(alpha[v])
            for eid in top.incident_edges(v):
                if alive[eid] and eid != pe:
                    acc ^= values[eid]
            values[pe] = acc
        # root parity holds because the component charge is even
    return values


def check_solution(inst: TseitinInstance, values: dict[int, int]) -> bool:
    G, alpha = inst.graph, inst.charge
    for v in range(G.base.n_vertices):
        acc = 0
        for eid in G.base.incident_edges(v):
            if G.is_alive(eid):
                acc ^= values[eid]
        if acc != int(alpha[v]):
            return False
    return True
