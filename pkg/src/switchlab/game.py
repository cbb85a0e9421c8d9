"""The sampling game and the random-path algorithms.

The game realizes a grid restriction one adversary-chosen variable at a
time.  The sampler tracks chosen/eliminated centers per subgrid, commits
uniform values to non-stars, assigns forced bridge values as soon as the
relevant side of the cut has fully known auxiliary charges, and marks
whole paths live ("residual" stars) when both endpoint centers are chosen.

Strategy I reproduces the grid-restriction distribution exactly; strategy
II resolves only the associated center's subgrid and therefore makes stars
only more likely (the dominance direction the main lemma needs).

Stars are counted per projected variable: the dedup key of a star is the
adjacent-subgrid pair it connects, i.e. the projected edge id.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import gridgraph
from .boolcore import (CONST_ONE, STAR, ConstOne, DecisionTree, Dnf, Leaf,
                       Node, Restriction, restrict_dnf)
from .canonical import _cdt_independent_closed, build_cdt
from .gridgraph import TorusGrid, components_mask, bridges_mask
from .restrictions import GridParams, GridRestriction, PathAtlas, build_path_atlas, defect_center
from .treeops import GoodTreeContext, _Closer


class GameContractError(RuntimeError):
    pass


class GameDeadlock(RuntimeError):
    """A value is needed that depends on still-open center choices."""


@dataclass
class StarDecision:
    is_star: bool
    value: int | None = None
    kind: str | None = None          # good | bad | residual for stars
    new_residual_classes: int = 0


@dataclass
class PathRecord:
    """Per-run star ledger for the grid algorithms."""

    segments: list[tuple[int, tuple[tuple[int, str], ...]]] = field(default_factory=list)
    good: int = 0
    bad: int = 0
    residual: int = 0
    plain: int = 0               # uniform-mode stars carry no grid class
    path_len: int = 0
    iterations: int = 0

    @property
    def eta_len(self) -> int:
        return self.good + self.bad + self.residual + self.plain

    def count(self, kind: str) -> None:
        if kind == "good":
            self.good += 1
        elif kind == "bad":
            self.bad += 1
        elif kind == "residual":
            self.residual += 1
        elif kind == "star":
            self.plain += 1
        else:
            raise ValueError(kind)

    def check_invariants(self, delta: int, residual_cap: int) -> None:
        assert self.path_len <= self.eta_len
        assert self.residual <= residual_cap * max(1, self.good + self.bad), \
            "residual stars exceed the per-star allowance"


class GameState:
    """Sampler state for one run of the game over the full grid."""

    def __init__(self, params: GridParams, strategy: str, rng):
        if strategy not in ("I", "II"):
            raise ValueError("strategy must be 'I' or 'II'")
        if params.m % 2 == 0:
            raise ValueError("the game needs an odd number of subgrids per axis")
        self.params = params
        self.strategy = strategy
        self.rng = rng
        self.atlas: PathAtlas = build_path_atlas(params)
        self.top: TorusGrid = self.atlas.grid
        self.new_grid = TorusGrid(params.m)
        self.residual_cap = 6 if strategy == "I" else 3
        self.values: dict[int, int] = {}
        self.stars: dict[int, int] = {}          # edge -> class (projected edge id)
        self.star_kind: dict[int, str] = {}
        self.chosen: dict[tuple[int, int], int | None] = {}
        self.eliminated: dict[tuple[int, int], set[int]] = {}
        m = params.m
        for A in range(m):
            for B in range(m):
                self.chosen[(A, B)] = None
                self.eliminated[(A, B)] = set()
        n_v = self.top.n_vertices
        self.alive = np.ones(self.top.n_edges, dtype=np.uint8)
        self.toggles = np.zeros(n_v, dtype=np.uint8)
        # auxiliary charge knowledge: non-centers are 1, centers resolve later
        self.status_known = np.ones(n_v, dtype=bool)
        self.status_val = np.ones(n_v, dtype=np.uint8)
        for vid in self.atlas.center_info:
            self.status_known[vid] = False
        self._bridge_cache: np.ndarray | None = None
        self.transcript: list[dict] = []
        self.pending_residuals = 0

    # -- bookkeeping ---------------------------------------------------------

    def _bridges(self) -> np.ndarray:
        if self._bridge_cache is None:
            self._bridge_cache = bridges_mask(self.top, self.alive)
        return self._bridge_cache

    def is_unset(self, e: int) -> bool:
        return e not in self.values and e not in self.stars

    def is_bridge(self, e: int) -> bool:
        return bool(self._bridges()[e]) and e not in self.stars

    def _commit(self, e: int, b: int) -> None:
        self.values[e] = b
        self.alive[e] = 0
        self._bridge_cache = None
        if b:
            u, v = self.top.endpoints(e)
            self.toggles[u] ^= 1
            self.toggles[v] ^= 1

    def class_of(self, sg1: tuple[int, int], sg2: tuple[int, int]) -> int:
        """The projected edge id of an adjacent subgrid pair."""
        m = self.params.m
        (a1, b1), (a2, b2) = sg1, sg2
        if b1 == b2:
            if (a1 + 1) % m == a2:
                return self.new_grid.vertical_edge(a1, b1)
            if (a2 + 1) % m == a1:
                return self.new_grid.vertical_edge(a2, b2)
        if a1 == a2:
            if (b1 + 1) % m == b2:
                return self.new_grid.horizontal_edge(a1, b1)
            if (b2 + 1) % m == b1:
                return self.new_grid.horizontal_edge(a2, b2)
        raise ValueError(f"subgrids {sg1} and {sg2} are not adjacent")

    def open_centers(self, sg: tuple[int, int]) -> list[int]:
        if self.chosen[sg] is not None:
            return [self.chosen[sg]]
        return [k for k in range(1, self.params.delta + 1)
                if k not in self.eliminated[sg]]

    def _mark_star(self, e: int, cls: int, kind: str) -> None:
        self.stars[e] = cls
        self.star_kind[e] = kind

    def _refresh_center_status(self, sg: tuple[int, int]) -> None:
        """Recompute charge knowledge for a subgrid's centers.

        Chosen centers carry 0, non-chosen ones 1, except the defect vertex
        (the lowest non-chosen center of subgrid (0,0)) which carries 0 to
        even out the total auxiliary charge.
        """
        d = self.params.delta
        ch = self.chosen[sg]
        elim = self.eliminated[sg]
        for k in range(1, d + 1):
            vid = self.atlas.center_vertex[(sg[0], sg[1], k)]
            if ch is not None:
                if k == ch:
                    self.status_known[vid], self.status_val[vid] = True, 0
                else:
                    self._set_nonchosen_status(sg, k, vid)
            elif k in elim:
                self._set_nonchosen_status(sg, k, vid)
            else:
                self.status_known[vid] = False

    def _set_nonchosen_status(self, sg, k, vid) -> None:
        if sg != (0, 0):
            self.status_known[vid], self.status_val[vid] = True, 1
            return
        # subgrid (0,0): is this center the defect vertex?
        if k == 1:
            self.status_known[vid], self.status_val[vid] = True, 0
        elif k == 2:
            c1 = self.chosen[(0, 0)]
            if c1 == 1:
                self.status_known[vid], self.status_val[vid] = True, 0
            elif 1 in self.eliminated[(0, 0)] or (c1 is not None and c1 != 1):
                self.status_known[vid], self.status_val[vid] = True, 1
            else:
                self.status_known[vid] = False
        else:
            self.status_known[vid], self.status_val[vid] = True, 1

    def _eliminate(self, sg: tuple[int, int], ks) -> None:
        self.eliminated[sg].update(k for k in ks if self.chosen[sg] != k)
        self._refresh_center_status(sg)

    def _choose(self, sg: tuple[int, int], k: int) -> int:
        """Commit a center choice; returns the number of paths made live."""
        assert self.chosen[sg] is None
        self.chosen[sg] = k
        self.eliminated[sg] = {j for j in range(1, self.params.delta + 1) if j != k}
        self._refresh_center_status(sg)
        made_live = 0
        m = self.params.m
        A, B = sg
        for sg2 in (((A + 1) % m, B), ((A - 1) % m, B), (A, (B + 1) % m), (A, (B - 1) % m)):
            c2 = self.chosen[sg2]
            if c2 is None:
                continue
            made_live += self._star_path(sg, k, sg2, c2)
        return made_live

    def _star_path(self, sg1, k1, sg2, k2) -> int:
        """Mark the path between two chosen centers live; residual stars."""
        c1 = self.atlas.center_vertex[(sg1[0], sg1[1], k1)]
        c2 = self.atlas.center_vertex[(sg2[0], sg2[1], k2)]
        key = self.atlas.path_between(c1, c2)
        assert key is not None
        cls = self.class_of(sg1, sg2)
        fresh = 0
        for e in self.atlas.paths[key]:
            if e in self.values:
                continue
            if e not in self.stars:
                self._mark_star(e, cls, "residual")
                fresh = 1
        return fresh

    # -- bridge forcing ------------------------------------------------------

    def force_bridges(self) -> None:
        """Assign every decidable bridge the value evening out its known side."""
        while True:
            mask = self._bridges()
            assigned = False
            for e in np.nonzero(mask)[0]:
                e = int(e)
                if e in self.stars:
                    continue
                b = self._forced_value(e)
                if b is None:
                    continue
                self._commit(e, b)
                self.transcript.append({"event": "forced_bridge", "edge": e, "value": b})
                assigned = True
                break
            if not assigned:
                return

    def _forced_value(self, e: int) -> int | None:
        trial = self.alive.copy()
        trial[e] = 0
        labels = components_mask(self.top, trial)
        u, v = self.top.endpoints(e)
        full = components_mask(self.top, self.alive)
        comp_mask = full == full[u]
        parities = []
        for side_vertex in (u, v):
            side = (labels == labels[side_vertex]) & comp_mask
            if bool(self.status_known[side].all()):
                parities.append(int(self.status_val[side].sum()
                                    + self.toggles[side].sum()) % 2)
        if not parities:
            return None
        # both sides known: the component total must be even or no value works
        assert len(set(parities)) == 1, "bridge component has odd known charge"
        return parities[0]

    # -- the sampler ---------------------------------------------------------

    def feed(self, e: int) -> StarDecision:
        """One round of the game: the adversary submits an unset non-bridge."""
        self.top.check_var(e)
        if not self.is_unset(e):
            raise GameContractError(f"edge {e} was already set")
        if self.is_bridge(e):
            raise GameContractError(f"edge {e} is a bridge; the adversary may not submit it")
        assoc = self.atlas.associated_center(e)
        if assoc is None:
            return self._decide_nonstar(e)
        center, far, _dist = assoc
        sgA = self.atlas.center_info[center][:2]
        kA = self.atlas.center_info[center][2]
        far_info = {self.atlas.center_info[c] for c in far}
        sgB_set = {(a, b) for a, b, _ in far_info}
        assert len(sgB_set) == 1, "far endpoints must share a subgrid"
        sgB = sgB_set.pop()
        Ks = {k for _, _, k in far_info}
        if self.strategy == "I":
            return self._feed_approach1(e, sgA, kA, sgB, Ks)
        return self._feed_approach2(e, sgA, kA, sgB, Ks)

    def _decide_nonstar(self, e: int, kind: str | None = None) -> StarDecision:
        b = int(self.rng.integers(0, 2))
        self._commit(e, b)
        self.force_bridges()
        self.transcript.append({"event": "nonstar", "edge": e, "value": b})
        return StarDecision(False, value=b, kind=kind)

    def _decide_star(self, e: int, sgA, sgB, kind: str) -> StarDecision:
        cls = self.class_of(sgA, sgB)
        self._mark_star(e, cls, kind)
        made = self.pending_residuals
        self.pending_residuals = 0
        self.force_bridges()
        self.transcript.append({"event": "star", "edge": e, "class": cls, "kind": kind})
        return StarDecision(True, kind=kind, new_residual_classes=made)

    def _resolve_A(self, sgA, kA) -> tuple[bool, str]:
        """Decide whether the associated center is chosen; returns (chosen?, kind).

        Stars on a center decided before this step are classified residual:
        they spend no fresh choice randomness, so the good/bad ledger only
        charges choice-triggering stars (at most one per subgrid).
        """
        ch = self.chosen[sgA]
        if ch is not None:
            return ch == kA, "residual"
        if kA in self.eliminated[sgA]:
            return False, "residual"
        r = len(self.open_centers(sgA))
        kind = "good" if r >= self.params.delta / 2 else "bad"
        if self.rng.random() < 1.0 / r:
            self.pending_residuals += self._choose(sgA, kA)
            return True, kind
        self._eliminate(sgA, [kA])
        return False, kind

    def _feed_approach1(self, e, sgA, kA, sgB, Ks) -> StarDecision:
        a_chosen, kind = self._resolve_A(sgA, kA)
        if not a_chosen:
            return self._decide_nonstar(e)
        chB = self.chosen[sgB]
        if chB is not None:
            if chB in Ks:
                return self._decide_star(e, sgA, sgB, kind)
            return self._decide_nonstar(e)
        U = set(self.open_centers(sgB))
        hit = U & Ks
        if not hit:
            return self._decide_nonstar(e)
        if self.rng.random() < len(hit) / len(U):
            self._eliminate(sgB, U - Ks)
            return self._decide_star(e, sgA, sgB, kind)
        self._eliminate(sgB, hit)
        return self._decide_nonstar(e)

    def _feed_approach2(self, e, sgA, kA, sgB, Ks) -> StarDecision:
        a_chosen, kind = self._resolve_A(sgA, kA)
        if not a_chosen:
            return self._decide_nonstar(e)
        if set(self.open_centers(sgB)) & Ks:
            return self._decide_star(e, sgA, sgB, kind)
        return self._decide_nonstar(e)

    # -- endgame -------------------------------------------------------------

    def finalize(self) -> tuple[dict[int, int], set[int]]:
        """Resolve remaining subgrids, star live paths, solve the rest.

        Returns (values, star set); together they are the sampled
        restriction.  Under strategy I its law matches direct sampling.
        """
        for sg in sorted(self.chosen):
            if self.chosen[sg] is None:
                opens = self.open_centers(sg)
                self._choose(sg, opens[int(self.rng.integers(0, len(opens)))])
        self.pending_residuals = 0
        self.force_bridges()
        assert self.status_known.all()
        residual = (self.status_val ^ self.toggles).astype(np.uint8)
        live = gridgraph.LiveGraph(self.top, self.values.keys())
        inst = gridgraph.TseitinInstance(live, residual)
        solution = gridgraph.sample_uniform_solution(inst, self.rng)
        for e, b in solution.items():
            if e not in self.stars:
                self._commit(e, b)
        return dict(self.values), set(self.stars)

    def dump_transcript(self) -> str:
        return json.dumps({"strategy": self.strategy, "events": self.transcript},
                          sort_keys=True)


def sampler_step(state: GameState, e: int) -> StarDecision:
    """One adversary move; the strategy and randomness live on the state."""
    return state.feed(e)


# ---------------------------------------------------------------------------
# Algorithm A (uniform and grid modes)
# ---------------------------------------------------------------------------

@dataclass
class CommonTrace:
    """The common tree the algorithms grow: one entry per exhaustive block."""

    blocks: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)


class _Stream:
    def __init__(self, bits):
        self.bits = list(bits)
        self.pos = 0

    def remaining(self) -> int:
        return len(self.bits) - self.pos

    def read(self) -> int:
        b = self.bits[self.pos]
        self.pos += 1
        return int(b)


def run_algorithm_A(family, rho: Restriction, x_bits, y_bits, ell: int
                    ) -> tuple[CommonTrace, list[tuple[int, int]]]:
    """Uniform-mode random-path algorithm.

    Follows the restriction through each member's canonical tree, reading a
    direction bit from x at every star.  Reaching a leaf restores the x
    cursor and moves on; hitting ell+1 stars spends ell+1 bits of y on the
    exhaustive block and extends the common path.
    """
    x, y = _Stream(x_bits), _Stream(y_bits)
    pi: dict[int, int] = {}
    path: list[tuple[int, int]] = []
    trace = CommonTrace()
    i = 0
    while i < len(family) and x.remaining() > 0 and y.remaining() > 0:
        reduced = restrict_dnf(family[i], Restriction(pi))
        tree = Leaf(1) if isinstance(reduced, ConstOne) else build_cdt(reduced)
        node = tree
        stars: list[int] = []
        x_start = x.pos
        exhausted = False
        while isinstance(node, Node):
            v = node.var
            rv = rho.value(v)
            if rv != STAR:
                node = node.child(rv)
                continue
            if x.remaining() == 0:
                exhausted = True
                break
            bit = x.read()
            stars.append(v)
            node = node.child(bit)
            if len(stars) == ell + 1:
                break
        if exhausted:
            break
        if len(stars) <= ell and isinstance(node, Leaf):
            x.pos = x_start          # leaf first: hand the bits back
            i += 1
            continue
        trace.blocks.append((i, tuple(stars)))
        for v in stars:
            if y.remaining() == 0:
                return trace, path
            b = y.read()
            pi[v] = b
            path.append((v, b))
    return trace, path


def run_algorithm_A_grid(family, rho: GridRestriction, x_bits, y_bits, ell: int
                         ) -> tuple[CommonTrace, list[tuple[int, int]]]:
    """Grid-mode A: members are projected, trees are independence-pruned.

    Every query of a projected tree is a star (distinct per branch by
    properness); the exhaustive block is walked under closure so forced
    variables merge instead of consuming y.
    """
    from .restrictions import project_dnf
    from .canonical import constant_one_dnf
    inst = rho.new_instance
    closer = _Closer(inst.graph, inst.charge)
    projected = []
    for f in family:
        r = project_dnf(rho, f)
        projected.append(constant_one_dnf(f.width) if isinstance(r, ConstOne) else r)
    x, y = _Stream(x_bits), _Stream(y_bits)
    state = closer.close(Restriction())
    path: list[tuple[int, int]] = []
    trace = CommonTrace()
    i = 0
    while i < len(projected) and x.remaining() > 0 and y.remaining() > 0:
        tree = _cdt_independent_closed(projected[i], closer, state)
        node = tree
        stars: list[int] = []
        x_start = x.pos
        exhausted = False
        while isinstance(node, Node):
            if x.remaining() == 0:
                exhausted = True
                break
            bit = x.read()
            stars.append(node.var)
            node = node.child(bit)
            if len(stars) == ell + 1:
                break
        if exhausted:
            break
        if len(stars) <= ell and isinstance(node, Leaf):
            x.pos = x_start
            i += 1
            continue
        trace.blocks.append((i, tuple(stars)))
        for v in stars:
            if state.value(v) != STAR:
                continue             # forced by closure inside the block
            if y.remaining() == 0:
                return trace, path
            b = y.read()
            path.append((v, b))
            state = closer.close(state.with_value(v, b))
    return trace, path


# ---------------------------------------------------------------------------
# Algorithm A-tilde (uniform and grid modes)
# ---------------------------------------------------------------------------

class _LazyCoins:
    """Persistent per-key coins; the two-coin sampling of the restriction."""

    def __init__(self, rng, p: float):
        self.rng = rng
        self.p = p
        self.value: dict = {}
        self.star: dict = {}

    def direction(self, key) -> int:
        if key not in self.value:
            self.value[key] = int(self.rng.integers(0, 2))
        return self.value[key]

    def is_star(self, key) -> bool:
        if key not in self.star:
            self.star[key] = bool(self.rng.random() < self.p)
        return self.star[key]


def run_algorithm_A_tilde(family, y_bits, ell: int, p: float, rng,
                          coins: "_LazyCoins | None" = None
                          ) -> tuple[CommonTrace, list[tuple[int, int]], PathRecord]:
    """Uniform-mode A-tilde: walk the member tree with persistent coins.

    Each variable owns a star coin (probability p) and a direction coin;
    persistence across iterations is what the restore-the-bits rule of
    algorithm A buys.  Preloaded coins may be injected for exact enumeration.
    """
    if coins is None:
        coins = _LazyCoins(rng, p)
    y = _Stream(y_bits)
    pi: dict[int, int] = {}
    path: list[tuple[int, int]] = []
    trace = CommonTrace()
    record = PathRecord()
    i = 0
    while i < len(family) and y.remaining() > 0:
        record.iterations += 1
        reduced = restrict_dnf(family[i], Restriction(pi))
        tree = Leaf(1) if isinstance(reduced, ConstOne) else build_cdt(reduced)
        node = tree
        etas: list[int] = []
        while isinstance(node, Node):
            v = node.var
            if coins.is_star(v):
                etas.append(v)
                record.count("star")
                if len(etas) == ell + 1:
                    break
            node = node.child(coins.direction(v))
        record.segments.append((i, tuple((v, "star") for v in etas)))
        if len(etas) <= ell:
            i += 1
            continue
        trace.blocks.append((i, tuple(etas)))
        for v in etas:
            if y.remaining() == 0:
                return trace, path, record
            b = y.read()
            pi[v] = b
            path.append((v, b))
            record.path_len += 1
    return trace, path, record


def run_algorithm_A_tilde_grid(family, y_bits, ell: int, state: GameState
                               ) -> tuple[CommonTrace, list[tuple[int, int]], PathRecord]:
    """Grid-mode A-tilde: member trees are walked against the sampling game.

    The walk lazily follows the independent canonical tree of the current
    member: committed values steer silently, unset variables are fed to the
    sampler, stars count once per projected variable.  The exhaustive block
    assigns y bits to the first ell+1 distinct star classes.
    """
    y = _Stream(y_bits)
    rng = state.rng
    pi_classes: dict[int, int] = {}      # projected variable -> path value
    class_rep: dict[int, int] = {}       # projected variable -> defining edge
    walk_coin: dict[int, int] = {}
    path: list[tuple[int, int]] = []
    trace = CommonTrace()
    record = PathRecord()
    iteration_cap = len(family) + len(y_bits) // (ell + 1) + 1
    i = 0
    while i < len(family) and y.remaining() > 0:
        record.iterations += 1
        if record.iterations > iteration_cap:
            raise GameDeadlock("iteration cap exceeded; the run does not settle")
        counted: list[tuple[int, int]] = []   # (class, representative edge)
        seg: list[tuple[int, str]] = []
        terms = family[i].terms
        idx = 0
        hit_cutoff = False
        while idx < len(terms) and not hit_cutoff:
            term_dead = False
            for lit in terms[idx].literals:
                e = lit.var
                direction = None
                if e in state.values:
                    direction = state.values[e]
                elif e in state.stars:
                    cls = state.stars[e]
                    if cls in pi_classes and class_rep.get(cls) == e:
                        direction = pi_classes[cls]
                    else:
                        if cls not in pi_classes and all(c != cls for c, _ in counted):
                            counted.append((cls, e))
                            seg.append((e, state.star_kind[e]))
                            record.count(state.star_kind[e])
                            if len(counted) == ell + 1:
                                hit_cutoff = True
                                break
                        if e not in walk_coin:
                            walk_coin[e] = int(rng.integers(0, 2))
                        direction = walk_coin[e]
                else:
                    if state.is_bridge(e):
                        raise GameDeadlock(
                            f"tree wants bridge {e} whose forced value is undetermined")
                    dec = state.feed(e)
                    if dec.is_star:
                        cls = state.stars[e]
                        if cls not in pi_classes and all(c != cls for c, _ in counted):
                            counted.append((cls, e))
                            seg.append((e, dec.kind))
                            record.count(dec.kind)
                            if len(counted) == ell + 1:
                                hit_cutoff = True
                                break
                        if e not in walk_coin:
                            walk_coin[e] = int(rng.integers(0, 2))
                        direction = walk_coin[e]
                    else:
                        direction = dec.value
                if not lit.satisfied_by(direction):
                    term_dead = True
                    break
            if hit_cutoff:
                break
            if term_dead:
                idx += 1
                continue
            break  # term satisfied: the walk reached a 1-leaf
        record.segments.append((i, tuple(seg)))
        if not hit_cutoff:
            i += 1
            continue
        trace.blocks.append((i, tuple(c for c, _ in counted)))
        for cls, rep in counted:
            if y.remaining() == 0:
                record.check_invariants(state.params.delta, state.residual_cap)
                return trace, path, record
            b = y.read()
            pi_classes[cls] = b
            class_rep[cls] = rep
            path.append((cls, b))
            record.path_len += 1
    record.check_invariants(state.params.delta, state.residual_cap)
    return trace, path, record


# ---------------------------------------------------------------------------
# Stochastic dominance testing
# ---------------------------------------------------------------------------

@dataclass
class DominanceVerdict:
    ok: bool
    worst_margin: float
    band: float
    threshold: int | None

    def summary(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        return (f"dominance test: {verdict} (worst margin {self.worst_margin:+.4f}"
                f" at t={self.threshold}, band {self.band:.4f})")


def dominance_test(samples_a, samples_b, alpha: float = 0.001,
                   min_samples: int = 10 ** 4) -> DominanceVerdict:
    """Does B stochastically dominate A?  Pr[B >= t] >= Pr[A >= t] for all t.

    One-sided empirical comparison with simultaneous DKW bands at joint
    level alpha; PASS unless some threshold shows a significant violation.
    """
    a = np.asarray(samples_a, dtype=np.int64)
    b = np.asarray(samples_b, dtype=np.int64)
    if len(a) < min_samples or len(b) < min_samples:
        raise ValueError(f"need at least {min_samples} samples per side")
    eps = (math.sqrt(math.log(2 / alpha) / (2 * len(a)))
           + math.sqrt(math.log(2 / alpha) / (2 * len(b))))
    worst = math.inf
    worst_t = None
    for t in range(int(min(a.min(), b.min())), int(max(a.max(), b.max())) + 1):
        surv_a = float(np.mean(a >= t))
        surv_b = float(np.mean(b >= t))
        margin = surv_b - surv_a
        if margin < worst:
            worst, worst_t = margin, t
    return DominanceVerdict(worst >= -eps, worst, eps, worst_t)
