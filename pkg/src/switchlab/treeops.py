"""The nonstandard decision-tree restriction procedures and their checkers.

Two procedures live here.  Restricting by a small partial assignment closes
the assignment (forced bridge values), substitutes assigned variables and
keeps both children elsewhere.  Restricting by a full grid restriction first
rewrites the tree over the projected variables, then prunes: a queried
variable that is a bridge of the projected graph keeps only the child whose
value keeps the contradiction in the giant component.

Trees fed to these procedures are expected to be good: depth below the
context bound and every branch an independent edge set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gridgraph
from .boolcore import (STAR, Branch, DecisionTree, Leaf, Node, Restriction,
                       branches, depth, is_constant)
from .gridgraph import LiveGraph
from .restrictions import Fixed, GridRestriction, Mapped


class PruneDeadEnd(RuntimeError):
    """Neither value of a queried bridge keeps the pair nice.

    Cannot occur when tree depth is small next to the grid dimension; raised
    as a diagnostic rather than resolved by guessing.
    """


class PreconditionError(ValueError):
    pass


class LemmaViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class GoodTreeContext:
    graph: LiveGraph
    charge: np.ndarray
    k: int


def is_good_tree(tree: DecisionTree, ctx: GoodTreeContext) -> bool:
    """depth < k and every branch queries an independent edge set."""
    if depth(tree) >= ctx.k:
        return False
    return all(gridgraph.is_independent(ctx.graph, br.variables)
               for br in branches(tree))


# ---------------------------------------------------------------------------
# Partial restriction with closure
# ---------------------------------------------------------------------------

class _Closer:
    """Closure steps over a fixed (graph, charge); memoizes by support items."""

    def __init__(self, graph: LiveGraph, charge: np.ndarray):
        self.graph = graph
        self.charge = charge
        self._memo: dict[frozenset, Restriction] = {}

    def close(self, beta: Restriction) -> Restriction:
        key = frozenset(beta.items())
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        closed = gridgraph.close_restriction(self.graph, self.charge, beta)
        stripped = self.graph.without(closed.support)
        if not gridgraph.is_nice(stripped, gridgraph.restrict_charge(self.charge, closed, self.graph)):
            raise PruneDeadEnd(
                f"closure of a support of size {len(closed)} leaves a non-nice pair")
        self._memo[key] = closed
        return closed


def restrict_tree_partial(tree: DecisionTree, beta: Restriction,
                          ctx: GoodTreeContext, strict: bool = False) -> DecisionTree:
    """Close beta, then substitute assigned variables and keep the rest.

    Every recursive extension is re-closed, so bridge values forced by
    earlier queries are substituted rather than queried.  ``strict`` also
    enforces the asymptotic depth precondition (k <= n/10), which desk-scale
    fixtures deliberately violate.
    """
    if strict:
        n = getattr(ctx.graph.base, "n", None)
        if n is not None and depth(tree) > n / 10:
            raise PreconditionError(f"tree depth {depth(tree)} > n/10 = {n / 10}")
    if not gridgraph.pushes_contradiction(ctx.graph, ctx.charge, beta):
        raise PreconditionError("restriction does not push the contradiction")
    closer = _Closer(ctx.graph, ctx.charge)

    def go(node: DecisionTree, closed: Restriction) -> DecisionTree:
        if isinstance(node, Leaf):
            return node
        b = closed.value(node.var)
        if b != STAR:
            return go(node.child(b), closed)
        return Node(node.var,
                    go(node.child0, closer.close(closed.with_value(node.var, 0))),
                    go(node.child1, closer.close(closed.with_value(node.var, 1))))

    return go(tree, closer.close(beta))


# ---------------------------------------------------------------------------
# Full (grid) restriction: rewrite, short-circuit, prune
# ---------------------------------------------------------------------------

def _preprocess(tree: DecisionTree, rho: GridRestriction) -> DecisionTree:
    """Substitute fixed edges, relabel live ones, fold polarity, drop repeats."""

    def go(node: DecisionTree, seen: dict[int, int]) -> DecisionTree:
        if isinstance(node, Leaf):
            return node
        act = rho.apply(node.var)
        if isinstance(act, Fixed):
            return go(node.child(act.bit), seen)
        v, neg = act.new_var, int(act.negated)
        if v in seen:
            return go(node.child(seen[v] ^ neg), seen)
        return Node(v,
                    go(node.child(0 ^ neg), {**seen, v: 0}),
                    go(node.child(1 ^ neg), {**seen, v: 1}))

    return go(tree, {})


def restrict_tree_full(tree: DecisionTree, rho: GridRestriction,
                       ctx: GoodTreeContext, strict: bool = False) -> DecisionTree:
    """The full-restriction procedure: preprocess, then prune on the new grid."""
    if not is_good_tree(tree, ctx):
        raise PreconditionError("input tree is not good for its context")
    if strict and ctx.k > rho.params.m / 10:
        raise PreconditionError(f"k={ctx.k} exceeds m/10 = {rho.params.m / 10}")
    inst = rho.new_instance
    work = _preprocess(tree, rho)

    def prune(node: DecisionTree, pi: Restriction) -> DecisionTree:
        if isinstance(node, Leaf):
            return node
        stripped = inst.graph.without(pi.support)
        if node.var in gridgraph.bridges(stripped):
            keep = None
            for b in (0, 1):
                ext = pi.with_value(node.var, b)
                if gridgraph.pushes_contradiction(inst.graph, inst.charge, ext):
                    keep = b
                    break
            if keep is None:
                raise PruneDeadEnd(f"no value of bridge {node.var} keeps the pair nice")
            return prune(node.child(keep), pi.with_value(node.var, keep))
        return Node(node.var,
                    prune(node.child0, pi.with_value(node.var, 0)),
                    prune(node.child1, pi.with_value(node.var, 1)))

    return prune(work, Restriction())


# ---------------------------------------------------------------------------
# Branch bookkeeping for the two lemma checkers
# ---------------------------------------------------------------------------

class ProjectionConflict(Exception):
    pass


def project_branch(rho: GridRestriction, br: Branch) -> Restriction:
    """Branch steps as an assignment of projected variables.

    Raises ProjectionConflict when the branch contradicts a fixed value or
    assigns one new variable both ways through different edges.
    """
    out: dict[int, int] = {}
    for e, b in br.steps:
        act = rho.apply(e)
        if isinstance(act, Fixed):
            if act.bit != b:
                raise ProjectionConflict(f"edge {e} fixed to {act.bit}, branch wants {b}")
            continue
        val = b ^ int(act.negated)
        if out.get(act.new_var, val) != val:
            raise ProjectionConflict(f"new variable {act.new_var} assigned both ways")
        out[act.new_var] = val
    return Restriction(out)


@dataclass
class SurvivalReport:
    total: int
    survivors: int = 0
    mismatches: list[tuple[Branch, bool, bool]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def summary(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        return (f"survival characterization over {self.total} branches "
                f"({self.survivors} survivors): {verdict}"
                + ("" if self.ok else f" ({len(self.mismatches)} mismatches)"))


def branch_survives_full(br: Branch, rho: GridRestriction, ctx: GoodTreeContext) -> bool:
    """Mirror the full-restriction procedure along one original branch.

    The branch dies when it contradicts a fixed value, assigns a projected
    variable both ways, or takes a pruned bridge against its forced value.
    """
    inst = rho.new_instance
    seen: dict[int, int] = {}
    pi = Restriction()
    for e, b in br.steps:
        act = rho.apply(e)
        if isinstance(act, Fixed):
            if act.bit != b:
                return False
            continue
        v, val = act.new_var, b ^ int(act.negated)
        if v in seen:
            if seen[v] != val:
                return False
            continue
        stripped = inst.graph.without(pi.support)
        if v in gridgraph.bridges(stripped):
            forced = None
            for bb in (0, 1):
                if gridgraph.pushes_contradiction(inst.graph, inst.charge,
                                                  pi.with_value(v, bb)):
                    forced = bb
                    break
            if forced is None:
                raise PruneDeadEnd(f"no value of bridge {v} keeps the pair nice")
            if val != forced:
                return False
        seen[v] = val
        pi = pi.with_value(v, val)
    return True


def branch_survives_partial(br: Branch, beta: Restriction,
                            ctx: GoodTreeContext) -> bool:
    """Mirror the partial-restriction procedure along one original branch."""
    closer = _Closer(ctx.graph, ctx.charge)
    closed = closer.close(beta)
    for e, b in br.steps:
        val = closed.value(e)
        if val != STAR:
            if val != b:
                return False
            continue
        try:
            closed = closer.close(closed.with_value(e, b))
        except PruneDeadEnd:
            return False
    return True


def check_survival_full(tree: DecisionTree, rho: GridRestriction,
                        ctx: GoodTreeContext) -> SurvivalReport:
    """Survival of each branch equals the restriction-pair characterization.

    A branch survives when the procedure's walk along it reaches its leaf;
    the characterization demands the branch be consistent with the fixed
    values, project without conflict, and push the contradiction on the
    projected instance.  Surviving branches must also appear beneath the
    restricted tree as sub-restrictions of their projection.
    """
    restricted = restrict_tree_full(tree, rho, ctx)
    inst = rho.new_instance
    rbranches = [b.as_restriction() for b in branches(restricted)]
    report = SurvivalReport(total=0)
    for br in branches(tree):
        report.total += 1
        survives = branch_survives_full(br, rho, ctx)
        try:
            proj = project_branch(rho, br)
            characterized = gridgraph.pushes_contradiction(inst.graph, inst.charge, proj)
        except ProjectionConflict:
            characterized = False
        if survives:
            report.survivors += 1
            proj = project_branch(rho, br)
            assert any(rb.is_sub_restriction_of(proj) for rb in rbranches), \
                "survivor has no image branch in the restricted tree"
        if survives != characterized:
            report.mismatches.append((br, survives, characterized))
    return report


def map_branch_back(tree: DecisionTree, rho: GridRestriction,
                    ctx: GoodTreeContext, branch_prime: Branch) -> Branch:
    """The unique original branch beneath a branch of the restricted tree.

    The original branch must be a sub-restriction of rho composed with the
    closure of the restricted branch, with the same leaf value.  Uniqueness
    failure is an internal invariant violation, not a recoverable error.
    """
    restricted = restrict_tree_full(tree, rho, ctx)
    if branch_prime not in branches(restricted):
        raise ValueError("branch does not belong to the restricted tree")
    inst = rho.new_instance
    closed = gridgraph.close_restriction(inst.graph, inst.charge,
                                         branch_prime.as_restriction())
    hits = []
    for br in branches(tree):
        if br.leaf != branch_prime.leaf:
            continue
        ok = True
        for e, b in br.steps:
            act = rho.apply(e)
            if isinstance(act, Fixed):
                if act.bit != b:
                    ok = False
                    break
            else:
                want = closed.value(act.new_var)
                if want == STAR or want ^ int(act.negated) != b:
                    ok = False
                    break
        if ok:
            hits.append(br)
    if len(hits) != 1:
        raise LemmaViolation(
            f"expected a unique pre-image branch, found {len(hits)}")
    return hits[0]


# ---------------------------------------------------------------------------
# Consistency predicates over good trees
# ---------------------------------------------------------------------------

def _forces(tree: DecisionTree, br: Branch, ctx: GoodTreeContext, want: int) -> bool:
    reduced = restrict_tree_partial(tree, br.as_restriction(), ctx)
    return is_constant(reduced, want)


def _good_or_raise(ctx: GoodTreeContext, *trees: DecisionTree) -> None:
    for t in trees:
        if not is_good_tree(t, ctx):
            raise PreconditionError("consistency predicates need good trees")


def check_consistent(t1: DecisionTree, t2: DecisionTree, ctx: GoodTreeContext) -> bool:
    _good_or_raise(ctx, t1, t2)
    return (all(_forces(t2, br, ctx, br.leaf) for br in branches(t1))
            and all(_forces(t1, br, ctx, br.leaf) for br in branches(t2)))


def check_neg_consistent(t1: DecisionTree, t2: DecisionTree, ctx: GoodTreeContext) -> bool:
    _good_or_raise(ctx, t1, t2)
    return (all(_forces(t2, br, ctx, 1 - br.leaf) for br in branches(t1))
            and all(_forces(t1, br, ctx, 1 - br.leaf) for br in branches(t2)))


def check_represents(tree: DecisionTree, parts: list[DecisionTree],
                     ctx: GoodTreeContext) -> bool:
    """tree represents the disjunction of parts: 0-branches kill every part,
    1-branches satisfy at least one."""
    _good_or_raise(ctx, tree, *parts)
    for br in branches(tree, 0):
        if not all(_forces(p, br, ctx, 0) for p in parts):
            return False
    for br in branches(tree, 1):
        if not any(_forces(p, br, ctx, 1) for p in parts):
            return False
    return True
