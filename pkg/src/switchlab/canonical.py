"""Canonical decision trees of DNFs and canonical common l-partial trees.

The canonical tree consumes terms in order: each pending term contributes a
caterpillar that queries its unresolved variables until the term settles.
Satisfying every literal ends in a 1-leaf; falsifying any literal moves on
to the next term; running out of terms ends in a 0-leaf.

In independent mode the same construction runs against a graph context: the
accumulated branch assignment is kept closed (forced bridge values included)
so no branch ever queries a bridge, and closure-assigned variables are
substituted instead of queried.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

from . import gridgraph
from .boolcore import (CONST_ONE, STAR, ConstOne, DecisionTree, Dnf, LEAF0,
                       LEAF1, Leaf, Node, Restriction, depth, restrict_dnf)
from .treeops import GoodTreeContext, PruneDeadEnd, _Closer


@dataclass(frozen=True)
class DnfFamily:
    """Ordered DNF collection with a shared width bound."""

    dnfs: tuple[Dnf, ...]
    width: int

    def __post_init__(self):
        for f in self.dnfs:
            if f.width > self.width:
                raise ValueError("family member wider than the shared bound")

    def __len__(self) -> int:
        return len(self.dnfs)


def constant_one_dnf(width: int) -> Dnf:
    from .boolcore import Term
    return Dnf((Term(()),), width)


# ---------------------------------------------------------------------------
# Canonical decision trees
# ---------------------------------------------------------------------------

def build_cdt(F: Dnf) -> DecisionTree:
    """Canonical decision tree: terms in order, literals in variable order."""

    terms = F.terms

    def dispatch(idx: int, assign: dict[int, int]) -> DecisionTree:
        while idx < len(terms):
            pending = []
            falsified = False
            for lit in terms[idx].literals:
                val = assign.get(lit.var)
                if val is None:
                    pending.append(lit)
                elif not lit.satisfied_by(val):
                    falsified = True
                    break
            if falsified:
                idx += 1
                continue
            if not pending:
                return LEAF1
            return caterpillar(pending, 0, idx, assign)
        return LEAF0

    def caterpillar(pending, pos, idx, assign) -> DecisionTree:
        if pos == len(pending):
            return LEAF1
        lit = pending[pos]
        sat = 1 if lit.positive else 0
        sat_child = caterpillar(pending, pos + 1, idx, {**assign, lit.var: sat})
        fal_child = dispatch(idx + 1, {**assign, lit.var: 1 - sat})
        if sat == 1:
            return Node(lit.var, fal_child, sat_child)
        return Node(lit.var, sat_child, fal_child)

    return dispatch(0, {})


def build_cdt_independent(F: Dnf, ctx: GoodTreeContext,
                          base: Restriction = Restriction()) -> DecisionTree:
    """Canonical tree whose branches stay independent under closure.

    Requires the base restriction to push the contradiction; all branch
    extensions are closed, so forced values substitute for queries.
    """
    if not gridgraph.pushes_contradiction(ctx.graph, ctx.charge, base):
        raise ValueError("base restriction does not push the contradiction")
    closer = _Closer(ctx.graph, ctx.charge)
    return _cdt_independent_closed(F, closer, closer.close(base))


def _cdt_independent_closed(F: Dnf, closer: _Closer, closed: Restriction) -> DecisionTree:
    terms = F.terms

    def dispatch(idx: int, closed: Restriction) -> DecisionTree:
        while idx < len(terms):
            falsified = False
            for lit in terms[idx].literals:
                val = closed.value(lit.var)
                if val != STAR and not lit.satisfied_by(val):
                    falsified = True
                    break
            if falsified:
                idx += 1
                continue
            return settle(terms[idx].literals, 0, idx, closed)
        return LEAF0

    def settle(lits, pos, idx, closed) -> DecisionTree:
        # query the term's unresolved variables until it evaluates
        while pos < len(lits):
            lit = lits[pos]
            val = closed.value(lit.var)
            if val == STAR:
                break
            if not lit.satisfied_by(val):
                return dispatch(idx + 1, closed)
            pos += 1
        else:
            return LEAF1
        lit = lits[pos]
        sat = 1 if lit.positive else 0
        sat_child = settle(lits, pos + 1, idx,
                           closer.close(closed.with_value(lit.var, sat)))
        fal_child = dispatch(idx + 1,
                             closer.close(closed.with_value(lit.var, 1 - sat)))
        if sat == 1:
            return Node(lit.var, fal_child, sat_child)
        return Node(lit.var, sat_child, fal_child)

    return dispatch(0, closed)


# ---------------------------------------------------------------------------
# Canonical common l-partial decision trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockEnd:
    next: "Ccdt"


@dataclass(frozen=True)
class BlockNode:
    var: int
    child0: Union["BlockNode", BlockEnd]
    child1: Union["BlockNode", BlockEnd]


@dataclass(frozen=True)
class CcdtEmpty:
    pass


@dataclass(frozen=True)
class CcdtBlock:
    owner: int                       # index into the original family
    root: Union[BlockNode, BlockEnd]


Ccdt = Union[CcdtEmpty, CcdtBlock]


class CcdtDepthCap(RuntimeError):
    pass


def ccdt_tree_depth(tree: Ccdt) -> int:
    if isinstance(tree, CcdtEmpty):
        return 0

    def block_depth(node) -> int:
        if isinstance(node, BlockEnd):
            return ccdt_tree_depth(node.next)
        return 1 + max(block_depth(node.child0), block_depth(node.child1))

    return block_depth(tree.root)


def ccdt_paths(tree: Ccdt) -> list[tuple[tuple[tuple[int, int], ...], tuple[int, ...]]]:
    """(steps, block owners) for every root-to-leaf path."""
    out = []

    def walk(t: Ccdt, steps, owners):
        if isinstance(t, CcdtEmpty):
            out.append((tuple(steps), tuple(owners)))
            return
        def go(node):
            if isinstance(node, BlockEnd):
                walk(node.next, steps, owners)
                return
            steps.append((node.var, 0))
            go(node.child0)
            steps.pop()
            steps.append((node.var, 1))
            go(node.child1)
            steps.pop()
        owners.append(t.owner)
        go(t.root)
        owners.pop()

    walk(tree, [], [])
    return out


def leftmost_path(tree: DecisionTree, length: int) -> list[tuple[int, int]]:
    """First root path with `length` edges in child0-first order."""
    if depth(tree) < length:
        raise ValueError("tree has no path of the requested length")
    steps: list[tuple[int, int]] = []
    node = tree
    need = length
    while need > 0:
        assert isinstance(node, Node)
        if depth(node.child0) >= need - 1:
            steps.append((node.var, 0))
            node = node.child0
        else:
            steps.append((node.var, 1))
            node = node.child1
        need -= 1
    return steps


def build_ccdt(family: DnfFamily, ell: int,
               mode: str = "plain",
               ctx: GoodTreeContext | None = None,
               base: Restriction = Restriction(),
               max_blocks: int | None = None) -> Ccdt:
    """The canonical common l-partial tree of an ordered DNF family.

    Rule order: an exhausted family ends the tree; a member whose canonical
    tree is shallow (depth <= l) is dropped; otherwise the leftmost
    (l+1)-path of the first member's tree is queried exhaustively and the
    construction recurses at every leaf without dropping the member.

    ``mode`` selects how member trees are built and how the exhaustive block
    behaves: "plain" uses standard DNF restriction, "independent" closes
    every assignment against ``ctx`` (so block queries forced by bridges
    collapse, and some block leaves merge).
    """
    if ell < 0:
        raise ValueError("ell must be >= 0")
    if mode not in ("plain", "independent"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "independent":
        if ctx is None:
            raise ValueError("independent mode needs a graph context")
        closer = _Closer(ctx.graph, ctx.charge)
        start = closer.close(base)
    else:
        closer = None
        start = base
    if max_blocks is None:
        nvars = len(set().union(*[f.variables for f in family.dnfs])) if family.dnfs else 0
        max_blocks = nvars + 1

    def member_tree(F: Dnf, state: Restriction) -> DecisionTree:
        if mode == "plain":
            reduced = restrict_dnf(F, state)
            if isinstance(reduced, ConstOne):
                return LEAF1
            return build_cdt(reduced)
        return _cdt_independent_closed(F, closer, state)

    def rec(fam: tuple[tuple[int, Dnf], ...], state: Restriction, blocks: int) -> Ccdt:
        if not fam:
            return CcdtEmpty()
        orig_idx, F = fam[0]
        t1 = member_tree(F, state)
        if depth(t1) <= ell:
            return rec(fam[1:], state, blocks)
        if blocks >= max_blocks:
            raise CcdtDepthCap(
                f"common tree exceeded {max_blocks} blocks; family does not settle")
        eta = leftmost_path(t1, ell + 1)
        eta_vars = [v for v, _ in eta]

        def block(pos: int, state2: Restriction):
            if pos == len(eta_vars):
                return BlockEnd(rec(fam, state2, blocks + 1))
            v = eta_vars[pos]
            if state2.value(v) != STAR:
                # closure already forced this block variable; no query
                return block(pos + 1, state2)
            if mode == "plain":
                s0 = state2.with_value(v, 0)
                s1 = state2.with_value(v, 1)
            else:
                s0 = closer.close(state2.with_value(v, 0))
                s1 = closer.close(state2.with_value(v, 1))
            return BlockNode(v, block(pos + 1, s0), block(pos + 1, s1))

        return CcdtBlock(orig_idx, block(0, state))

    indexed = tuple(enumerate(family.dnfs))
    return rec(indexed, start, 0)


def ccdt_depth(family: DnfFamily, ell: int, restriction=None,
               mode: str = "plain", ctx: GoodTreeContext | None = None) -> int:
    """Depth of the common tree of the (optionally restricted) family.

    In plain mode ``restriction`` is a boolcore Restriction applied to every
    member; in independent mode it is a GridRestriction and members are
    projected onto the new grid first (ctx defaults to the projected
    instance).
    """
    if mode == "plain":
        dnfs = family.dnfs
        if restriction is not None:
            reduced = []
            for f in dnfs:
                r = restrict_dnf(f, restriction)
                reduced.append(constant_one_dnf(family.width) if isinstance(r, ConstOne) else r)
            dnfs = tuple(reduced)
        return ccdt_tree_depth(build_ccdt(DnfFamily(dnfs, family.width), ell, "plain"))
    from .restrictions import GridRestriction, project_dnf
    if not isinstance(restriction, GridRestriction):
        raise ValueError("independent mode expects a GridRestriction")
    projected = []
    for f in family.dnfs:
        r = project_dnf(restriction, f)
        projected.append(constant_one_dnf(family.width) if isinstance(r, ConstOne) else r)
    if ctx is None:
        inst = restriction.new_instance
        ctx = GoodTreeContext(inst.graph, inst.charge, restriction.params.m)
    fam2 = DnfFamily(tuple(projected), family.width)
    return ccdt_tree_depth(build_ccdt(fam2, ell, "independent", ctx=ctx))


def responsible_subfamily(family: DnfFamily, ell: int,
                          path_steps: tuple[tuple[int, int], ...],
                          mode: str = "plain",
                          ctx: GoodTreeContext | None = None,
                          verify: bool = True) -> tuple[int, ...]:
    """Original indices of the members owning the blocks along a path.

    When ``verify`` is set, the common tree rebuilt from just those members
    must reproduce the same path.
    """
    tree = build_ccdt(family, ell, mode, ctx=ctx)
    target = None
    for steps, owners in ccdt_paths(tree):
        if steps == tuple(path_steps):
            target = owners
            break
    if target is None:
        raise ValueError("path does not occur in the common tree")
    seen: list[int] = []
    for o in target:
        if o not in seen:
            seen.append(o)
    if verify:
        sub = DnfFamily(tuple(family.dnfs[i] for i in seen), family.width)
        sub_tree = build_ccdt(sub, ell, mode, ctx=ctx)
        sub_paths = {steps for steps, _ in ccdt_paths(sub_tree)}
        if tuple(path_steps) not in sub_paths:
            raise LemmaReproductionError(
                "responsible subfamily fails to reproduce the path")
    return tuple(seen)


class LemmaReproductionError(RuntimeError):
    pass
