"""Variables, literals, terms, DNFs, restrictions and proper decision trees.

Everything here is an immutable value.  Variables are dense integer ids
(``VarId``); when the variables are edges of a grid graph the owning graph
defines the id range, but nothing in this module depends on that.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

STAR = -1  # sentinel for "left alive" inside dense arrays; dict-based
           # restrictions simply omit unset variables.


# ---------------------------------------------------------------------------
# Restrictions
# ---------------------------------------------------------------------------

class IncompatibleRestrictions(ValueError):
    pass


class Restriction(Mapping[int, int]):
    """Partial assignment of variables to {0,1}; unsupported variables are *.

    Immutable and hashable.  ``compose`` requires compatibility on the
    overlap and raises otherwise.
    """

    __slots__ = ("_assign", "_hash")

    def __init__(self, assignment: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = dict(assignment)
        for v, b in items.items():
            if b not in (0, 1):
                raise ValueError(f"restriction value for x{v} must be 0 or 1, got {b!r}")
        self._assign = items
        self._hash = None

    # Mapping interface -----------------------------------------------------
    def __getitem__(self, var: int) -> int:
        return self._assign[var]

    def __iter__(self) -> Iterator[int]:
        return iter(self._assign)

    def __len__(self) -> int:
        return len(self._assign)

    def __contains__(self, var: object) -> bool:
        return var in self._assign

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._assign.items()))
        return self._hash

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Restriction):
            return NotImplemented
        return self._assign == other._assign

    def __repr__(self) -> str:
        body = ", ".join(f"x{v}={b}" for v, b in sorted(self._assign.items()))
        return f"Restriction({{{body}}})"

    # Domain operations -----------------------------------------------------
    @property
    def support(self) -> frozenset[int]:
        return frozenset(self._assign)

    def value(self, var: int) -> int:
        """Value of ``var`` under this restriction, STAR when unset."""
        return self._assign.get(var, STAR)

    def is_sub_restriction_of(self, other: "Restriction") -> bool:
        return all(other.value(v) == b for v, b in self._assign.items())

    def extends(self, other: "Restriction") -> bool:
        return other.is_sub_restriction_of(self)

    def compatible(self, other: "Restriction") -> bool:
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        return all(big.value(v) in (b, STAR) for v, b in small._assign.items())

    def compose(self, other: "Restriction") -> "Restriction":
        if not self.compatible(other):
            raise IncompatibleRestrictions(f"{self} and {other} disagree on overlap")
        merged = dict(self._assign)
        merged.update(other._assign)
        return Restriction(merged)

    def with_value(self, var: int, bit: int) -> "Restriction":
        if self.value(var) not in (STAR, bit):
            raise IncompatibleRestrictions(f"x{var} already set to {self.value(var)}")
        merged = dict(self._assign)
        merged[var] = bit
        return Restriction(merged)


EMPTY_RESTRICTION = Restriction()


def mutually_compatible(restrictions: Iterable[Restriction]) -> bool:
    rs = list(restrictions)
    return all(a.compatible(b) for i, a in enumerate(rs) for b in rs[i + 1:])


# ---------------------------------------------------------------------------
# Literals, terms, DNFs
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Literal:
    var: int
    positive: bool

    def satisfied_by(self, bit: int) -> bool:
        return bit == (1 if self.positive else 0)

    def __repr__(self) -> str:
        return f"x{self.var}" if self.positive else f"~x{self.var}"


class ConstZero:
    """Result of restricting a term/DNF to the constant 0."""
    def __repr__(self) -> str:
        return "ConstZero"


class ConstOne:
    """Result of restricting a term/DNF to the constant 1."""
    def __repr__(self) -> str:
        return "ConstOne"


CONST_ZERO = ConstZero()
CONST_ONE = ConstOne()


@dataclass(frozen=True)
class Term:
    """Conjunction of literals, at most one per variable, kept in var order."""

    literals: tuple[Literal, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.literals, key=lambda l: l.var))
        seen = set()
        for lit in ordered:
            if lit.var in seen:
                raise ValueError(f"variable x{lit.var} appears twice in term")
            seen.add(lit.var)
        object.__setattr__(self, "literals", ordered)

    @property
    def width(self) -> int:
        return len(self.literals)

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(l.var for l in self.literals)

    def __repr__(self) -> str:
        return "T(" + "&".join(map(repr, self.literals)) + ")" if self.literals else "T(1)"


def term(*lits: tuple[int, bool] | Literal) -> Term:
    out = tuple(l if isinstance(l, Literal) else Literal(l[0], l[1]) for l in lits)
    return Term(out)


@dataclass(frozen=True)
class Dnf:
    """Ordered disjunction of terms with a declared width bound.

    Order matters: the canonical decision tree consumes terms in order.
    """

    terms: tuple[Term, ...]
    width: int

    def __post_init__(self):
        for t in self.terms:
            if t.width > self.width:
                raise ValueError(f"term {t} wider than declared bound {self.width}")

    @property
    def variables(self) -> frozenset[int]:
        out: set[int] = set()
        for t in self.terms:
            out |= t.variables
        return frozenset(out)

    def evaluate(self, assignment: Mapping[int, int]) -> int:
        for t in self.terms:
            if all(l.satisfied_by(assignment[l.var]) for l in t.literals):
                return 1
        return 0


def restrict_term(t: Term, beta: Restriction) -> Union[Term, ConstZero, ConstOne]:
    """0 if some literal is falsified, 1 if all are satisfied, else survivors."""
    alive = []
    for lit in t.literals:
        b = beta.value(lit.var)
        if b == STAR:
            alive.append(lit)
        elif not lit.satisfied_by(b):
            return CONST_ZERO
    if not alive:
        return CONST_ONE
    return Term(tuple(alive))


def restrict_dnf(F: Dnf, beta: Restriction) -> Union[Dnf, ConstOne]:
    """ConstOne if some term is satisfied; else restricted non-zero terms in order.

    The empty DNF denotes the constant 0.
    """
    kept = []
    for t in F.terms:
        r = restrict_term(t, beta)
        if isinstance(r, ConstOne):
            return CONST_ONE
        if isinstance(r, Term):
            kept.append(r)
    return Dnf(tuple(kept), F.width)


# ---------------------------------------------------------------------------
# Decision trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    bit: int

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError("leaf must carry 0 or 1")

    def __repr__(self) -> str:
        return f"Leaf({self.bit})"


@dataclass(frozen=True)
class Node:
    var: int
    child0: "DecisionTree"
    child1: "DecisionTree"

    def child(self, bit: int) -> "DecisionTree":
        return self.child1 if bit else self.child0

    def __repr__(self) -> str:
        return f"Node(x{self.var}, {self.child0!r}, {self.child1!r})"


DecisionTree = Union[Leaf, Node]

LEAF0 = Leaf(0)
LEAF1 = Leaf(1)


@dataclass(frozen=True)
class Branch:
    """A root-to-leaf path; doubles as the restriction it induces."""

    steps: tuple[tuple[int, int], ...]
    leaf: int

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(v for v, _ in self.steps)

    def as_restriction(self) -> Restriction:
        return Restriction(dict(self.steps))


def depth(tree: DecisionTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(tree.child0), depth(tree.child1))


def leaf_count(tree: DecisionTree) -> int:
    if isinstance(tree, Leaf):
        return 1
    return leaf_count(tree.child0) + leaf_count(tree.child1)


def is_proper(tree: DecisionTree) -> bool:
    """No variable repeats on any root-to-leaf path."""
    def rec(t: DecisionTree, seen: frozenset[int]) -> bool:
        if isinstance(t, Leaf):
            return True
        if t.var in seen:
            return False
        seen2 = seen | {t.var}
        return rec(t.child0, seen2) and rec(t.child1, seen2)
    return rec(tree, frozenset())


def tree_variables(tree: DecisionTree) -> frozenset[int]:
    if isinstance(tree, Leaf):
        return frozenset()
    return frozenset({tree.var}) | tree_variables(tree.child0) | tree_variables(tree.child1)


def evaluate(tree: DecisionTree, assignment: Mapping[int, int]) -> int:
    while isinstance(tree, Node):
        tree = tree.child(assignment[tree.var])
    return tree.bit


def restrict_tree_simple(tree: DecisionTree, beta: Restriction) -> DecisionTree:
    """The standard three-case tree restriction: * keeps the node, 0/1 takes a child."""
    if isinstance(tree, Leaf):
        return tree
    b = beta.value(tree.var)
    if b == STAR:
        return Node(tree.var,
                    restrict_tree_simple(tree.child0, beta),
                    restrict_tree_simple(tree.child1, beta))
    return restrict_tree_simple(tree.child(b), beta)


def branches(tree: DecisionTree, bit: int | None = None) -> list[Branch]:
    """All branches in child0-first depth-first order ("leftmost" order).

    ``bit`` filters by leaf label; None returns every branch.
    """
    out: list[Branch] = []
    stack: list[tuple[DecisionTree, tuple[tuple[int, int], ...]]] = [(tree, ())]
    while stack:
        t, steps = stack.pop()
        if isinstance(t, Leaf):
            if bit is None or t.bit == bit:
                out.append(Branch(steps, t.bit))
            continue
        # push child1 first so child0 is processed first
        stack.append((t.child1, steps + ((t.var, 1),)))
        stack.append((t.child0, steps + ((t.var, 0),)))
    return out


def complement_tree(tree: DecisionTree) -> DecisionTree:
    if isinstance(tree, Leaf):
        return Leaf(1 - tree.bit)
    return Node(tree.var, complement_tree(tree.child0), complement_tree(tree.child1))


def is_constant(tree: DecisionTree, bit: int) -> bool:
    return isinstance(tree, Leaf) and tree.bit == bit


def is_k_clipped(tree: DecisionTree, k: int) -> bool:
    """True iff from every node some leaf is within k queries."""
    if k < 0:
        raise ValueError("k must be >= 0")
    ok = True

    def min_leaf_dist(t: DecisionTree) -> int:
        nonlocal ok
        if isinstance(t, Leaf):
            return 0
        d = 1 + min(min_leaf_dist(t.child0), min_leaf_dist(t.child1))
        if d > k:
            ok = False
        return d

    min_leaf_dist(tree)
    return ok


# ---------------------------------------------------------------------------
# Random walks down a tree
# ---------------------------------------------------------------------------

def sample_walk(tree: DecisionTree, rng) -> Branch:
    """Uniform random walk from the root; branch pi has probability 2^-|pi|."""
    steps: list[tuple[int, int]] = []
    while isinstance(tree, Node):
        bit = int(rng.integers(0, 2))
        steps.append((tree.var, bit))
        tree = tree.child(bit)
    return Branch(tuple(steps), tree.bit)


class TreeTooLarge(ValueError):
    pass


def exact_walk_distribution(tree: DecisionTree, max_leaves: int = 1 << 20) -> dict[Branch, Fraction]:
    """Exact walk distribution as rationals; masses are 2^-|pi| and sum to 1."""
    n = leaf_count(tree)
    if n > max_leaves:
        raise TreeTooLarge(f"tree has {n} leaves, limit {max_leaves}")
    return {br: Fraction(1, 2 ** len(br)) for br in branches(tree)}
