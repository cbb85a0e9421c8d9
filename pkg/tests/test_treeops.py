from itertools import product

import numpy as np
import pytest

from switchlab import gridgraph
from switchlab.boolcore import (Branch, Leaf, Node, Restriction, branches,
                                complement_tree, depth, is_proper)
from switchlab.canonical import build_cdt
from switchlab.gridgraph import LiveGraph, all_one_charge, build_grid
from switchlab.restrictions import GridParams, sample_grid_restriction
from switchlab.treeops import (GoodTreeContext, PreconditionError,
                               check_consistent, check_neg_consistent,
                               check_represents, check_survival_full,
                               is_good_tree, map_branch_back, project_branch,
                               restrict_tree_full, restrict_tree_partial)


def make_ctx(n=9, k=6):
    g = build_grid(n)
    return GoodTreeContext(LiveGraph(g), all_one_charge(g), k)


def random_good_tree(rng, ctx, max_depth):
    """Random proper tree over the context's edges with independent branches."""
    n_edges = ctx.graph.base.n_edges

    def rec(budget, path_vars):
        if budget == 0 or rng.random() < 0.25:
            return Leaf(int(rng.integers(0, 2)))
        for _ in range(30):
            v = int(rng.integers(0, n_edges))
            if v not in path_vars and gridgraph.is_independent(ctx.graph, path_vars | {v}):
                break
        else:
            return Leaf(int(rng.integers(0, 2)))
        return Node(v, rec(budget - 1, path_vars | {v}),
                    rec(budget - 1, path_vars | {v}))

    for _ in range(50):
        t = rec(max_depth, frozenset())
        if is_good_tree(t, ctx):
            return t
    raise RuntimeError("could not build a good tree")


class TestGoodTrees:
    def test_leaf_good(self):
        ctx = make_ctx(k=1)
        assert is_good_tree(Leaf(0), ctx)

    def test_vertex_cut_branch_not_good(self):
        g = build_grid(9)
        ctx = make_ctx()
        star = g.incident_edges(g.vertex_id(4, 4))
        t = Leaf(1)
        for e in star:
            t = Node(e, Leaf(0), t)
        assert not is_good_tree(t, ctx)

    def test_depth_bound_strict(self):
        ctx = make_ctx(k=2)
        t = Node(0, Node(2, Leaf(0), Leaf(1)), Leaf(1))
        assert depth(t) == 2
        assert not is_good_tree(t, ctx)


class TestRestrictPartial:
    def test_empty_beta_identity_without_bridges(self):
        ctx = make_ctx()
        rng = np.random.default_rng(0)
        for _ in range(10):
            t = random_good_tree(rng, ctx, 4)
            assert restrict_tree_partial(t, Restriction(), ctx) == t

    def test_forced_fourth_edge_substituted(self):
        g = build_grid(9)
        ctx = make_ctx()
        star = g.incident_edges(g.vertex_id(4, 4))
        beta = Restriction({e: 0 for e in star[:3]})
        t = Node(star[3], Leaf(0), Leaf(1))
        assert restrict_tree_partial(t, beta, ctx) == Leaf(1)

    def test_survival_characterization_exhaustive(self):
        """Surviving branches are exactly the compatible contradiction-pushers."""
        from switchlab.treeops import branch_survives_partial
        g = build_grid(9)
        G = LiveGraph(g)
        alpha = all_one_charge(g)
        ctx = make_ctx()
        rng = np.random.default_rng(1)
        for _ in range(40):
            t = random_good_tree(rng, ctx, 5)
            es = [int(x) for x in rng.choice(g.n_edges, size=3, replace=False)]
            if not gridgraph.is_independent(G, es):
                continue
            beta = Restriction({e: int(rng.integers(0, 2)) for e in es})
            for br in branches(t):
                pi = br.as_restriction()
                survives = branch_survives_partial(br, beta, ctx)
                pushes = (pi.compatible(beta) and
                          gridgraph.pushes_contradiction(G, alpha, pi.compose(beta)))
                assert survives == pushes, (br, survives, pushes)

    def test_all_output_branches_push(self):
        """Every branch of the output pushes the contradiction (exhaustive)."""
        g = build_grid(9)
        G = LiveGraph(g)
        alpha = all_one_charge(g)
        ctx = make_ctx()
        rng = np.random.default_rng(2)
        for _ in range(30):
            t = random_good_tree(rng, ctx, 5)
            es = [int(x) for x in rng.choice(g.n_edges, size=3, replace=False)]
            if not gridgraph.is_independent(G, es):
                continue
            beta = Restriction({e: int(rng.integers(0, 2)) for e in es})
            reduced = restrict_tree_partial(t, beta, ctx)
            assert is_proper(reduced)
            G2 = G.without(beta.support)
            alpha2 = gridgraph.restrict_charge(alpha, beta, G)
            for br in branches(reduced):
                assert gridgraph.pushes_contradiction(G2, alpha2, br.as_restriction())

    def test_strict_depth_gate(self):
        ctx = make_ctx(n=9, k=6)
        t = Node(0, Node(2, Node(4, Leaf(0), Leaf(1)), Leaf(1)), Leaf(1))
        with pytest.raises(PreconditionError):
            restrict_tree_partial(t, Restriction(), ctx, strict=True)

    def test_composition_coherence_logged(self, capsys):
        """restrict by beta then beta2 vs their composition; logged only."""
        g = build_grid(9)
        G = LiveGraph(g)
        ctx = make_ctx()
        rng = np.random.default_rng(3)
        mismatches = checked = 0
        for _ in range(20):
            t = random_good_tree(rng, ctx, 4)
            es = [int(x) for x in rng.choice(g.n_edges, size=4, replace=False)]
            if not gridgraph.is_independent(G, es):
                continue
            beta1 = Restriction({es[0]: 1, es[1]: 0})
            beta2 = Restriction({es[2]: 1, es[3]: 1})
            try:
                lhs = restrict_tree_partial(
                    restrict_tree_partial(t, beta1, ctx), beta1.compose(beta2), ctx)
                rhs = restrict_tree_partial(t, beta1.compose(beta2), ctx)
            except PreconditionError:
                continue
            checked += 1
            if lhs != rhs:
                mismatches += 1
        print(f"composition coherence: {mismatches}/{checked} mismatches")


class TestRestrictFull:
    def setup_method(self):
        from switchlab.gridgraph import TorusGrid
        self.params = GridParams(48, 2)
        self.rng = np.random.default_rng(7)
        self.rho = sample_grid_restriction(self.params, self.rng)
        g = TorusGrid(48)   # n = m*T is even; goodness only needs connectivity
        self.ctx = GoodTreeContext(LiveGraph(g), all_one_charge(g), 7)

    def test_leaf_passthrough(self):
        assert restrict_tree_full(Leaf(1), self.rho, self.ctx) == Leaf(1)

    def test_non_path_tree_collapses(self):
        dead = [e for e in range(200) if self.rho.values[e] >= 0][:5]
        t = Leaf(0)
        expected = 0
        # build a chain following the fixed values to a known leaf
        t = Node(dead[0], Leaf(0), Leaf(1))
        expected = int(self.rho.values[dead[0]])
        out = restrict_tree_full(t, self.rho, self.ctx)
        assert out == Leaf(expected)

    def test_output_proper_and_survival(self):
        report = None
        for i in range(30):
            rng = np.random.default_rng(100 + i)
            t = random_good_tree(rng, self.ctx, 5)
            out = restrict_tree_full(t, self.rho, self.ctx)
            assert is_proper(out)
            report = check_survival_full(t, self.rho, self.ctx)
            assert report.ok, report.summary()

    def _vertex_cut_tree(self):
        """A good tree querying one original edge per path around new vertex (0,0)."""
        new_grid = self.rho.new_instance.graph.base
        targets = sorted(new_grid.incident_edges(new_grid.vertex_id(0, 0)))
        rep = {v: e for e, v in ((int(e), int(self.rho.proj_var[e]))
                                 for e in self.rho.live_edges) if v in targets}
        chain = Leaf(1)
        for v in targets:
            chain = Node(rep[v], Leaf(0), chain)
        return chain

    def test_survival_fails_without_pruning(self):
        """Injected fault: skipping the prune phase keeps a dependent branch."""
        from switchlab.treeops import _preprocess
        t = self._vertex_cut_tree()
        assert is_good_tree(t, self.ctx)
        pruned = restrict_tree_full(t, self.rho, self.ctx)
        unpruned = _preprocess(t, self.rho)
        assert pruned != unpruned
        # the unpruned tree has a branch assigning all four edges at the new
        # vertex, which no pruned branch does
        def max_queries(tree):
            return max(len(b) for b in branches(tree))
        assert max_queries(unpruned) == 4
        assert max_queries(pruned) <= 3

    def test_map_branch_back(self):
        checked = 0
        for i in range(20):
            rng = np.random.default_rng(300 + i)
            t = random_good_tree(rng, self.ctx, 5)
            out = restrict_tree_full(t, self.rho, self.ctx)
            for bp in branches(out):
                back = map_branch_back(t, self.rho, self.ctx, bp)
                assert back.leaf == bp.leaf
                checked += 1
        assert checked > 0

    def test_map_branch_back_rejects_foreign_branch(self):
        t = random_good_tree(np.random.default_rng(9), self.ctx, 4)
        with pytest.raises(ValueError):
            map_branch_back(t, self.rho, self.ctx, Branch(((0, 0),), 0))


class TestConsistency:
    def test_self_consistent(self):
        ctx = make_ctx()
        t = random_good_tree(np.random.default_rng(11), ctx, 4)
        assert check_consistent(t, t, ctx)

    def test_complement_neg_consistent(self):
        ctx = make_ctx()
        for seed in range(5):
            t = random_good_tree(np.random.default_rng(20 + seed), ctx, 4)
            assert check_neg_consistent(t, complement_tree(t), ctx)

    def test_cdt_represents_term_trees(self):
        from switchlab.boolcore import Dnf, Literal, Term
        from switchlab.canonical import build_cdt_independent
        g = build_grid(9)
        ctx = make_ctx()
        rng = np.random.default_rng(31)
        done = 0
        while done < 10:
            es = [int(x) for x in rng.choice(g.n_edges, size=4, replace=False)]
            terms = (Term((Literal(es[0], True), Literal(es[1], False))),
                     Term((Literal(es[2], True), Literal(es[3], True))))
            F = Dnf(terms, 2)
            whole = build_cdt_independent(F, ctx)
            parts = [build_cdt_independent(Dnf((t,), 2), ctx) for t in terms]
            if not is_good_tree(whole, ctx):
                continue
            if not all(is_good_tree(p, ctx) for p in parts):
                continue
            assert check_represents(whole, parts, ctx)
            done += 1

    def test_good_precondition_enforced(self):
        ctx = make_ctx(k=1)
        t = Node(0, Leaf(0), Leaf(1))
        with pytest.raises(PreconditionError):
            check_consistent(t, t, ctx)
