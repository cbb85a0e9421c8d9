import json
from itertools import product

import numpy as np
import pytest

from switchlab import gridgraph
from switchlab.boolcore import STAR, Dnf, Literal, Restriction, Term
from switchlab.gridgraph import LiveGraph, TseitinInstance
from switchlab.lab import uniform_chi2_pvalue
from switchlab.restrictions import (Fixed, GridParams, GridRestriction, Mapped,
                                    PathConstructionError, build_path_atlas,
                                    defect_center, layout_centers, project_dnf,
                                    sample_grid_restriction, sample_uniform,
                                    validate_disjointness)


class TestSampleUniform:
    def test_p_one_all_stars(self):
        rho = sample_uniform(range(50), 1.0, np.random.default_rng(0))
        assert len(rho) == 0

    def test_p_zero_full_assignment(self):
        rho = sample_uniform(range(50), 0.0, np.random.default_rng(0))
        assert len(rho) == 50

    def test_star_fraction_concentrates(self):
        rng = np.random.default_rng(1)
        n, p = 10 ** 5, 0.3
        rho = sample_uniform(range(n), p, rng)
        stars = n - len(rho)
        sigma = (n * p * (1 - p)) ** 0.5
        assert abs(stars - n * p) < 3 * sigma

    def test_values_fair(self):
        rng = np.random.default_rng(2)
        rho = sample_uniform(range(10 ** 5), 0.0, rng)
        ones = sum(rho.values())
        assert abs(ones - 5 * 10 ** 4) < 3 * (10 ** 5 * 0.25) ** 0.5


class TestGridParams:
    def test_delta3(self):
        params = GridParams(108, 3)
        assert params.side == 36
        assert params.central_square_side == 27
        assert params.m == 3

    def test_divisibility_enforced(self):
        with pytest.raises(ValueError):
            GridParams(50, 2)

    def test_sampling_needs_odd_m(self):
        params = GridParams(64, 2)   # m = 4
        with pytest.raises(ValueError):
            sample_grid_restriction(params, np.random.default_rng(0))


class TestCenters:
    def test_count(self):
        params = GridParams(48, 2)
        centers = layout_centers(params)
        assert sum(len(v) for v in centers.values()) == params.delta * params.m ** 2

    def test_spacing(self):
        params = GridParams(108, 3)
        for pts in layout_centers(params).values():
            for (r1, c1), (r2, c2) in zip(pts, pts[1:]):
                assert r2 - r1 == 9 and c2 - c1 == 9   # 3*delta

    def test_on_diagonal(self):
        params = GridParams(48, 2)
        for (A, B), pts in layout_centers(params).items():
            for r, c in pts:
                assert r - A * params.side == c - B * params.side


class TestAtlas:
    def test_pass_for_small_deltas(self):
        for delta in (2, 3, 4):
            params = GridParams(12 * delta * delta, delta)
            report = validate_disjointness(build_path_atlas(params))
            assert report.ok, report.summary()

    def test_row_budget_matches_pairs(self):
        params = GridParams(48, 2)
        # delta^2 center pairs need delta^2 corridor rows
        assert params.delta ** 2 == params.side // 4

    def test_mutated_atlas_fails(self):
        params = GridParams(48, 2)
        atlas = build_path_atlas(params)
        import copy
        broken = copy.copy(atlas)
        broken.paths = dict(atlas.paths)
        broken.edge_index = {}
        # shift one path by replaying another path's edges on top of it
        keys = sorted(broken.paths)
        broken.paths[keys[0]] = broken.paths[keys[1]]
        broken.endpoints = dict(atlas.endpoints)
        for key, edges in broken.paths.items():
            for pos, eid in enumerate(edges):
                broken.edge_index.setdefault(eid, []).append((key, pos))
        report = validate_disjointness(broken)
        assert not report.ok

    def test_shared_edges_have_common_nearest_endpoint(self):
        atlas = build_path_atlas(GridParams(48, 2))
        for eid, entries in atlas.edge_index.items():
            if len(entries) < 2:
                continue
            centers = {atlas.nearest_endpoint(k, p)[0] for k, p in entries}
            assert len(centers) == 1

    def test_associated_center(self):
        atlas = build_path_atlas(GridParams(48, 2))
        # an edge with no paths: center of a central square is never crossed
        untouched = [e for e in range(atlas.grid.n_edges) if e not in atlas.edge_index]
        assert untouched
        assert atlas.associated_center(untouched[0]) is None
        # mid-path edge: singleton far set
        key = sorted(atlas.paths)[0]
        path = atlas.paths[key]
        mid = path[len(path) // 2]
        center, far, dist = atlas.associated_center(mid)
        assert len(far) == 1
        # edge adjacent to a center
        first = path[0]
        center2, far2, dist2 = atlas.associated_center(first)
        assert dist2 == 0
        assert len(far2) >= 1


class TestGridRestriction:
    def setup_method(self):
        self.params = GridParams(48, 2)
        self.rng = np.random.default_rng(42)
        self.rho = sample_grid_restriction(self.params, self.rng)

    def test_new_instance_shape(self):
        inst = self.rho.new_instance
        assert inst.graph.base.n == 3
        assert (inst.charge == 1).all()
        assert not gridgraph.is_satisfiable(inst)

    def test_live_variable_count(self):
        m = self.params.m
        live = self.rho.live_edges
        assert len(set(self.rho.proj_var[live].tolist())) == 2 * m * m
        # reduction factor 1/T^2
        assert 2 * m * m == self.rho.values.size // self.params.side ** 2

    def test_apply(self):
        live = set(self.rho.live_edges.tolist())
        for e in range(0, 400, 7):
            act = self.rho.apply(e)
            if e in live:
                assert isinstance(act, Mapped)
            else:
                assert isinstance(act, Fixed) and act.bit in (0, 1)

    def test_defect_vertex_is_unchosen_center(self):
        atlas = build_path_atlas(self.params)
        k = defect_center(self.params, self.rho.chosen[(0, 0)])
        assert self.rho.defect_vertex == atlas.center_vertex[(0, 0, k)]
        assert k != self.rho.chosen[(0, 0)]

    def test_chosen_center_marginals_uniform(self):
        counts = np.zeros((9, 2), dtype=np.int64)
        for i in range(2000):
            rho = sample_grid_restriction(self.params, np.random.default_rng(1000 + i))
            for j, sg in enumerate(sorted(rho.chosen)):
                counts[j, rho.chosen[sg] - 1] += 1
        for j in range(9):
            assert uniform_chi2_pvalue(counts[j]) > 0.001

    def test_back_substitution_parities(self):
        atlas = build_path_atlas(self.params)
        grid = atlas.grid
        chosen_vertices = {atlas.center_vertex[(A, B, k)]
                           for (A, B), k in self.rho.chosen.items()}
        allowed = chosen_vertices | {self.rho.defect_vertex}
        for _ in range(20):
            y = {v: int(self.rng.integers(0, 2)) for v in range(18)}
            vals = self.rho.back_substitute(y)
            parity = np.zeros(grid.n_vertices, dtype=np.int64)
            np.add.at(parity, grid.edge_u, vals)
            np.add.at(parity, grid.edge_v, vals)
            bad = set(np.nonzero(parity % 2 != 1)[0].tolist())
            assert bad <= allowed

    def test_projection_soundness_new_solution_lifts(self):
        # a new-variable assignment violating exactly one new constraint
        # lifts to an assignment violating the matching center constraints
        inst = self.rho.new_instance
        new_grid = inst.graph.base
        y = {v: 0 for v in range(new_grid.n_edges)}
        vals = self.rho.back_substitute(y)
        atlas = build_path_atlas(self.params)
        grid = atlas.grid
        parity = np.zeros(grid.n_vertices, dtype=np.int64)
        np.add.at(parity, grid.edge_u, vals)
        np.add.at(parity, grid.edge_v, vals)
        # per chosen center: original parity violated exactly when the
        # projected constraint at that center is violated by y
        new_parity = np.zeros(new_grid.n_vertices, dtype=np.int64)
        yvec = np.zeros(new_grid.n_edges, dtype=np.int64)
        np.add.at(new_parity, new_grid.edge_u, yvec)
        np.add.at(new_parity, new_grid.edge_v, yvec)
        for (A, B), k in self.rho.chosen.items():
            c = atlas.center_vertex[(A, B, k)]
            new_v = new_grid.vertex_id(A, B)
            assert (parity[c] % 2 == 1) == (new_parity[new_v] % 2 == 1)

    def test_serialization_roundtrip(self):
        text = self.rho.to_json()
        back = GridRestriction.from_json(text)
        assert back.chosen == self.rho.chosen
        assert (back.values == self.rho.values).all()
        assert (back.proj_var == self.rho.proj_var).all()
        assert (back.proj_pol == self.rho.proj_pol).all()
        assert back.defect_vertex == self.rho.defect_vertex
        assert json.loads(text)["schema"] == "switchlab.grid_restriction.v1"


class TestSoundnessDelta3:
    def test_back_substitution_delta3(self):
        params = GridParams(108, 3)
        rng = np.random.default_rng(5)
        rho = sample_grid_restriction(params, rng)
        atlas = build_path_atlas(params)
        grid = atlas.grid
        allowed = {atlas.center_vertex[(A, B, k)] for (A, B), k in rho.chosen.items()}
        allowed.add(rho.defect_vertex)
        for _ in range(5):
            y = {v: int(rng.integers(0, 2)) for v in range(18)}
            vals = rho.back_substitute(y)
            parity = np.zeros(grid.n_vertices, dtype=np.int64)
            np.add.at(parity, grid.edge_u, vals)
            np.add.at(parity, grid.edge_v, vals)
            bad = set(np.nonzero(parity % 2 != 1)[0].tolist())
            assert bad <= allowed


class TestProjectDnf:
    def test_projection(self):
        params = GridParams(48, 2)
        rho = sample_grid_restriction(params, np.random.default_rng(3))
        live = rho.live_edges
        e1, e2 = int(live[0]), int(live[-1])
        dead = next(e for e in range(rho.values.size) if rho.values[e] >= 0)
        F = Dnf((Term((Literal(e1, True), Literal(e2, False))),
                 Term((Literal(dead, rho.values[dead] == 1),))), 2)
        out = project_dnf(rho, F)
        # second term is satisfied outright by the fixed value
        from switchlab.boolcore import ConstOne
        assert isinstance(out, ConstOne)

    def test_conflicting_mapped_literals_die(self):
        params = GridParams(48, 2)
        rho = sample_grid_restriction(params, np.random.default_rng(3))
        live = rho.live_edges
        # find two live edges on the same path with equal polarity
        by_var = {}
        for e in live:
            by_var.setdefault(int(rho.proj_var[e]), []).append(int(e))
        var, edges = next((v, es) for v, es in by_var.items() if len(es) >= 2)
        e1, e2 = edges[0], edges[1]
        same = rho.proj_pol[e1] == rho.proj_pol[e2]
        # literal pair that maps to x_v and ~x_v simultaneously
        F = Dnf((Term((Literal(e1, True), Literal(e2, not same))),), 2)
        out = project_dnf(rho, F)
        assert out.terms == ()
