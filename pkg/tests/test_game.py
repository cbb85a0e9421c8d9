from fractions import Fraction

import numpy as np
import pytest

from switchlab.boolcore import Dnf, Literal, Restriction, Term
from switchlab.game import (DominanceVerdict, GameContractError, GameState,
                            dominance_test, run_algorithm_A,
                            run_algorithm_A_tilde, run_algorithm_A_tilde_grid,
                            sampler_step)
from switchlab.lab import (exact_algorithm_A_dist, exact_algorithm_A_tilde_dist,
                           uniform_chi2_pvalue)
from switchlab.restrictions import GridParams, build_path_atlas, sample_grid_restriction


PARAMS = GridParams(48, 2)


def lit(v, pos=True):
    return Literal(v, pos)


def fresh_state(seed, strategy="II"):
    return GameState(PARAMS, strategy, np.random.default_rng(seed))


class TestSamplerStep:
    def test_edge_without_center_is_nonstar(self):
        state = fresh_state(0)
        atlas = state.atlas
        e = next(e for e in range(state.top.n_edges) if e not in atlas.edge_index)
        dec = sampler_step(state, e)
        assert not dec.is_star and dec.value in (0, 1)

    def test_fresh_subgrid_choice_probability(self):
        # first path edge fed: its center is chosen with probability 1/delta
        atlas = build_path_atlas(PARAMS)
        key = sorted(atlas.paths)[0]
        e = atlas.paths[key][len(atlas.paths[key]) // 2]
        center, _, _ = atlas.associated_center(e)
        sg = atlas.center_info[center][:2]
        k = atlas.center_info[center][2]
        chosen = 0
        n = 4000
        for i in range(n):
            state = fresh_state(1000 + i)
            sampler_step(state, e)
            if state.chosen[sg] == k:
                chosen += 1
        expect = n / PARAMS.delta
        sigma = (n * 0.5 * 0.5) ** 0.5
        assert abs(chosen - expect) < 4 * sigma

    def test_already_set_rejected(self):
        state = fresh_state(2)
        e = next(e for e in range(state.top.n_edges)
                 if e not in state.atlas.edge_index)
        sampler_step(state, e)
        with pytest.raises(GameContractError):
            sampler_step(state, e)

    def test_bridge_rejected(self):
        state = fresh_state(3)
        g = state.top
        star = g.incident_edges(g.vertex_id(20, 20))
        # the three set edges are corridor-free; feed them, then the bridge
        for e in star[:3]:
            if state.is_unset(e) and not state.is_bridge(e):
                sampler_step(state, e)
        bridge = star[3]
        if state.is_bridge(bridge):
            with pytest.raises(GameContractError):
                sampler_step(state, bridge)

    def test_star_only_if_center_chosen_approach2(self):
        count = 0
        for i in range(300):
            state = fresh_state(5000 + i)
            atlas = state.atlas
            key = sorted(atlas.paths)[i % len(atlas.paths)]
            e = atlas.paths[key][len(atlas.paths[key]) // 2]
            dec = sampler_step(state, e)
            if dec.is_star:
                center, _, _ = atlas.associated_center(e)
                sg = atlas.center_info[center][:2]
                assert state.chosen[sg] == atlas.center_info[center][2]
                count += 1
        assert count > 0


class TestEndgame:
    def test_approach1_matches_direct_sampler(self):
        """Full Approach-I games agree with direct sampling on marginals."""
        n_runs = 120
        game_stars = np.zeros(PARAMS.n * PARAMS.n * 2, dtype=np.int64)
        game_counts = []
        center_counts = {sg: np.zeros(PARAMS.delta, dtype=np.int64)
                         for sg in [(A, B) for A in range(3) for B in range(3)]}
        for i in range(n_runs):
            state = fresh_state(9000 + i, "I")
            progress = True
            while progress:
                progress = False
                for e in range(state.top.n_edges):
                    if state.is_unset(e) and not state.is_bridge(e):
                        state.feed(e)
                        progress = True
            values, stars = state.finalize()
            assert len(values) + len(stars) == state.top.n_edges
            for e in stars:
                game_stars[e] += 1
            game_counts.append(len(stars))
            for sg, k in state.chosen.items():
                center_counts[sg][k - 1] += 1
        direct_counts = []
        for i in range(n_runs):
            rho = sample_grid_restriction(PARAMS, np.random.default_rng(40000 + i))
            direct_counts.append(len(rho.live_edges))
        # star-count distributions should be in the same range
        assert abs(np.mean(game_counts) - np.mean(direct_counts)) < 30
        for sg, counts in center_counts.items():
            assert uniform_chi2_pvalue(counts) > 0.001

    def test_residual_ledger_bounded(self):
        state = fresh_state(77, "II")
        atlas = state.atlas
        for key in sorted(atlas.paths)[:40]:
            path = atlas.paths[key]
            e = path[len(path) // 2]
            if state.is_unset(e) and not state.is_bridge(e):
                dec = state.feed(e)
                if dec.is_star:
                    assert dec.new_residual_classes <= state.residual_cap


class TestAlgorithms:
    def test_A_no_stars_empty_path(self):
        F = Dnf((Term((lit(0), lit(1))),), 2)
        rho = Restriction({0: 1, 1: 1, 2: 0})
        _, path = run_algorithm_A([F], rho, [0, 1, 0], [1, 1, 0], 1)
        assert path == []

    def test_A_all_stars_grows_in_blocks(self):
        F = Dnf((Term((lit(0), lit(1), lit(2), lit(3))),), 4)
        rho = Restriction()
        trace, path = run_algorithm_A([F], rho, [1, 1, 1, 1], [1, 1, 1, 1], 1)
        assert len(path) in (2, 4)
        assert len(path) % 2 == 0

    def test_A_existence_witness(self):
        """depth(CCDT) >= t implies some (x, y) drives |path| >= t."""
        from switchlab.canonical import DnfFamily, ccdt_depth
        from itertools import product
        F = Dnf((Term((lit(0), lit(1), lit(2))),), 3)
        fam = [F]
        t, ell = 2, 1
        d = ccdt_depth(DnfFamily((F,), 3), ell)
        assert d >= t
        rho = Restriction()   # everything alive
        best = 0
        for xb in product((0, 1), repeat=t):
            for yb in product((0, 1), repeat=t):
                _, path = run_algorithm_A(fam, rho, list(xb), list(yb), ell)
                best = max(best, len(path))
        assert best >= t

    def test_A_tilde_p_one_every_sigma_becomes_eta(self):
        F = Dnf((Term((lit(0), lit(1))),), 2)
        rng = np.random.default_rng(0)
        _, path, rec = run_algorithm_A_tilde([F], [1, 1, 1, 1], 1, 1.0, rng)
        assert rec.eta_len >= len(path) > 0

    def test_A_tilde_p_zero_empty(self):
        F = Dnf((Term((lit(0), lit(1))),), 2)
        rng = np.random.default_rng(0)
        _, path, rec = run_algorithm_A_tilde([F], [1, 1], 1, 0.0, rng)
        assert path == [] and rec.eta_len == 0

    @pytest.mark.parametrize("p", [Fraction(1, 2), Fraction(1, 4)])
    def test_exact_A_equals_A_tilde(self, p):
        families = [
            [Dnf((Term((lit(0),)),), 1)],
            [Dnf((Term((lit(0), lit(1))), Term((lit(1, False), lit(2)))), 2)],
            [Dnf((Term((lit(0), lit(1))),), 2),
             Dnf((Term((lit(2), lit(1, False))),), 2)],
        ]
        for fam in families:
            for t, ell in ((2, 1), (3, 2)):
                a = exact_algorithm_A_dist(fam, p, t, ell)
                b = exact_algorithm_A_tilde_dist(fam, p, t, ell)
                assert a == b, (fam, t, ell)


class TestGridAlgorithms:
    def test_grid_A_runs(self):
        rng = np.random.default_rng(1)
        rho = sample_grid_restriction(PARAMS, rng)
        live = rho.live_edges
        F = Dnf((Term((lit(int(live[0])), lit(int(live[7])))),), 2)
        from switchlab.game import run_algorithm_A_grid
        _, path = run_algorithm_A_grid([F], rho, [1, 0, 1, 0], [1, 1, 0, 0], 1)
        assert all(isinstance(v, int) for v, _ in path)

    def test_grid_A_tilde_ledger(self):
        rng = np.random.default_rng(2)
        n_edges = PARAMS.n * PARAMS.n * 2
        fam = [Dnf((Term((lit(int(rng.integers(0, n_edges))),
                          lit(int(rng.integers(0, n_edges))))),), 2)
               for _ in range(2)]
        fam = [f for f in fam]
        state = GameState(PARAMS, "II", rng)
        _, path, rec = run_algorithm_A_tilde_grid(fam, [1, 0, 1, 0], 1, state)
        assert rec.path_len == len(path)
        assert rec.path_len <= rec.eta_len

    def test_bad_stars_have_distinct_subgrids(self):
        # delta=2 never produces bad stars (threshold delta/2 = 1)
        rng = np.random.default_rng(3)
        state = GameState(PARAMS, "II", rng)
        atlas = state.atlas
        for key in sorted(atlas.paths)[:60]:
            e = atlas.paths[key][2]
            if state.is_unset(e) and not state.is_bridge(e):
                dec = state.feed(e)
                if dec.is_star:
                    assert dec.kind in ("good", "residual")


class TestDominance:
    def test_identical_samples_pass(self):
        rng = np.random.default_rng(0)
        xs = rng.integers(0, 6, size=10 ** 4)
        assert dominance_test(xs, xs.copy()).ok

    def test_shift_dominates(self):
        rng = np.random.default_rng(1)
        xs = rng.integers(0, 6, size=10 ** 4)
        assert dominance_test(xs, xs + 1).ok

    def test_reverse_shift_fails(self):
        rng = np.random.default_rng(2)
        xs = rng.integers(0, 6, size=10 ** 4)
        assert not dominance_test(xs + 1, xs).ok

    def test_undersized_rejected(self):
        with pytest.raises(ValueError):
            dominance_test([1, 2, 3], [1, 2, 3])


def test_transcript_dump():
    state = fresh_state(4)
    e = next(e for e in range(state.top.n_edges) if e not in state.atlas.edge_index)
    state.feed(e)
    doc = state.dump_transcript()
    assert '"nonstar"' in doc
