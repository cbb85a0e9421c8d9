"""Monte Carlo harness: experiments, exact oracles, persistence.

Trials derive their generators from (master seed, trial index), so results
are bit-identical regardless of execution order or worker count.  Failure
rates are compared against the closed-form bounds through one-sided
Clopper-Pearson upper limits; a bound at or above 1 is reported as vacuous
rather than counted as a meaningful PASS.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from itertools import product
from math import comb
from multiprocessing import get_context

import numpy as np
from scipy import stats

from . import bounds as bounds_mod
from .boolcore import (STAR, Branch, DecisionTree, Dnf, Leaf, Literal, Node,
                       Restriction, Term, branches, depth, restrict_tree_simple,
                       tree_variables)
from .canonical import DnfFamily, build_cdt, ccdt_depth
from .game import (GameState, _LazyCoins, dominance_test, run_algorithm_A,
                   run_algorithm_A_grid, run_algorithm_A_tilde,
                   run_algorithm_A_tilde_grid)
from .restrictions import (GridParams, GridRestriction, sample_grid_restriction,
                           sample_uniform)

SCHEMA_VERSION = "switchlab.result.v1"


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

def random_kdnf(n_vars: int, n_terms: int, k: int, rng) -> Dnf:
    """n_terms terms of width exactly k; variables drawn without replacement
    per term, signs fair."""
    terms = []
    for _ in range(n_terms):
        vs = rng.choice(n_vars, size=k, replace=False)
        terms.append(Term(tuple(Literal(int(v), bool(rng.integers(0, 2))) for v in vs)))
    return Dnf(tuple(terms), k)


def random_family(n_vars: int, s: int, n_terms: int, k: int, rng) -> DnfFamily:
    return DnfFamily(tuple(random_kdnf(n_vars, n_terms, k, rng) for _ in range(s)), k)


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

def estimate_failure(trials: int, failures: int, level: float = 0.999) -> float:
    """One-sided Clopper-Pearson upper confidence limit."""
    if failures > trials:
        raise ValueError("failures exceed trials")
    if failures == trials:
        return 1.0
    return float(stats.beta.ppf(level, failures + 1, trials - failures))


def uniform_chi2_pvalue(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    return float(stats.chisquare(counts).pvalue)


# ---------------------------------------------------------------------------
# Experiment configuration and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    trials: int
    seed: int
    t_values: tuple[int, ...]
    p: float = 0.0
    k: int = 2
    ell: int = 1
    s: int = 1                  # family size (multi/grid); term count for single
    terms: int = 4              # terms per DNF in family experiments
    n_vars: int = 20
    n: int = 48
    delta: int = 2
    confidence: float = 0.999

    def to_dict(self) -> dict:
        d = asdict(self)
        d["t_values"] = list(self.t_values)
        return d

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["t_values"] = tuple(d["t_values"])
        return ExperimentConfig(**d)


@dataclass
class ResultRow:
    t: int
    trials: int
    failures: int
    p_hat: float
    cp_upper: float
    bound_log: float
    bound_linear: float
    vacuous: bool
    verdict: str


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[ResultRow]

    @property
    def ok(self) -> bool:
        return all(r.verdict == "PASS" for r in self.rows)

    def to_json(self) -> str:
        return json.dumps({
            "schema": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "rows": [asdict(r) for r in self.rows],
        }, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "trials", "failures", "p_hat", "cp_upper",
                    "bound_log", "bound_linear", "vacuous", "verdict"])
        for r in self.rows:
            w.writerow([r.t, r.trials, r.failures,
                        format(r.p_hat, ".10g"), format(r.cp_upper, ".10g"),
                        format(r.bound_log, ".10g"), format(r.bound_linear, ".10g"),
                        int(r.vacuous), r.verdict])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{self.config.kind}: trials={self.config.trials} seed={self.config.seed}"]
        for r in self.rows:
            note = " (bound vacuous)" if r.vacuous else ""
            lines.append(f"  t={r.t}: failures={r.failures} cp_upper={r.cp_upper:.3g}"
                         f" bound={r.bound_linear:.3g}{note} -> {r.verdict}")
        return "\n".join(lines)


def _trial_rng(seed: int, index: int):
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, index)))


def _trial_depth(cfg: ExperimentConfig, index: int) -> int:
    rng = _trial_rng(cfg.seed, index)
    if cfg.kind == "single_sl":
        F = random_kdnf(cfg.n_vars, cfg.s, cfg.k, rng)
        tree = build_cdt(F)
        rho = sample_uniform(range(cfg.n_vars), cfg.p, rng)
        return depth(restrict_tree_simple(tree, rho))
    if cfg.kind == "multi_sl":
        fam = random_family(cfg.n_vars, cfg.s, cfg.terms, cfg.k, rng)
        rho = sample_uniform(range(cfg.n_vars), cfg.p, rng)
        return ccdt_depth(fam, cfg.ell, rho, "plain")
    if cfg.kind == "grid_sl":
        params = GridParams(cfg.n, cfg.delta)
        rho = sample_grid_restriction(params, rng)
        n_edges = 2 * cfg.n * cfg.n
        fam = random_family(n_edges, cfg.s, cfg.terms, cfg.k, rng)
        return ccdt_depth(fam, cfg.ell, rho, "independent")
    raise ValueError(f"unknown experiment kind {cfg.kind!r}")


def _chunk_failures(args) -> np.ndarray:
    cfg_dict, lo, hi = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    out = np.zeros(len(cfg.t_values), dtype=np.int64)
    for idx in range(lo, hi):
        d = _trial_depth(cfg, idx)
        for j, t in enumerate(cfg.t_values):
            if d >= t:
                out[j] += 1
    return out


def _bound_for(cfg: ExperimentConfig, t: int) -> bounds_mod.LogProb:
    if cfg.kind == "single_sl":
        return bounds_mod.bound_single_sl(cfg.p, cfg.k, t)
    if cfg.kind == "multi_sl":
        return bounds_mod.bound_multi_uniform(cfg.s, cfg.ell, cfg.p, cfg.k, t)
    if cfg.kind == "grid_sl":
        return bounds_mod.bound_grid_msl(cfg.s, cfg.ell, cfg.k, cfg.delta, t)
    raise ValueError(cfg.kind)


CHUNK = 512   # fixed so the trial partition is independent of worker count


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    jobs = [(cfg.to_dict(), lo, min(lo + CHUNK, cfg.trials))
            for lo in range(0, cfg.trials, CHUNK)]
    if threads <= 1:
        parts = [_chunk_failures(j) for j in jobs]
    else:
        with get_context("fork").Pool(threads) as pool:
            parts = pool.map(_chunk_failures, jobs)
    failures = np.sum(parts, axis=0) if parts else np.zeros(len(cfg.t_values), dtype=np.int64)
    rows = []
    for j, t in enumerate(cfg.t_values):
        f = int(failures[j])
        cp = estimate_failure(cfg.trials, f, cfg.confidence)
        b = _bound_for(cfg, t)
        verdict = "PASS" if (b.vacuous or cp <= b.linear) else "FAIL"
        rows.append(ResultRow(t, cfg.trials, f, f / cfg.trials, cp,
                              b.log_value, b.linear, b.vacuous, verdict))
    return ExperimentResult(cfg, rows)


def run_single_sl(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    if cfg.kind != "single_sl":
        cfg = replace(cfg, kind="single_sl")
    return run_experiment(cfg, threads)


def run_multi_sl_uniform(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    if cfg.kind != "multi_sl":
        cfg = replace(cfg, kind="multi_sl")
    return run_experiment(cfg, threads)


def run_grid_sl(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    if cfg.kind != "grid_sl":
        cfg = replace(cfg, kind="grid_sl")
    return run_experiment(cfg, threads)


# ---------------------------------------------------------------------------
# Exact oracles for the sampling equivalences
# ---------------------------------------------------------------------------

def walk_length_dist_restrict_first(tree: DecisionTree, p: Fraction) -> dict[int, Fraction]:
    """Way (1): draw the restriction, then walk the restricted tree."""
    vs = sorted(tree_variables(tree))
    out: dict[int, Fraction] = defaultdict(Fraction)
    w_star, w_bit = Fraction(p), (1 - Fraction(p)) / 2
    for combo in product((0, 1, STAR), repeat=len(vs)):
        weight = Fraction(1)
        assign = {}
        for v, a in zip(vs, combo):
            if a == STAR:
                weight *= w_star
            else:
                weight *= w_bit
                assign[v] = a
        if weight == 0:
            continue
        reduced = restrict_tree_simple(tree, Restriction(assign))
        for br in branches(reduced):
            out[len(br)] += weight * Fraction(1, 2 ** len(br))
    return dict(out)


def walk_length_dist_mask_after(tree: DecisionTree, p: Fraction) -> dict[int, Fraction]:
    """Way (2): walk the full tree, keep each step with probability p."""
    out: dict[int, Fraction] = defaultdict(Fraction)
    pf = Fraction(p)
    for br in branches(tree):
        L = len(br)
        w = Fraction(1, 2 ** L)
        for j in range(L + 1):
            out[j] += w * comb(L, j) * pf ** j * (1 - pf) ** (L - j)
    return {k: v for k, v in out.items() if v}


def enumerate_canonical_trees(max_depth: int, max_vars: int, label_leaves: bool = False):
    """Proper trees with variables named in first-use order.

    Every tree equals one of these up to a variable bijection (and leaf
    relabeling when label_leaves is off), which is exactly the symmetry the
    walk-length distributions are invariant under.
    """

    def rec(budget: int, path: tuple[int, ...], introduced: int):
        if label_leaves:
            yield Leaf(0), introduced
            yield Leaf(1), introduced
        else:
            yield Leaf(0), introduced
        if budget == 0:
            return
        choices = [v for v in range(introduced) if v not in path]
        if introduced < max_vars:
            choices.append(introduced)
        for v in choices:
            base = max(introduced, v + 1)
            for left, i1 in rec(budget - 1, path + (v,), base):
                for right, i2 in rec(budget - 1, path + (v,), i1):
                    yield Node(v, left, right), i2

    for tree, _ in rec(max_depth, (), 0):
        yield tree


@dataclass
class EquivalenceReport:
    trees_checked: int
    mismatches: int
    algo_cases: int
    algo_mismatches: int
    dominance_summary: str | None
    ok: bool

    def summary(self) -> str:
        lines = [
            f"walk-length equivalence: {self.trees_checked} trees, "
            f"{self.mismatches} mismatches",
            f"algorithm-path equivalence: {self.algo_cases} cases, "
            f"{self.algo_mismatches} mismatches",
        ]
        if self.dominance_summary:
            lines.append(self.dominance_summary)
        lines.append("equivalence suite: " + ("PASS" if self.ok else "FAIL"))
        return "\n".join(lines)


def _walk_lengths_under(tree: DecisionTree, assign: dict[int, int],
                        scale: int) -> dict[int, int]:
    """Free-step length masses of the walk down tree restricted by assign.

    Masses are integers scaled by 2^scale, so the result is exact while the
    free depth stays at most scale.
    """
    if isinstance(tree, Leaf):
        return {0: 1 << scale}
    a = assign.get(tree.var)
    if a is not None:
        return _walk_lengths_under(tree.child(a), assign, scale)
    d0 = _walk_lengths_under(tree.child0, assign, scale)
    d1 = _walk_lengths_under(tree.child1, assign, scale)
    out: dict[int, int] = {}
    for d in (d0, d1):
        for length, mass in d.items():
            out[length + 1] = out.get(length + 1, 0) + (mass >> 1)
    return out


def _dists_equal_exact(tree: DecisionTree, p: Fraction, max_depth: int) -> bool:
    """Integer-exact comparison of the two walk-length laws of Lemma-style
    sampling: restrict first versus mask the full walk."""
    a, b = p.numerator, p.denominator
    vs = sorted(tree_variables(tree))
    V = len(vs)
    # way 1 numerators over denominator (2b)^V * 2^max_depth
    dist1: dict[int, int] = defaultdict(int)
    for combo in product(range(3), repeat=V):
        weight = 1
        assign = {}
        for v, c in zip(vs, combo):
            if c == 2:
                weight *= 2 * a
            else:
                weight *= b - a
                assign[v] = c
        if weight == 0:
            continue
        for length, mass in _walk_lengths_under(tree, assign, max_depth).items():
            dist1[length] += weight * mass
    # way 2 numerators over denominator (2b)^max_depth
    dist2: dict[int, int] = defaultdict(int)
    for br in branches(tree):
        L = len(br)
        for j in range(L + 1):
            dist2[j] += comb(L, j) * a ** j * (b - a) ** (L - j) * (2 * b) ** (max_depth - L)
    # cross-multiply: dist1 / ((2b)^V 2^D)  ==  dist2 / ((2b)^D)
    d1 = (2 * b) ** V * 2 ** max_depth
    d2 = (2 * b) ** max_depth
    keys = set(dist1) | set(dist2)
    return all(dist1.get(k2, 0) * d2 == dist2.get(k2, 0) * d1 for k2 in keys)


def check_walk_equivalence(max_depth: int = 4, max_vars: int = 4,
                           ps=(Fraction(1, 2), Fraction(1, 4))) -> tuple[int, int]:
    """(trees checked, mismatches) over all canonical shapes."""
    checked = mismatches = 0
    for tree in enumerate_canonical_trees(max_depth, max_vars):
        checked += 1
        for p in ps:
            if not _dists_equal_exact(tree, p, max_depth):
                mismatches += 1
    return checked, mismatches


def exact_algorithm_A_dist(family, p: Fraction, t: int, ell: int) -> dict[int, Fraction]:
    """|path| law of the uniform algorithm, enumerating (rho, x, y) exactly."""
    vs = sorted(set().union(*[f.variables for f in family]))
    pf = Fraction(p)
    w_star, w_bit = pf, (1 - pf) / 2
    out: dict[int, Fraction] = defaultdict(Fraction)
    bit_w = Fraction(1, 2 ** (2 * t))
    for combo in product((0, 1, STAR), repeat=len(vs)):
        weight = Fraction(1)
        assign = {}
        for v, a in zip(vs, combo):
            if a == STAR:
                weight *= w_star
            else:
                weight *= w_bit
                assign[v] = a
        if weight == 0:
            continue
        rho = Restriction(assign)
        for xbits in product((0, 1), repeat=t):
            for ybits in product((0, 1), repeat=t):
                _, path = run_algorithm_A(family, rho, xbits, ybits, ell)
                out[len(path)] += weight * bit_w
    return dict(out)


def exact_algorithm_A_tilde_dist(family, p: Fraction, t: int, ell: int) -> dict[int, Fraction]:
    """|path| law of A-tilde, enumerating coins and y exactly."""
    vs = sorted(set().union(*[f.variables for f in family]))
    pf = Fraction(p)
    out: dict[int, Fraction] = defaultdict(Fraction)
    y_w = Fraction(1, 2 ** t)
    for star_mask in product((False, True), repeat=len(vs)):
        w_star = Fraction(1)
        for flag in star_mask:
            w_star *= pf if flag else (1 - pf)
        if w_star == 0:
            continue
        for dir_bits in product((0, 1), repeat=len(vs)):
            w = w_star * Fraction(1, 2 ** len(vs))
            coins = _LazyCoins(rng=None, p=float(pf))
            coins.star = dict(zip(vs, star_mask))
            coins.value = dict(zip(vs, dir_bits))
            for ybits in product((0, 1), repeat=t):
                _, path, _ = run_algorithm_A_tilde(family, ybits, ell, float(pf),
                                                   rng=None, coins=coins)
                out[len(path)] += w * y_w
    return dict(out)


def run_equivalence_suite(dominance_samples: int = 10 ** 4,
                          seed: int = 20240901,
                          include_dominance: bool = True) -> EquivalenceReport:
    """Exact walk equivalence, exact algorithm equivalence, grid dominance."""
    checked, mism = check_walk_equivalence()
    algo_cases = algo_mism = 0
    fixtures = [
        [Dnf((Term((Literal(0, True),)),), 1)],
        [Dnf((Term((Literal(0, True), Literal(1, False))),
              Term((Literal(1, True), Literal(2, True)))), 2)],
        [Dnf((Term((Literal(0, True), Literal(1, True))),), 2),
         Dnf((Term((Literal(1, False), Literal(2, True))),), 2)],
    ]
    for fam in fixtures:
        for p in (Fraction(1, 2), Fraction(1, 4)):
            for t, ell in ((2, 1), (4, 1)):
                algo_cases += 1
                if exact_algorithm_A_dist(fam, p, t, ell) != \
                        exact_algorithm_A_tilde_dist(fam, p, t, ell):
                    algo_mism += 1
    dom_summary = None
    dom_ok = True
    if include_dominance:
        verdict = grid_dominance_experiment(dominance_samples, seed)
        dom_summary = verdict.summary()
        dom_ok = verdict.ok
    ok = mism == 0 and algo_mism == 0 and dom_ok
    return EquivalenceReport(checked, mism, algo_cases, algo_mism, dom_summary, ok)


def _dominance_family(params: GridParams, rng, s: int = 2, terms: int = 2, k: int = 2):
    n_edges = 2 * params.n * params.n
    return [random_kdnf(n_edges, terms, k, rng) for _ in range(s)]


def grid_dominance_experiment(n_samples: int = 10 ** 4, seed: int = 20240901,
                              n: int = 48, delta: int = 2,
                              t: int = 4, ell: int = 1):
    """|path| of grid A-tilde should dominate grid A at matched parameters."""
    params = GridParams(n, delta)
    a_lens = np.zeros(n_samples, dtype=np.int64)
    b_lens = np.zeros(n_samples, dtype=np.int64)
    for i in range(n_samples):
        rng = _trial_rng(seed, i)
        fam = _dominance_family(params, rng)
        rho = sample_grid_restriction(params, rng)
        xbits = [int(b) for b in rng.integers(0, 2, size=t)]
        ybits = [int(b) for b in rng.integers(0, 2, size=t)]
        _, path = run_algorithm_A_grid(fam, rho, xbits, ybits, ell)
        a_lens[i] = len(path)
    for i in range(n_samples):
        rng = _trial_rng(seed + 1, i)
        fam = _dominance_family(params, rng)
        state = GameState(params, "II", rng)
        ybits = [int(b) for b in rng.integers(0, 2, size=t)]
        _, path, _ = run_algorithm_A_tilde_grid(fam, ybits, ell, state)
        b_lens[i] = len(path)
    return dominance_test(a_lens, b_lens, alpha=0.001, min_samples=min(n_samples, 10 ** 4))


# ---------------------------------------------------------------------------
# Parity correlation kernel
# ---------------------------------------------------------------------------

def correlation_with_parity(tree: DecisionTree, variables) -> Fraction:
    """Pr[tree = parity] - Pr[tree != parity] over uniform inputs, exactly.

    Only branches querying every listed variable contribute; others average
    to zero against the parity factor.
    """
    vs = list(variables)
    vset = set(vs)
    extra = tree_variables(tree) - vset
    if extra:
        raise ValueError(f"tree queries variables outside the list: {sorted(extra)}")
    total = Fraction(0)
    for br in branches(tree):
        queried = {v for v, _ in br.steps}
        if not vset <= queried:
            continue
        par = sum(b for v, b in br.steps if v in vset) % 2
        sign = 1 if br.leaf == par else -1
        total += sign * Fraction(1, 2 ** len(br))
    return total
