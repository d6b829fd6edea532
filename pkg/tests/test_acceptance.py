"""Acceptance suite: one PASS/FAIL line per criterion, at its stated tolerance."""

import itertools
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from clockrc.clock import build_weight_table
from clockrc.domination import (
    beta0,
    beta0_bound_at,
    beta0_upper_bound,
    varphi,
    varphi_q4_closed_form,
    verify_alpha_bound,
)
from clockrc.mcmc import Z99, estimate_coexistence, sample_chains
from clockrc.oracle import (
    alpha_table,
    enumerate_all,
    lemma_violations,
    load_corpus,
    verify_es_marginals,
    verify_positive_correlations,
)
from clockrc.percolation import crossing_probabilities, estimate_pc, thinning_test
from clockrc.reflection import sweep_injection

QS = (2, 3, 4, 5)
BETAS = (0.25, 1.0, 4.0)
PILOT = json.loads((Path(__file__).parent / "fixtures" / "coexistence_pilot.json").read_text())


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def corpus():
    return load_corpus()


def test_c1_es_marginals(corpus, report):
    t0 = time.perf_counter()
    worst = 0.0
    for q, beta in itertools.product(QS, BETAS):
        wt = build_weight_table(q, beta)
        for g in corpus:
            rep = verify_es_marginals(g, wt)
            worst = max(worst, rep.dev_phi, rep.dev_mu, rep.dev_Z)
    secs = time.perf_counter() - t0
    report(1, worst <= 1e-10 and secs < 120,
           f"{len(corpus)} graphs x {len(QS) * len(BETAS)} (q, beta), max deviation {worst:.2e} "
           f"(tol 1e-10), {secs:.1f}s (< 120s)")


def test_c2_lemma_counts(corpus, report):
    t0 = time.perf_counter()
    bad = 0
    for q in QS:
        wt = build_weight_table(q, 1.0)  # compatibility does not depend on beta
        bad += sum(lemma_violations(enumerate_all(g, wt)) for g in corpus)
    secs = time.perf_counter() - t0
    report(2, bad == 0 and secs < 300, f"{bad} violations over all omega, x, a, q in {QS}; {secs:.1f}s (< 300s)")


def test_c3_injection(corpus, report):
    pairs = failures = disagree = 0
    for q in QS:
        wt = build_weight_table(q, 1.0)
        for g in corpus:
            for x in g.free_vertices:
                rep = sweep_injection(g, wt, int(x))
                pairs += rep.pairs
                failures += rep.not_injective + rep.image_outside + rep.boundary_hits + rep.hemisphere_failures
                disagree += rep.lemma_disagreements
    report(3, failures == 0 and disagree == 0 and pairs > 0,
           f"{pairs} (omega, sigma) pairs, {failures} injectivity/image/boundary failures, "
           f"{disagree} disagreements with the counting check")


def test_c4_holley_premise(corpus, report):
    worst_slack = math.inf
    for q, beta in itertools.product(QS, BETAS):
        wt = build_weight_table(q, beta)
        for g in corpus:
            worst_slack = min(worst_slack, verify_alpha_bound(g, wt).slack)
    worst_rho = math.inf
    for rho, q in itertools.product((0.3, 0.6, 0.9), QS):
        wt = build_weight_table(q, beta0(rho, q) + 1e-6)
        alpha = min(alpha_table(enumerate_all(g, wt)).min() for g in corpus)
        worst_rho = min(worst_rho, alpha - rho)
    report(4, worst_slack >= -1e-10 and worst_rho >= -1e-8,
           f"min alpha - varphi = {worst_slack:.3e} (>= -1e-10); "
           f"min alpha - rho at beta0(rho)+1e-6 = {worst_rho:.3e} (>= -1e-8)")


def test_c5_threshold_curve(report):
    betas = np.linspace(0.01, 20, 4000)
    dev = float(np.max(np.abs([varphi(b, 4) for b in betas] - varphi_q4_closed_form(betas))))
    b0 = beta0(0.6, 4)
    report(5, dev <= 1e-12 and abs(b0 - 1.751) <= 1e-3,
           f"q=4 curve vs closed form max dev {dev:.1e} (tol 1e-12); beta0(0.6, 4) = {b0:.6f} (1.751 +- 1e-3)")


def test_c6_explicit_bound(report):
    val = beta0_upper_bound(1.0, 2, 2, 0.5)
    ok_val = abs(val - math.log(4) / 2) <= 1e-12
    pc = 0.5
    worst = math.inf
    for q in range(2, 17):
        for p in (0.55, 0.7, 0.85, 1.0):
            for rho in np.linspace(pc / p, 1.0, 40)[1:-1]:
                worst = min(worst, beta0_bound_at(rho, q) - beta0(rho, q))
    ratios = [beta0_upper_bound(1.0, q, 2, pc) / (q * q * math.log(q)) for q in (64, 256)]
    spread = abs(ratios[1] / ratios[0] - 1)
    report(6, ok_val and worst >= 0 and spread < 0.10,
           f"bound(1,2,2,0.5) = {val:.12f} vs ln4/2; min(bound - beta0) = {worst:.3e} (>= 0) over q <= 16; "
           f"ratio spread q=64..256 = {spread:.2%} (< 10%)")


def test_c7_positive_correlations(corpus, report):
    worst = math.inf
    for q, beta in itertools.product(QS, BETAS):
        wt = build_weight_table(q, beta)
        for g in corpus:
            dist = enumerate_all(g, wt)
            for x in range(g.n_vertices):
                worst = min(worst, verify_positive_correlations(g, wt, x, dist).slack)
    report(7, worst >= -1e-10, f"min slack {worst:.3e} (>= -1e-10) over every probe vertex")


def test_c8_percolation(report):
    rng = np.random.Generator(np.random.Philox(2024))
    t0 = time.perf_counter()
    pc = estimate_pc([64], 1000, rng)
    thin = thinning_test(0.9, 0.7, 16, 10_000, rng)
    secs = time.perf_counter() - t0
    report(8, 0.45 <= pc <= 0.55 and thin.passed(0.01) and secs < 600,
           f"p_c(n=64, 1000 samples, 0.02 grid) = {pc:.4f} in [0.45, 0.55]; thinning p-values "
           f"{thin.p_open:.3f} (open), {thin.p_connection:.3f} (connection) >= 0.01; {secs:.1f}s (< 600s)")


def _coexistence(name):
    kw = {k: PILOT[name][k] for k in ("q", "beta", "p", "n", "d", "quench_samples", "sweeps", "burnin")}
    t0 = time.perf_counter()
    rep = estimate_coexistence(rng=np.random.Generator(np.random.Philox(2024)), **kw)
    return rep, time.perf_counter() - t0


def _in_band(rep, name, k=4.0):
    pilot = PILOT[name]
    width = k * math.hypot(rep.delta_se, pilot["delta_se"]) + 0.02
    return abs(rep.delta - pilot["delta"]) <= width


@pytest.mark.slow
def test_c9_cold(report):
    rep, secs = _coexistence("cold")
    ok = rep.delta_positive and rep.i15_flag and secs < 1200 and _in_band(rep, "cold")
    report("9 (p=1, beta=2.0)", ok,
           f"Delta = {rep.delta:.4f} +- {rep.delta_se:.4f}, lower 99% bound {rep.delta - Z99 * rep.delta_se:.4f} > 0; "
           f"connection {rep.connection:.4f}; i15 flag {rep.i15_flag}; converged {rep.converged}; {secs:.0f}s")


@pytest.mark.slow
def test_c9_dilute(report):
    rep, secs = _coexistence("dilute")
    ok = rep.delta_positive and rep.i15_flag and secs < 1200 and _in_band(rep, "dilute")
    report("9 (p=0.75, beta=2.5, quenched)", ok,
           f"{len(rep.replicas)} replicas, Delta = {rep.delta:.4f} +- {rep.delta_se:.4f}, lower 99% bound "
           f"{rep.delta - Z99 * rep.delta_se:.4f} > 0; connection {rep.connection:.4f}; i15 flag {rep.i15_flag}; "
           f"{secs:.0f}s")


@pytest.mark.slow
def test_c9_hot(report):
    rep, secs = _coexistence("hot")
    ok = rep.delta_null and secs < 1200 and rep.connection < 0.01
    report("9 (p=1, beta=0.1)", ok,
           f"|Delta| = {abs(rep.delta):.4f} <= 3 * {rep.delta_se:.4f}; connection {rep.connection:.4f}; {secs:.0f}s")


def _pooled_chisquare(observed, expected):
    """Chi-square p-value after lumping bins with expected count below 5."""
    order = np.argsort(expected)
    e, o = expected[order], observed[order]
    small = np.cumsum(e) < 5
    if small.any():
        cut = int(np.argmin(small)) + 1
        e = np.concatenate([[e[:cut].sum()], e[cut:]])
        o = np.concatenate([[o[:cut].sum()], o[cut:]])
    if len(e) < 2:
        return 1.0
    return float(stats.chisquare(o, e * o.sum() / e.sum()).pvalue)


def _codes(rows, base):
    return rows @ (base ** np.arange(rows.shape[1] - 1, -1, -1))


def test_c10_mcmc_marginals(corpus, report):
    rng = np.random.Generator(np.random.Philox(2024))
    pvals = []
    for i, g in enumerate(corpus):
        q = QS[i % len(QS)]
        wt = build_weight_table(q, 1.0)
        dist = enumerate_all(g, wt)
        spins, omegas = sample_chains(g, wt, chains=1000, per_chain=100, burnin=100, rng=rng, thin=10)
        free = g.free_vertices
        s_codes = _codes(dist.spins[:, free], q)
        s_obs = np.bincount(np.searchsorted(np.sort(s_codes), _codes(spins[:, free], q)),
                            minlength=len(s_codes))
        pvals.append(_pooled_chisquare(s_obs, dist.mu[np.argsort(s_codes)] * len(spins)))
        w_codes = _codes(dist.omegas, wt.k + 1)
        w_obs = np.bincount(np.searchsorted(np.sort(w_codes), _codes(omegas, wt.k + 1)),
                            minlength=len(w_codes))
        pvals.append(_pooled_chisquare(w_obs, dist.phi[np.argsort(w_codes)] * len(omegas)))
    pvals = np.array(pvals)
    m = len(pvals)
    holm = np.minimum(1.0, np.maximum.accumulate(np.sort(pvals) * (m - np.arange(m))))
    report(10, bool(holm.min() >= 0.01),
           f"{m} chi-square tests (spin and derived-omega laws, 10^5 samples each), min raw p {pvals.min():.4f}, "
           f"min Holm-adjusted p {holm.min():.4f} (>= 0.01)")
