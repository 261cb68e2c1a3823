"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines as they
happen (pytest shows captured output on failure anyway).  Criterion 12 is the
heavy one (~30 s with two workers, ~60 s serial); setting
UVBOOT_ACCEPTANCE_SMOKE=1 switches it to the reduced 20-trial mode with the
wide [0.80, 1.00] band for constrained CI pipelines.
"""

import json
import os
import time

import numpy as np

from uvboot import (
    bootstrap_u,
    bootstrap_v,
    get_kernel,
    hoeffding_split,
    kernel_ids,
    pair_sums,
    u_statistic,
    v_statistic,
)
from uvboot.boot import ReplicateEngine
from uvboot.datagen import DistSpec, iid_sample
from uvboot.mc import ExperimentConfig, run_experiment
from uvboot.ustat import deleted_u_all
from uvboot.weights import derive_stream, dispersion_q, draw_weight_matrix

from conftest import (
    brute_bootstrap_u,
    brute_bootstrap_v,
    brute_deleted,
    brute_split,
    brute_u,
    brute_v,
    random_sample,
    random_weights,
)


def check(criterion, description, passed, detail=""):
    line = f"[acceptance] criterion {criterion:>2}: {'PASS' if passed else 'FAIL'} - {description}"
    if detail:
        line += f" | {detail}"
    print(line)
    assert passed, line


def load_config(repo_root, name):
    with open(repo_root / "docs" / "examples" / name, "r", encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def test_criterion_01_exactness(repo_root):
    start = time.perf_counter()
    lib_time = 0.0
    worst = 0.0
    count = 0
    for seed in range(20):
        for kid in kernel_ids():
            kernel = get_kernel(kid)
            rng = np.random.default_rng(1000 + seed)
            n = int(rng.integers(3, 7))
            s = random_sample(kernel, n, rng)
            w = random_weights(n, int(rng.integers(2, 9)), rng)
            proj = rng.normal(size=n)

            t0 = time.perf_counter()
            u = u_statistic(kernel, s)
            v = v_statistic(kernel, s)
            deleted = deleted_u_all(pair_sums(kernel, s), n)
            us = bootstrap_u(kernel, s, w)
            vs = bootstrap_v(kernel, s, w)
            split = hoeffding_split(kernel, s, w, proj)
            lib_time += time.perf_counter() - t0

            errs = [
                abs(u - brute_u(kernel, s)),
                abs(v - brute_v(kernel, s)),
                abs(us - brute_bootstrap_u(kernel, s, w)),
                abs(vs - brute_bootstrap_v(kernel, s, w)),
                max(abs(deleted[i] - brute_deleted(kernel, s, i)) for i in range(n)),
            ]
            bg, bh = brute_split(kernel, s, w, proj)
            errs += [abs(split.g - bg), abs(split.h_lin - bh)]
            worst = max(worst, max(errs))
            count += 1
    elapsed = time.perf_counter() - start
    check(
        1,
        "u/v/bootstrap/deleted/split match brute force to 1e-12",
        worst < 1e-12 and lib_time < 1.0,
        f"{count} instances, worst |err| = {worst:.2e}, library time {lib_time:.2f}s "
        f"(with oracles {elapsed:.2f}s)",
    )


def test_criterion_02_algebraic_identities():
    worst = 0.0
    for seed in range(25):
        rng = np.random.default_rng(2000 + seed)
        kernel = get_kernel(list(kernel_ids())[seed % 5])
        n = int(rng.integers(3, 40))
        s = random_sample(kernel, n, rng)
        w = random_weights(n, int(rng.integers(2, 60)), rng)
        proj = rng.normal(size=n)

        ps = pair_sums(kernel, s)
        u = u_statistic(kernel, s)
        v = v_statistic(kernel, s)
        worst = max(worst, abs(v - ((n - 1) / n * u + float(ps.diag.sum()) / n**2)))

        us = bootstrap_u(kernel, s, w)
        vs = bootstrap_v(kernel, s, w)
        diag_term = float((w.counts.astype(float) ** 2 @ kernel.diag(s.points))) / (w.m * (w.m - 1))
        worst = max(worst, abs(vs - us - diag_term))

        split = hoeffding_split(kernel, s, w, proj)
        worst = max(worst, abs(split.g + split.h_lin - (us - u)))
    check(2, "v/u relation, v*/u* diagonal identity, split identity to 1e-12", worst < 1e-12,
          f"worst |err| = {worst:.2e}")


def test_criterion_03_weight_law():
    start = time.perf_counter()
    n = m = 100
    draws = 10**4
    mat = draw_weight_matrix(n, m, draws, derive_stream(20260810, 0, 0))
    sums_ok = bool(np.all(mat.sum(axis=1) == m))
    q = dispersion_q(mat, m)
    target = (1 - 1 / n) / m
    se = q.std(ddof=1) / np.sqrt(draws)
    dev = abs(float(q.mean()) - target)
    elapsed = time.perf_counter() - start
    check(3, "all draws sum to m; mean dispersion within 3 SE of (1-1/n)/m",
          sums_ok and dev < 3 * se and elapsed < 5.0,
          f"mean Q = {q.mean():.6f} vs {target:.6f} ({dev / se:.2f} SE), {elapsed:.2f}s")


def test_criterion_04_dispersion_concentration():
    start = time.perf_counter()
    n = m = 1000
    mat = draw_weight_matrix(n, m, 1000, derive_stream(20260810, 0, 1))
    t = m * dispersion_q(mat, m) / (1 - 1 / n)
    frac = float(np.mean(np.abs(t - 1.0) < 0.2))
    elapsed = time.perf_counter() - start
    check(4, "normalized dispersion within 0.2 of 1 in >= 95% of draws",
          frac >= 0.95 and elapsed < 5.0, f"fraction = {frac:.3f}, {elapsed:.2f}s")


def test_criterion_05_jackknife_calibration():
    start = time.perf_counter()
    s1 = iid_sample(DistSpec.normal(1, 1), 2000, derive_stream(20260810, 1, 0))
    sigma2_product = ReplicateEngine(get_kernel("product"), s1).sigma2_hat
    s2 = iid_sample(DistSpec.normal(0, 1), 2000, derive_stream(20260810, 1, 1))
    sigma2_variance = ReplicateEngine(get_kernel("variance"), s2).sigma2_hat
    elapsed = time.perf_counter() - start
    ok = abs(sigma2_product - 1.0) < 0.15 and abs(sigma2_variance - 0.5) < 0.10 and elapsed < 10.0
    check(5, "jackknife scale near 1.0 (product) and 0.5 (variance kernel)",
          ok, f"{sigma2_product:.4f} vs 1.0, {sigma2_variance:.4f} vs 0.5, {elapsed:.2f}s")


def test_criterion_06_clt_pivots(repo_root):
    start = time.perf_counter()
    report = run_experiment(load_config(repo_root, "clt500.json"))
    elapsed = time.perf_counter() - start
    ks_u = report.tests["ks_pivot_u"]
    ks_v = report.tests["ks_pivot_v"]
    check(6, "KS(pivot_u) and KS(pivot_v) below 0.05 at n = m = 500, R = 2000",
          report.passed is True and ks_u < 0.05 and ks_v < 0.05 and elapsed < 120.0,
          f"ks_u = {ks_u:.4f}, ks_v = {ks_v:.4f}, {elapsed:.1f}s")


def test_criterion_07_fixed_n_consistency(repo_root):
    start = time.perf_counter()
    report = run_experiment(load_config(repo_root, "fixedn30.json"))
    elapsed = time.perf_counter() - start
    q = report.tests["q_dev_u"]
    check(7, "90th pct of |u* - (29/30) u_n| strictly decreasing, per-decade ratio in band",
          report.passed is True and elapsed < 30.0,
          f"q90 = {['%.4f' % v for v in q]}, ratios = {['%.2f' % r for r in report.tests['shrink_ratios_u']]}, {elapsed:.1f}s")


def test_criterion_08_growing_consistency(repo_root):
    start = time.perf_counter()
    report = run_experiment(load_config(repo_root, "growing.json"))
    elapsed = time.perf_counter() - start
    q = report.tests["q_dev_u"]
    check(8, "95th pct of |u* - 1| at n = 800 at most half of n = 200",
          report.passed is True and elapsed < 120.0,
          f"q95 = {['%.4f' % v for v in q]} (ratio {q[1] / q[0]:.3f}), {elapsed:.1f}s")


def test_criterion_09_mixing_consistency(repo_root):
    start = time.perf_counter()
    report = run_experiment(load_config(repo_root, "mixing2000.json"))
    elapsed = time.perf_counter() - start
    frac = report.tests["fractions_u"][0]
    check(9, "|u* - AR(1) closed-form target| < 0.05 in >= 95% of runs",
          report.passed is True and elapsed < 120.0,
          f"fraction = {frac:.2f}, target = {report.tests['targets'][0]:.5f}, {elapsed:.1f}s")


def test_criterion_10_marcinkiewicz_trend(repo_root):
    start = time.perf_counter()
    report = run_experiment(load_config(repo_root, "marcinkiewicz_u.json"))
    elapsed = time.perf_counter() - start
    med = report.tests["median_scaled_u"]
    check(10, "median |u*/m| collapses by >= 5x from n = 50 to n = 200 (m = n^3)",
          report.passed is True and elapsed < 60.0,
          f"medians = {['%.2e' % v for v in med]} (factor {med[0] / med[1]:.1f}), {elapsed:.1f}s")


def test_criterion_11_array_lln(repo_root):
    start = time.perf_counter()
    report = run_experiment(load_config(repo_root, "arraylln.json"))
    elapsed = time.perf_counter() - start
    check(11, "symmetric-array means converge; fixed-n and exceedance trends monotone",
          report.passed is True and elapsed < 60.0,
          f"sym medians = {['%.3f' % v for v in report.tests['sym_medians_unit']]}, "
          f"exceed probs = {report.tests['exceed_prob']}, {elapsed:.1f}s")


def test_criterion_12_ci_coverage(repo_root):
    # full mode: 200 outer trials x 2000 inner replicates at n = m = 500
    # (~30 s with two workers); smoke mode via UVBOOT_ACCEPTANCE_SMOKE=1
    config = load_config(repo_root, "coverage200.json")
    smoke = os.environ.get("UVBOOT_ACCEPTANCE_SMOKE") == "1"
    if smoke:
        config.outer_trials = 20
        config.thresholds = {"coverage_band": [0.80, 1.00]}
    start = time.perf_counter()
    report = run_experiment(config)
    elapsed = time.perf_counter() - start
    band = report.tests["coverage_band"]
    check(12, f"bootstrap-t coverage within {band} over {config.outer_trials} trials"
          + (" (smoke mode)" if smoke else ""),
          report.passed is True,
          f"coverage = {report.tests['coverage']:.3f}, {elapsed:.1f}s")


def test_criterion_13_reproducibility(repo_root):
    for name in ("fixedn30.json", "marcinkiewicz_u.json"):
        a = run_experiment(load_config(repo_root, name))
        b = run_experiment(load_config(repo_root, name))
        if a.body_bytes() != b.body_bytes():
            check(13, f"byte-identical report body for {name}", False)
    check(13, "verify reports byte-identical for repeated runs with one master seed", True)
