"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.  Every tolerance is pinned here, not configured.
"""

import math
import subprocess
import sys

import numpy as np

from roughsig import (
    EstimateParams,
    ExtensionConfig,
    LinearCdeProblem,
    PiecewiseLinearPath,
    SignatureFunctional,
    beta_threshold,
    calibrated_control,
    difference_hat_top_norms,
    flow_difference_bound,
    frac_factorial,
    lyons_extend_verbose,
    main_lemma_increment_bound,
    measure_epsilon,
    neoclassical_sides,
    shared_calibrated_control,
    signature,
    sinusoid_perturbation,
    solve_exact,
    solve_exact_trajectory,
    solve_series,
    truncated_product,
    verify_uniform_estimate,
)

from oracles import riemann_signature
from util import drift_path, random_walk_path, zigzag_path


def report(name: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_c1_chen_identity():
    # 200 random (path, triple) instances, d <= 3, <= 20 segments, N <= 6:
    # max coefficient error of X_{s,u} x X_{u,t} vs X_{s,t} below 1e-10
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(1, 4))
        n_seg = int(rng.integers(2, 21))
        path = random_walk_path(rng, d, n_seg)
        depth = int(rng.integers(1, 7))
        s, u, t = np.sort(rng.random(3))
        lhs = truncated_product(
            signature(path, s, u, depth), signature(path, u, t, depth)
        )
        rhs = signature(path, s, t, depth)
        worst = max(
            worst,
            max(float(np.max(np.abs(a - b))) for a, b in zip(lhs.levels, rhs.levels)),
        )
    report("criterion 1 (Chen identity)", worst < 1e-10,
           f"max coefficient error {worst:.3e} < 1e-10 over 200 instances")


def test_c2_signature_quadrature_oracle():
    # 20 random paths, levels <= 4: grid quadrature on 4096 cells agrees with
    # `signature` within 1e-3 relative, and refining the grid improves the
    # error at first order or better
    rng = np.random.default_rng(102)
    worst_rel = 0.0
    worst_ratio = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 4))
        n_seg = int(rng.integers(2, 21))
        path = drift_path(rng, d, n_seg, bounded_speed=True)
        sig = signature(path, 0.0, 1.0, 4)
        coarse = riemann_signature(path, 4, 4096)
        fine = riemann_signature(path, 4, 8192)
        for n in range(1, 5):
            ref = float(np.linalg.norm(sig.level(n)))
            e_coarse = float(np.linalg.norm(coarse[n] - sig.level(n))) / ref
            e_fine = float(np.linalg.norm(fine[n] - sig.level(n))) / ref
            worst_rel = max(worst_rel, e_coarse)
            if e_coarse > 1e-7:  # above round-off accumulation
                worst_ratio = max(worst_ratio, e_fine / e_coarse)
    ok = worst_rel < 1e-3 and worst_ratio <= 0.65
    report("criterion 2 (quadrature oracle)", ok,
           f"max rel err {worst_rel:.3e} < 1e-3; worst refinement ratio "
           f"{worst_ratio:.3f} <= 0.65")


def test_c3_neoclassical_inequality():
    # full sweep p in {1, 1.1, 1.5, 2, 2.5, 3.7}, x, y geometric in [0.01, 10],
    # n <= 12: lhs <= rhs * (1 + 1e-10); at p = 1 equality to 1e-10 relative
    xs = np.geomspace(0.01, 10.0, 13)
    worst_excess = -math.inf
    worst_p1_gap = 0.0
    count = 0
    for p in (1.0, 1.1, 1.5, 2.0, 2.5, 3.7):
        for x in xs:
            for y in xs:
                for n in range(13):
                    lhs, rhs = neoclassical_sides(p, float(x), float(y), n)
                    worst_excess = max(worst_excess, lhs / rhs - 1.0)
                    if p == 1.0:
                        worst_p1_gap = max(worst_p1_gap, abs(lhs - rhs) / rhs)
                    count += 1
    ok = worst_excess <= 1e-10 and worst_p1_gap < 1e-10
    report("criterion 3 (neo-classical inequality)", ok,
           f"{count} evaluations; worst lhs/rhs-1 = {worst_excess:.3e}; "
           f"worst p=1 relative gap {worst_p1_gap:.3e}")


def test_c4_extension_oracle():
    # p = 1 BV path lifted from level-1 data to depth 5 matches the directly
    # computed signature within 1e-8 per level; observed dyadic increments
    # decay geometrically at rate <= (1/2)^((n+1)/p - 1) * 1.05 and stay
    # below the refinement-increment envelope
    path = zigzag_path()
    beta = 2.5
    ctrl = calibrated_control(path, 1.0, beta)
    X = SignatureFunctional(path, 1.0, beta, ctrl, depth=1)
    cfg = ExtensionConfig(convergence_tol=1e-9, max_order=18, target_depth=5)
    lifted, logs = lyons_extend_verbose(X, 0.0, 1.0, cfg)
    direct = signature(path, 0.0, 1.0, 5)
    w01 = float(ctrl(0.0, 1.0))

    worst_err = 0.0
    rate_msgs = []
    ok = True
    for m in range(2, 6):
        err = float(np.max(np.abs(lifted.level(m) - direct.level(m))))
        worst_err = max(worst_err, err)
        incs = np.asarray(logs[m].increment_norms)
        live = incs[incs > 1e3 * np.finfo(float).eps]
        rate = float((live[-1] / live[0]) ** (1.0 / (live.size - 1)))
        rate_cap = 0.5 ** (m / 1.0 - 1.0) * 1.05
        envelope = np.array([
            0.5 ** (K * (m - 1.0)) * 2.0 * w01**m
            / (beta**2 * frac_factorial(float(m)))
            for K in range(incs.size)
        ])
        env_ok = bool(np.all(incs <= envelope * (1 + 1e-12)))
        ok &= err <= 1e-8 and rate <= rate_cap and env_ok
        rate_msgs.append(f"L{m}: err={err:.1e} rate={rate:.3f}<={rate_cap:.3f}")
    report("criterion 4 (extension oracle)", ok, "; ".join(rate_msgs))


def test_c5_main_lemma_audit():
    # 5 perturbed-path pairs, K = 0..8: every measured refinement increment
    # at level floor(p)+1 stays below the evaluated min-bound
    rng = np.random.default_rng(105)
    beta = 2.5
    worst_margin = math.inf
    for trial in range(5):
        g = drift_path(rng, 2, int(rng.integers(4, 9)), length=1.2)
        gt = sinusoid_perturbation(g, 2e-3, cycles=int(rng.integers(2, 5)))
        ctrl = shared_calibrated_control(g, gt, p=1.0, beta=beta)
        X = SignatureFunctional(g, 1.0, beta, ctrl, depth=1)
        Y = SignatureFunctional(gt, 1.0, beta, ctrl, depth=1)
        eps = measure_epsilon(X.with_depth(None), Y.with_depth(None), delta=1.0)
        params = EstimateParams(1.0, 1.0, eps, beta, float(ctrl(0.0, 1.0)))
        norms = difference_hat_top_norms(X, Y, ctrl, 0.0, 1.0, 1, 9)
        increments = np.diff(norms)
        limits = np.array([
            main_lemma_increment_bound(params, float(ctrl(0.0, 1.0)), 1, K)
            for K in range(9)
        ])
        worst_margin = min(worst_margin, float(np.min(limits - increments)))
    report("criterion 5 (refinement-increment audit)", worst_margin >= 0.0,
           f"5 pairs, K=0..8; min (bound - increment) = {worst_margin:.3e}")


def _theorem_case_run(gamma, p, delta, amplitude, seed):
    beta = 1.05 * beta_threshold(p, delta)
    gamma_t = sinusoid_perturbation(gamma, amplitude, cycles=3)
    ctrl = shared_calibrated_control(gamma, gamma_t, p=p, beta=beta, seed=seed)
    X = SignatureFunctional(gamma, p, beta, ctrl)
    Y = SignatureFunctional(gamma_t, p, beta, ctrl)
    eps = measure_epsilon(X, Y, delta=delta, seed=seed)
    params = EstimateParams(p, delta, eps, beta, float(ctrl(0.0, 1.0)))
    rep = verify_uniform_estimate(X, Y, params, levels_up_to=6,
                                  sample_pairs=64, seed=seed)
    return params, rep


def test_c6_theorem_three_cases():
    # case 2 at p=1, delta=1 with measured eps near 1e-2 and 1e-3, beta auto;
    # then case 1 (delta=0.3, p=2.5) and case 3 (delta=0.9, p=2.5); reports
    # must pass at all levels up to 6 on 64 sampled pairs
    rng = np.random.default_rng(106)
    gamma = drift_path(rng, 2, 6, length=1.1)
    msgs = []
    ok = True

    beta_auto = 1.05 * beta_threshold(1.0, 1.0)
    for eps_target in (1e-2, 1e-3):
        amp = eps_target / (2.0 * beta_auto * 1.01)
        params, rep = _theorem_case_run(gamma, 1.0, 1.0, amp, seed=201)
        near = 0.5 * eps_target <= params.epsilon <= 2.0 * eps_target
        ok &= rep.passed and params.beta_ok and near and params.case == 2
        msgs.append(f"case2 eps={params.epsilon:.2e} pass={rep.passed}")

    for p, delta, amp in ((2.5, 0.3, 2e-3), (2.5, 0.9, 1e-3)):
        params, rep = _theorem_case_run(gamma, p, delta, amp, seed=202)
        ok &= rep.passed and params.beta_ok and params.epsilon < 1.0
        msgs.append(f"case{params.case} eps={params.epsilon:.2e} pass={rep.passed}")

    report("criterion 6 (uniform estimate, three cases)", ok, "; ".join(msgs))


def test_c7_beta_thresholds():
    # closed forms reproduced against an independent high-precision route
    import mpmath

    checks = []
    got1 = beta_threshold(2.0, 0.0)
    checks.append(abs(got1 - 6.82842712474619) <= 1e-12 * got1)

    want1 = float(2 / (1 - mpmath.mpf(2) ** mpmath.mpf("-0.5")))
    checks.append(abs(got1 - want1) <= 1e-12 * got1)

    got2 = beta_threshold(2.0, 1.0)
    want2 = float(8 * mpmath.mpf(2) ** mpmath.mpf("0.5")
                  / (1 - mpmath.mpf(2) ** mpmath.mpf("-0.5")))
    checks.append(abs(got2 - want2) <= 1e-12 * got2)

    p, delta, frac = mpmath.mpf("2.5"), mpmath.mpf("0.9"), mpmath.mpf("0.5")
    half = mpmath.mpf("0.5")
    want3 = float(2 * p * (
        2 ** ((2 * p + delta) / p) / (1 - half ** ((delta - 1 + frac) / p))
        + 1 / (1 - half ** ((1 - frac) / p))
    ))
    got3 = beta_threshold(2.5, 0.9)
    checks.append(abs(got3 - want3) <= 1e-12 * got3)

    report("criterion 7 (beta thresholds)", all(checks),
           f"case1={got1!r}, case2={got2!r}, case3={got3!r} all within 1e-12")


def test_c8_cde_application():
    # rotation fixture: truncated series at depth 12 within 1e-9 of the exact
    # flow; perturbation sweep bounded by the flow-difference estimate with
    # log-normalized ratios varying by less than 4x
    driver = PiecewiseLinearPath([0.0, 0.3, 0.7, 1.0], [[0.0], [0.45], [0.55], [1.0]])
    problem = LinearCdeProblem(np.array([[[0.0, -1.0], [1.0, 0.0]]]), [1.0, 0.0], driver)

    worst_series = max(
        float(np.linalg.norm(solve_series(problem, t, 12) - solve_exact(problem, t)))
        for t in np.linspace(0.0, 1.0, 9)
    )

    beta = 1.05 * beta_threshold(1.0, 1.0)
    tgrid = np.linspace(0.0, 1.0, 257)
    xs = solve_exact_trajectory(problem, tgrid)
    ratios = []
    bounded = True
    for amp in (1e-1, 1e-2, 1e-3, 1e-4):
        drv2 = sinusoid_perturbation(driver, amp, cycles=3)
        prob2 = LinearCdeProblem(problem.coefficients, problem.x0, drv2)
        ctrl = shared_calibrated_control(driver, drv2, p=1.0, beta=beta)
        w01 = float(ctrl(0.0, 1.0))
        ys = solve_exact_trajectory(prob2, tgrid)
        sup = float(np.max(np.linalg.norm(xs - ys, axis=1)))
        bounded &= sup <= flow_difference_bound(problem, amp, w01, beta, w01)
        ratios.append(sup / (amp * (1.0 + math.log2(w01 / amp))))
    spread = max(ratios) / min(ratios)
    ok = worst_series <= 1e-9 and bounded and spread < 4.0
    report("criterion 8 (linear CDE application)", ok,
           f"series err {worst_series:.2e} <= 1e-9; sweep bounded={bounded}; "
           f"ratio spread {spread:.2f} < 4")


def test_c9_cli_determinism(tmp_path):
    # two runs of `all` with the same seed produce byte-identical reports
    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "roughsig.cli", "all",
             "--seed", "4242", "--out", str(out)],
            capture_output=True, text=True, timeout=300,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    identical = all(
        (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
        for name in ("report.csv", "summary.json")
    )
    report("criterion 9 (CLI determinism)", identical,
           "two `all` runs: report.csv and summary.json byte-identical")
