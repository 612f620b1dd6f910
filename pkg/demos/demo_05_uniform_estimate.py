#!/usr/bin/env python3
"""Two nearby paths stay close at every signature level: measure the level-1
closeness constant, pick beta from the case threshold, and audit the bound
level by level.

Three regimes, classified by delta against 1 - {p}:
  case 1 (delta below):   rate epsilon at all levels
  case 2 (delta equal):   logarithmic correction
  case 3 (delta above):   rate epsilon^((1-{p})/delta), non-integer p only
"""

from roughsig import (
    EstimateParams,
    SignatureFunctional,
    beta_threshold,
    measure_epsilon,
    shared_calibrated_control,
    sinusoid_perturbation,
    verify_uniform_estimate,
)
from util_demos import zigzag

gamma = zigzag()

for p, delta, amplitude in ((1.0, 1.0, 3e-4), (2.5, 0.3, 2e-3), (2.5, 0.9, 1e-3)):
    beta = 1.05 * beta_threshold(p, delta)
    gamma_t = sinusoid_perturbation(gamma, amplitude, cycles=3)
    ctrl = shared_calibrated_control(gamma, gamma_t, p=p, beta=beta)
    X = SignatureFunctional(gamma, p, beta, ctrl)
    Y = SignatureFunctional(gamma_t, p, beta, ctrl)
    eps = measure_epsilon(X, Y, delta=delta)
    params = EstimateParams(p, delta, eps, beta, float(ctrl(0.0, 1.0)))
    report = verify_uniform_estimate(X, Y, params, levels_up_to=6, sample_pairs=48)

    print(f"== p = {p}, delta = {delta}  (case {params.case}) ==")
    print(f"  sup-distance amplitude {amplitude:g}; measured epsilon {eps:.3e}")
    print(f"  beta = 1.05 x threshold = {beta:.3f}; omega(0,1) = {params.omega_total:.3f}")
    if params.is_p1_extension:
        print("  (p = 1 run: case-2 formulas with {p} = 0)")
    print(f"  {'level':>5} {'worst slack':>13}")
    for k, slack in report.worst_slack_by_level().items():
        print(f"  {k:>5} {slack:13.3e}")
    print(f"  all {len(report.rows)} rows pass: {report.passed}")
    print()

print("the bounds hold with room to spare: the proof's constants are")
print("generous, and beta sits 5% above its strict threshold.")
