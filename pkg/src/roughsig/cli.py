"""Reproducible experiment driver.

Subcommands: signature, extend, partition, neoclassical, verify-theorem,
cde-compare, all.  Each run resolves its configuration (built-in defaults,
then --config file, then flags), writes resolved_config.json plus its
reports into the output directory, and exits 0 iff every check passed.

Exit codes: 0 all checks pass, 1 some check failed, 2 config/schema
violation, 3 unreadable input, 4 non-convergent extension.  Errors emit one
machine-parsable JSON line on stderr.

Identical config and inputs produce byte-identical outputs: no timestamps,
fixed row order, shortest-round-trip float formatting.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import bounds, cde, extension
from .bounds import EstimateParams, SCHEMA_VERSION
from .partition import total_dyadic_partition, balance_residuals, max_subinterval_control
from .path import (
    PiecewiseLinearPath,
    SignatureFunctional,
    arc_length_control,
    calibrated_control,
    shared_calibrated_control,
    signature,
    sinusoid_perturbation,
)
from .quadrature import iterated_riemann_levels
from .tensor import truncated_product

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_EXTENSION = 4


class CliConfigError(ValueError):
    pass


class CliInputError(ValueError):
    pass


def _fixture(name: str) -> str:
    return str(resources.files("roughsig.data").joinpath(name))


DEFAULTS = {
    "signature": {
        "input": None,  # None -> bundled two-segment path
        "s": 0.0,
        "t": 1.0,
        "depth": 2,
        "seed": 20240,
        "out": "out/signature",
    },
    "extend": {
        "input": None,  # None -> bundled zigzag path
        "p": 1.0,
        "beta": 2.5,
        "depth": 1,      # data depth to lift from
        "levels": 4,     # target depth
        "tol": 1e-9,
        "max_order": 18,
        "oracle_tol": 1e-7,
        "seed": 20240,
        "out": "out/extend",
    },
    "partition": {
        "input": None,
        "order": 6,
        "tol": 1e-12,
        "seed": 20240,
        "out": "out/partition",
    },
    "neoclassical": {
        "p_values": [1.0, 1.1, 1.5, 2.0, 2.5, 3.7],
        "grid_lo": 0.01,
        "grid_hi": 10.0,
        "grid_points": 7,
        "n_max": 12,
        "tol": 1e-10,
        "seed": 20240,
        "out": "out/neoclassical",
    },
    "verify-theorem": {
        "input": None,
        "input_b": None,  # None -> sinusoid perturbation of input
        "amplitude": 3e-4,
        "cycles": 3,
        "p": 1.0,
        "delta": 1.0,
        "beta": "auto",
        "levels": 6,
        "pairs": 64,
        "seed": 20240,
        "out": "out/verify-theorem",
    },
    "cde-compare": {
        "problem": None,  # None -> bundled rotation problem
        "amplitudes": [1e-1, 1e-2, 1e-3, 1e-4],
        "cycles": 3,
        "beta": "auto",
        "series_depth": 12,
        "t_grid": 257,
        "pairs": 32,
        "seed": 20240,
        "out": "out/cde-compare",
    },
    "all": {
        "seed": 20240,
        "chen_instances": 60,
        "quadrature_paths": 6,
        "quadrature_grid": 2048,
        "extend_levels": 4,
        "extend_tol": 1e-8,
        "lemma_pairs": 2,
        "lemma_max_order": 6,
        "verify_pairs": 24,
        "verify_levels": 5,
        "out": "out/all",
    },
}

_FLAG_KEYS = {
    "seed": "seed",
    "out": "out",
    "depth": "depth",
    "levels": "levels",
    "p": "p",
    "delta": "delta",
    "beta": "beta",
    "pairs": "pairs",
    "tol": "tol",
    "input": "input",
    "input_b": "input_b",
}


def _resolve_config(command: str, args) -> dict:
    cfg = dict(DEFAULTS[command])
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except FileNotFoundError as exc:
            raise CliInputError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise CliConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise CliConfigError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise CliConfigError(
                f"unknown config keys for '{command}': {sorted(unknown)}"
            )
        cfg.update(file_cfg)
    for flag, key in _FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None and key in cfg:
            cfg[key] = value
    if command == "partition" and args.depth is not None:
        cfg["order"] = args.depth  # the partition's depth knob is its order
    _validate_config(command, cfg)
    return cfg


def _validate_config(command: str, cfg: dict):
    def positive(key):
        if not (isinstance(cfg[key], (int, float)) and cfg[key] > 0):
            raise CliConfigError(f"'{key}' must be a positive number, got {cfg[key]!r}")

    if "seed" in cfg and not isinstance(cfg["seed"], int):
        raise CliConfigError(f"'seed' must be an integer, got {cfg['seed']!r}")
    for key in ("depth", "levels", "order", "pairs", "n_max", "max_order",
                "series_depth", "t_grid", "cycles", "grid_points"):
        if key in cfg and not (isinstance(cfg[key], int) and cfg[key] >= 0):
            raise CliConfigError(f"'{key}' must be a non-negative integer, got {cfg[key]!r}")
    for key in ("tol", "amplitude", "oracle_tol"):
        if key in cfg:
            positive(key)
    if "p" in cfg and (not isinstance(cfg["p"], (int, float)) or cfg["p"] < 1):
        raise CliConfigError(f"'p' must be a number >= 1, got {cfg['p']!r}")
    if "delta" in cfg and not (isinstance(cfg["delta"], (int, float)) and 0 <= cfg["delta"] <= 1):
        raise CliConfigError(f"'delta' must lie in [0, 1], got {cfg['delta']!r}")
    if "beta" in cfg:
        b = cfg["beta"]
        if not (b == "auto" or (isinstance(b, (int, float)) and b > 0)):
            raise CliConfigError(f"'beta' must be a positive number or 'auto', got {b!r}")


def _config_hash(cfg: dict) -> str:
    # The output directory is where results land, not what they are: exclude
    # it so runs into different directories stay byte-identical.
    semantic = {k: v for k, v in cfg.items() if k != "out"}
    canon = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _load_path(spec, fallback: str) -> PiecewiseLinearPath:
    name = spec if spec is not None else _fixture(fallback)
    try:
        if str(name).endswith(".csv"):
            return PiecewiseLinearPath.from_csv(name)
        return PiecewiseLinearPath.from_json(name)
    except FileNotFoundError as exc:
        raise CliInputError(f"path file not found: {name}") from exc
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CliInputError(f"could not parse path file {name}: {exc}") from exc


def _resolve_beta(beta, p: float, delta: float) -> tuple:
    """'auto' means 1.05 x the case threshold, so preconditions hold by margin."""
    if beta == "auto":
        return 1.05 * bounds.beta_threshold(p, delta), "auto"
    return float(beta), "explicit"


def _write_json(path: Path, doc: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_rows_csv(path: Path, meta: dict, header: list, rows: list):
    buf = io.StringIO()
    buf.write(f"# schema: {SCHEMA_VERSION}\n")
    for key in sorted(meta):
        buf.write(f"# {key}: {meta[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _fmt(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def _finish(out_dir: Path, cfg: dict, command: str, summary: dict, passed: bool) -> int:
    summary = dict(summary)
    summary.update(
        schema=SCHEMA_VERSION,
        command=command,
        config_hash=_config_hash(cfg),
        seed=cfg.get("seed"),
        passed=bool(passed),
    )
    _write_json(out_dir / "summary.json", summary)
    print(f"[{command}] {'PASS' if passed else 'FAIL'} -> {out_dir}")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _prepare_out(cfg: dict) -> Path:
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "resolved_config.json", cfg)
    return out_dir


# -- subcommands --------------------------------------------------------


def _cmd_signature(cfg: dict) -> int:
    out_dir = _prepare_out(cfg)
    path = _load_path(cfg["input"], "two_segment.csv")
    sig = signature(path, cfg["s"], cfg["t"], cfg["depth"])
    record = sig.to_record()
    doc = {
        "schema": SCHEMA_VERSION,
        "config_hash": _config_hash(cfg),
        "seed": cfg["seed"],
        "input": cfg["input"] or "bundled:two_segment.csv",
        "interval": [cfg["s"], cfg["t"]],
        "tensor": record,
    }
    _write_json(out_dir / "signature.json", doc)
    print(json.dumps(record))
    return _finish(out_dir, cfg, "signature", {"levels": cfg["depth"]}, True)


def _cmd_extend(cfg: dict) -> int:
    out_dir = _prepare_out(cfg)
    path = _load_path(cfg["input"], "zigzag.json")
    p, beta = float(cfg["p"]), float(cfg["beta"])
    ctrl = calibrated_control(path, p, beta, seed=cfg["seed"])
    base = SignatureFunctional(path, p, beta, ctrl, depth=cfg["depth"])
    ext_cfg = extension.ExtensionConfig(
        convergence_tol=cfg["tol"],
        max_order=cfg["max_order"],
        target_depth=cfg["levels"],
    )
    lifted, logs = extension.lyons_extend_verbose(base, 0.0, 1.0, ext_cfg)
    direct = signature(path, 0.0, 1.0, cfg["levels"])

    w01 = float(ctrl(0.0, 1.0))
    rows = []
    all_ok = True
    for m in sorted(logs):
        log = logs[m]
        err = float(np.max(np.abs(lifted.level(m) - direct.level(m))))
        incs = np.asarray(log.increment_norms)
        live = incs[incs > 1e3 * np.finfo(float).eps]
        rate = float((live[-1] / live[0]) ** (1.0 / (live.size - 1))) if live.size > 1 else 0.0
        rate_bound = 0.5 ** (m / p - 1.0) * 1.05
        envelope = [
            2.0 * p * w01 ** (m / p)
            / (beta**2 * bounds.frac_factorial(m / p))
            * 0.5 ** (K * (m / p - 1.0))
            for K in range(incs.size)
        ]
        env_ok = bool(np.all(incs <= np.asarray(envelope) * (1.0 + 1e-12)))
        ok = err <= cfg["oracle_tol"] and rate <= rate_bound and env_ok
        all_ok &= ok
        rows.append([m, err, log.stop_order, rate, rate_bound, env_ok, ok])
    meta = {"config_hash": _config_hash(cfg), "seed": cfg["seed"], "omega_total": w01}
    _write_rows_csv(out_dir / "report.csv", meta,
                    ["level", "oracle_err", "stop_order", "fitted_rate",
                     "rate_bound", "envelope_ok", "pass"], rows)
    return _finish(out_dir, cfg, "extend",
                   {"levels": cfg["levels"], "omega_total": w01}, all_ok)


def _cmd_partition(cfg: dict) -> int:
    out_dir = _prepare_out(cfg)
    path = _load_path(cfg["input"], "zigzag.json")
    ctrl = arc_length_control(path)
    part = total_dyadic_partition(ctrl, 0.0, 1.0, cfg["order"], cfg["tol"])
    residuals = balance_residuals(part, ctrl)
    worst = float(residuals.max()) if residuals.size else 0.0
    halving = max_subinterval_control(part, ctrl) / float(ctrl(0.0, 1.0))
    ok = worst <= 10 * cfg["tol"] and halving <= (1.0 + 10 * cfg["tol"]) / 2 ** cfg["order"]
    doc = part.to_json_dict()
    doc["config_hash"] = _config_hash(cfg)
    doc["seed"] = cfg["seed"]
    _write_json(out_dir / "partition.json", doc)
    summary = {
        "order": cfg["order"],
        "worst_balance_residual": worst,
        "max_subinterval_fraction": halving,
    }
    return _finish(out_dir, cfg, "partition", summary, ok)


def _neoclassical_rows(p_values, xs, n_max, tol):
    rows = []
    all_ok = True
    for p in p_values:
        for x in xs:
            for y in xs:
                for n in range(n_max + 1):
                    lhs, rhs = bounds.neoclassical_sides(p, x, y, n)
                    ok = lhs <= rhs * (1.0 + tol)
                    if p == 1.0:
                        ok = ok and abs(lhs - rhs) <= tol * rhs
                    all_ok &= ok
                    rows.append([p, x, y, n, lhs, rhs, ok])
    return rows, all_ok


def _cmd_neoclassical(cfg: dict) -> int:
    out_dir = _prepare_out(cfg)
    xs = np.geomspace(cfg["grid_lo"], cfg["grid_hi"], cfg["grid_points"])
    rows, all_ok = _neoclassical_rows(cfg["p_values"], xs, cfg["n_max"], cfg["tol"])
    meta = {"config_hash": _config_hash(cfg), "seed": cfg["seed"]}
    _write_rows_csv(out_dir / "report.csv", meta,
                    ["p", "x", "y", "n", "lhs", "rhs", "pass"], rows)
    return _finish(out_dir, cfg, "neoclassical", {"rows": len(rows)}, all_ok)


def _cmd_verify_theorem(cfg: dict) -> int:
    out_dir = _prepare_out(cfg)
    gamma = _load_path(cfg["input"], "zigzag.json")
    if cfg["input_b"] is not None:
        gamma_b = _load_path(cfg["input_b"], "zigzag.json")
    else:
        gamma_b = sinusoid_perturbation(gamma, cfg["amplitude"], cycles=cfg["cycles"])
    p, delta = float(cfg["p"]), float(cfg["delta"])
    beta, beta_mode = _resolve_beta(cfg["beta"], p, delta)
    ctrl = shared_calibrated_control(gamma, gamma_b, p, beta, seed=cfg["seed"])
    X = SignatureFunctional(gamma, p, beta, ctrl)
    Y = SignatureFunctional(gamma_b, p, beta, ctrl)
    eps = bounds.measure_epsilon(X, Y, delta, seed=cfg["seed"])
    if eps == 0.0:
        eps = 1e-300  # identical inputs: any positive epsilon witnesses the rows
    params = EstimateParams(p=p, delta=delta, epsilon=eps, beta=beta,
                            omega_total=float(ctrl(0.0, 1.0)))
    report = bounds.verify_uniform_estimate(
        X, Y, params, levels_up_to=cfg["levels"], sample_pairs=cfg["pairs"],
        seed=cfg["seed"],
    )
    report.meta["config_hash"] = _config_hash(cfg)
    report.meta["beta_mode"] = beta_mode
    report.to_csv(out_dir / "report.csv")
    summary = report.to_json_dict()
    ok = report.passed and params.beta_ok
    return _finish(out_dir, cfg, "verify-theorem", summary, ok)


def _load_problem(cfg) -> cde.LinearCdeProblem:
    name = cfg["problem"] if cfg["problem"] is not None else _fixture("rotation_cde.json")
    try:
        return cde.LinearCdeProblem.from_json(name)
    except FileNotFoundError as exc:
        raise CliInputError(f"problem file not found: {name}") from exc
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CliInputError(f"could not parse problem file {name}: {exc}") from exc


def _cde_rows(problem, amplitudes, cycles, beta, t_grid, pairs, seed):
    driver = problem.driver
    tgrid = np.linspace(0.0, 1.0, t_grid)
    xs = cde.solve_exact_trajectory(problem, tgrid)
    st_pairs = bounds.simplex_pairs(pairs, seed)
    idx = np.searchsorted(tgrid, st_pairs)  # nearest grid rows for (s, t)
    rows = []
    all_ok = True
    for amp in amplitudes:
        drv2 = sinusoid_perturbation(driver, amp, cycles=cycles)
        prob2 = cde.LinearCdeProblem(problem.coefficients, problem.x0, drv2)
        ctrl = shared_calibrated_control(driver, drv2, p=1.0, beta=beta, seed=seed)
        w01 = float(ctrl(0.0, 1.0))
        ys = cde.solve_exact_trajectory(prob2, tgrid)
        diff = np.linalg.norm(xs - ys, axis=1)
        sup = float(diff.max())
        incs = xs[idx[:, 1]] - xs[idx[:, 0]] - (ys[idx[:, 1]] - ys[idx[:, 0]])
        sup_increment = float(np.max(np.linalg.norm(incs, axis=1)))
        bound = cde.flow_difference_bound(problem, amp, w01, beta, w01)
        ratio = sup / (amp * (1.0 + math.log2(w01 / amp)))
        ok = sup <= bound and sup_increment <= 2.0 * bound
        all_ok &= ok
        rows.append([amp, sup, sup_increment, bound, ratio, w01, ok])
    return rows, all_ok


def _cmd_cde_compare(cfg: dict) -> int:
    out_dir = _prepare_out(cfg)
    problem = _load_problem(cfg)
    beta, beta_mode = _resolve_beta(cfg["beta"], 1.0, 1.0)
    series_err = float(np.linalg.norm(
        cde.solve_series(problem, 1.0, cfg["series_depth"])
        - cde.solve_exact(problem, 1.0)
    ))
    tail = cde.series_tail_bound(problem, cfg["series_depth"])
    rows, sweep_ok = _cde_rows(problem, cfg["amplitudes"], cfg["cycles"], beta,
                               cfg["t_grid"], cfg["pairs"], cfg["seed"])
    ratios = [r[4] for r in rows]
    spread = max(ratios) / min(ratios) if min(ratios) > 0 else math.inf
    ok = sweep_ok and series_err <= max(tail, 1e-12) and spread < 4.0
    meta = {"config_hash": _config_hash(cfg), "seed": cfg["seed"],
            "beta": beta, "beta_mode": beta_mode}
    _write_rows_csv(out_dir / "report.csv", meta,
                    ["amplitude", "sup_flow_diff", "sup_increment_diff",
                     "bound", "log_normalized_ratio", "omega_total", "pass"], rows)
    summary = {
        "series_depth": cfg["series_depth"],
        "series_vs_exact": series_err,
        "series_tail_bound": tail,
        "ratio_spread": spread,
        "operator_norm": problem.operator_norm,
    }
    return _finish(out_dir, cfg, "cde-compare", summary, ok)


# -- the full self-audit -------------------------------------------------


def _random_drift_path(rng, d: int, n_seg: int, length: float = 1.5,
                       wobble: float = 0.45) -> PiecewiseLinearPath:
    drift = rng.standard_normal(d)
    drift /= np.linalg.norm(drift)
    incs = drift[None, :] + wobble * rng.standard_normal((n_seg, d))
    incs *= length / np.linalg.norm(incs, axis=1).sum()
    # knots near the uniform grid keep parametrization speed bounded, so the
    # quadrature grid resolves every segment
    inner = (np.arange(1, n_seg) + 0.4 * rng.uniform(-1, 1, n_seg - 1)) / n_seg
    times = np.concatenate([[0.0], inner, [1.0]])
    pts = np.vstack([np.zeros(d), np.cumsum(incs, axis=0)])
    return PiecewiseLinearPath(times, pts)


def _cmd_all(cfg: dict) -> int:
    out_dir = _prepare_out(cfg)
    seed = cfg["seed"]
    rng = np.random.default_rng(seed)
    checks = []

    def record(name, metric, value, threshold, ok):
        checks.append([name, metric, value, threshold, bool(ok)])

    # multiplicativity spot check
    worst = 0.0
    for _ in range(cfg["chen_instances"]):
        d = int(rng.integers(1, 4))
        path = _random_drift_path(rng, d, int(rng.integers(2, 21)))
        depth = int(rng.integers(1, 7))
        s, u, t = np.sort(rng.random(3))
        lhs = truncated_product(signature(path, s, u, depth), signature(path, u, t, depth))
        rhs = signature(path, s, t, depth)
        worst = max(worst, max(float(np.max(np.abs(a - b)))
                               for a, b in zip(lhs.levels, rhs.levels)))
    record("chen", "max_coeff_err", worst, 1e-10, worst < 1e-10)

    # quadrature spot check
    worst = 0.0
    for _ in range(cfg["quadrature_paths"]):
        path = _random_drift_path(rng, int(rng.integers(1, 4)), int(rng.integers(2, 15)))
        sig = signature(path, 0.0, 1.0, 4)
        grid = iterated_riemann_levels(path, 4, cfg["quadrature_grid"])
        for n in range(1, 5):
            ref = float(np.linalg.norm(sig.level(n)))
            worst = max(worst, float(np.linalg.norm(grid[n] - sig.level(n))) / ref)
    record("quadrature", "max_rel_err", worst, 1e-3, worst < 1e-3)

    # neoclassical inequality sweep
    xs = np.geomspace(0.01, 10.0, 7)
    _, neo_ok = _neoclassical_rows([1.0, 1.1, 1.5, 2.0, 2.5, 3.7], xs, 12, 1e-10)
    record("neoclassical", "sweep_ok", int(neo_ok), 1, neo_ok)

    # extension oracle (trimmed depth)
    path = _load_path(None, "zigzag.json")
    beta = 2.5
    ctrl = calibrated_control(path, 1.0, beta, seed=seed)
    base = SignatureFunctional(path, 1.0, beta, ctrl, depth=1)
    ext_cfg = extension.ExtensionConfig(
        convergence_tol=1e-9, max_order=18, target_depth=cfg["extend_levels"]
    )
    lifted, logs = extension.lyons_extend_verbose(base, 0.0, 1.0, ext_cfg)
    direct = signature(path, 0.0, 1.0, cfg["extend_levels"])
    worst = max(
        float(np.max(np.abs(lifted.level(m) - direct.level(m)))) for m in logs
    )
    record("extension_oracle", "max_level_err", worst, cfg["extend_tol"],
           worst <= cfg["extend_tol"])
    rate_ok = True
    for m, log in logs.items():
        incs = np.asarray(log.increment_norms)
        live = incs[incs > 1e3 * np.finfo(float).eps]
        if live.size > 1:
            rate = (live[-1] / live[0]) ** (1.0 / (live.size - 1))
            rate_ok &= rate <= 0.5 ** (m - 1.0) * 1.05
    record("extension_rate", "fitted_rates_ok", int(rate_ok), 1, rate_ok)

    # refinement-increment bound audit
    lemma_ok = True
    worst_margin = math.inf
    for _ in range(cfg["lemma_pairs"]):
        g = _random_drift_path(rng, 2, int(rng.integers(4, 9)), length=1.2)
        gt = sinusoid_perturbation(g, 2e-3, cycles=int(rng.integers(2, 5)))
        sh = shared_calibrated_control(g, gt, p=1.0, beta=beta, seed=seed)
        X = SignatureFunctional(g, 1.0, beta, sh, depth=1)
        Y = SignatureFunctional(gt, 1.0, beta, sh, depth=1)
        eps = bounds.measure_epsilon(
            X.with_depth(None), Y.with_depth(None), delta=1.0, seed=seed
        )
        params = EstimateParams(1.0, 1.0, eps, beta, float(sh(0.0, 1.0)))
        norms = extension.difference_hat_top_norms(
            X, Y, sh, 0.0, 1.0, 1, cfg["lemma_max_order"] + 1
        )
        incs = np.diff(norms)
        lims = np.array([
            bounds.main_lemma_increment_bound(params, float(sh(0.0, 1.0)), 1, K)
            for K in range(cfg["lemma_max_order"] + 1)
        ])
        lemma_ok &= bool(np.all(incs <= lims))
        worst_margin = min(worst_margin, float(np.min(lims - incs)))
    record("lemma_audit", "min_margin", worst_margin, 0.0, lemma_ok)

    # three-case theorem verification
    g = _random_drift_path(rng, 2, 6, length=1.1)
    for p, delta, amp in [(1.0, 1.0, None), (2.5, 0.3, 2e-3), (2.5, 0.9, 1e-3)]:
        b = 1.05 * bounds.beta_threshold(p, delta)
        amp = amp if amp is not None else 1e-2 / (2.0 * b)
        gt = sinusoid_perturbation(g, amp, cycles=3)
        sh = shared_calibrated_control(g, gt, p=p, beta=b, seed=seed)
        X = SignatureFunctional(g, p, b, sh)
        Y = SignatureFunctional(gt, p, b, sh)
        eps = bounds.measure_epsilon(X, Y, delta, seed=seed)
        params = EstimateParams(p, delta, eps, b, float(sh(0.0, 1.0)))
        rep = bounds.verify_uniform_estimate(
            X, Y, params, levels_up_to=cfg["verify_levels"],
            sample_pairs=cfg["verify_pairs"], seed=seed,
        )
        name = f"theorem_case{params.case}"
        worst = min(r.slack for r in rep.rows)
        record(name, "worst_slack", worst, 0.0, rep.passed and params.beta_ok)

    # linear CDE application
    problem = _load_problem({"problem": None})
    b, _ = _resolve_beta("auto", 1.0, 1.0)
    series_err = float(np.linalg.norm(
        cde.solve_series(problem, 1.0, 12) - cde.solve_exact(problem, 1.0)
    ))
    record("cde_series", "err_at_depth_12", series_err, 1e-9, series_err <= 1e-9)
    rows, sweep_ok = _cde_rows(problem, [1e-1, 1e-2, 1e-3, 1e-4], 3, b, 129, 16, seed)
    ratios = [r[4] for r in rows]
    spread = max(ratios) / min(ratios)
    record("cde_sweep", "ratio_spread", spread, 4.0, sweep_ok and spread < 4.0)

    passed = all(c[4] for c in checks)
    meta = {"config_hash": _config_hash(cfg), "seed": seed}
    _write_rows_csv(out_dir / "report.csv", meta,
                    ["check", "metric", "value", "threshold", "pass"], checks)
    summary = {"checks": len(checks), "failed": [c[0] for c in checks if not c[4]]}
    return _finish(out_dir, cfg, "all", summary, passed)


_COMMANDS = {
    "signature": _cmd_signature,
    "extend": _cmd_extend,
    "partition": _cmd_partition,
    "neoclassical": _cmd_neoclassical,
    "verify-theorem": _cmd_verify_theorem,
    "cde-compare": _cmd_cde_compare,
    "all": _cmd_all,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roughsig",
        description="Signature, partition, extension and estimate experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", type=str, default=None,
                         help="JSON config file; flags override its values")
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--out", type=str, default=None)
        cmd.add_argument("--depth", type=int, default=None)
        cmd.add_argument("--levels", type=int, default=None)
        cmd.add_argument("--p", type=float, default=None)
        cmd.add_argument("--delta", type=float, default=None)
        cmd.add_argument("--beta", type=_beta_arg, default=None)
        cmd.add_argument("--pairs", type=int, default=None)
        cmd.add_argument("--tol", type=float, default=None)
        cmd.add_argument("--input", type=str, default=None)
        cmd.add_argument("--input-b", dest="input_b", type=str, default=None)
    return parser


def _beta_arg(text: str):
    if text == "auto":
        return "auto"
    return float(text)


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args.command, args)
        return _COMMANDS[args.command](cfg)
    except CliConfigError as exc:
        _emit_error("config", EXIT_CONFIG, exc)
        return EXIT_CONFIG
    except CliInputError as exc:
        _emit_error("input", EXIT_INPUT, exc)
        return EXIT_INPUT
    except extension.ExtensionError as exc:
        _emit_error("extension", EXIT_EXTENSION, exc)
        return EXIT_EXTENSION
    except (OSError, ValueError, KeyError) as exc:
        _emit_error("input", EXIT_INPUT, exc)
        return EXIT_INPUT


def _emit_error(kind: str, code: int, exc: Exception):
    print(json.dumps({"error": kind, "exit": code, "detail": str(exc)}),
          file=sys.stderr)


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
