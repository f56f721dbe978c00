"""Experiment runner: wires models, exact laws, estimators and mixing curves
into reproducible studies with CSV and JSON outputs."""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import estimate as est
from . import kernels, mixing, presets
from .config import ScenarioConfig
from .errors import ConfigValidationError
from .measures import DiscreteMeasure


@dataclass
class RunReport:
    """Pass/fail records plus the environment fingerprint of one run."""

    records: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)

    def add(self, check_id: str, statistic: float, threshold: float,
            passed: bool) -> None:
        self.records.append({
            "check_id": check_id,
            "statistic": float(statistic),
            "threshold": float(threshold),
            "passed": bool(passed),
        })

    @property
    def all_passed(self) -> bool:
        return all(r["passed"] for r in self.records)

    def to_json(self) -> str:
        payload = {
            "environment": self.environment,
            "records": self.records,
            "all_passed": self.all_passed,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _fit_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs, dtype=float)),
                            np.log(np.asarray(ys, dtype=float)), 1)[0])


def _write_csv(path, header, rows) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def build_model(cfg: ScenarioConfig):
    model = cfg.model
    preset = model["preset"]
    if preset == "finite-affine":
        return presets.make_finite_affine(model.get("p0"), model.get("p1"))
    if preset == "random-walk":
        kwargs = {}
        for key, arg in (("p", "p_spec"), ("q", "q_spec"), ("r", "r_spec")):
            if key in model:
                kwargs[arg] = model[key]
        for key in ("truncation_N", "z", "m"):
            if key in model:
                kwargs[key] = model[key]
        return presets.make_random_walk(**kwargs)
    if preset == "inar1":
        kwargs = {}
        if "alpha" in model:
            kwargs["alpha_spec"] = model["alpha"]
        if "lambda" in model:
            kwargs["lambda_spec"] = model["lambda"]
        return presets.make_inar1(**kwargs)
    if preset == "tv-ar1":
        return presets.make_tv_ar1(model.get("a", {"poly": [0.5, 0.3]}),
                                   model.get("sigma", 1.0))
    if preset == "tv-arch1-squared":
        return presets.make_tv_arch1_squared(
            model.get("a0", {"poly": [0.4, 0.2]}),
            model.get("a1", {"poly": [0.2, 0.2]}))
    raise ConfigValidationError(f"unknown preset {preset!r}")


def _bounds_cell_finite(family, n):
    m_cert, eps, r_bound = kernels.doeblin_certificate(family)
    pis = kernels.marginal_laws(family, n)
    frozen = kernels.frozen_laws(family, np.arange(n + 1) / n)
    rows = []
    sup_tv = 0.0
    violation = 0.0
    for k in range(n + 1):
        exact = 0.5 * float(np.abs(pis[k] - frozen[k]).sum())
        envelope = kernels.tv_envelope(family, n, k, k / n, m_cert, r_bound)
        rows.append((n, k, exact, envelope))
        sup_tv = max(sup_tv, exact)
        violation = max(violation, exact - envelope)
    return rows, sup_tv, violation


def _bounds_cell_walk(family, drift, n):
    pis = kernels.marginal_laws(family, n)
    frozen = kernels.frozen_laws(family, np.arange(n + 1) / n)
    v_vals = drift.v_values(family.state_count)
    rows = []
    sup_v = 0.0
    for k in range(n + 1):
        exact = float(np.abs(pis[k] - frozen[k]) @ v_vals)
        rows.append((n, k, exact, ""))
        sup_v = max(sup_v, exact)
    return rows, sup_v, 0.0


def run_bounds(cfg: ScenarioConfig, report: RunReport, data_dir, threads: int):
    built = build_model(cfg)
    walk = cfg.preset() == "random-walk"

    def cell(n):
        if walk:
            family, drift, _ = built
            return _bounds_cell_walk(family, drift, n)
        return _bounds_cell_finite(built, n)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        cells = list(pool.map(cell, cfg.n_list))
    rows = [r for c in cells for r in c[0]]
    sups = [c[1] for c in cells]
    _write_csv(os.path.join(data_dir, "bounds.csv"),
               ["n", "k", "exact", "envelope"], rows)
    _write_csv(os.path.join(data_dir, "bounds_summary.csv"),
               ["n", "sup"], list(zip(cfg.n_list, sups)))
    slope = _fit_slope(cfg.n_list, sups)
    report.add("bounds/slope", slope, -0.8, -1.2 <= slope <= -0.8)
    if not walk:
        worst = max(c[2] for c in cells)
        report.add("bounds/envelope-dominates", worst, 1e-12, worst <= 1e-12)


def run_rates(cfg: ScenarioConfig, report: RunReport, data_dir, threads: int):
    family = build_model(cfg)
    n = int(cfg.n_list[-1])
    b_list = [0.2, 0.1, 0.05]
    sup_bias = []
    for b in b_list:
        spec = est.SmoothingSpec(bandwidth=b)
        frozen = kernels.frozen_laws(family, [float(u) for u in cfg.u_grid])
        worst = 0.0
        for t, u in enumerate(cfg.u_grid):
            expected = est.expected_pi_hat(family, n, float(u), spec)
            worst = max(worst, float(np.abs(expected - frozen[t]).max()))
        sup_bias.append(worst)
    _write_csv(os.path.join(data_dir, "rates.csv"), ["b", "sup_bias"],
               list(zip(b_list, sup_bias)))
    slope = _fit_slope(b_list, sup_bias)
    kappa = family.holder_kappa
    report.add("rates/bias-slope", slope, 0.8 * kappa,
               0.8 * kappa <= slope <= 1.2 * kappa)


def _pi_hat_batch(paths, w, state_count):
    """Local occupation laws for every replicate path at once."""
    out = np.empty((paths.shape[0], state_count))
    for x in range(state_count):
        out[:, x] = (paths == x) @ w
    return out


def _pair_hat_batch(paths, w, state_count):
    out = np.zeros((paths.shape[0], state_count, state_count))
    idx = np.nonzero(w)[0]
    for x in range(state_count):
        prev = paths[:, idx - 1] == x
        for y in range(state_count):
            out[:, x, y] = ((paths[:, idx] == y) & prev) @ w[idx]
    return out


def run_clt(cfg: ScenarioConfig, report: RunReport, data_dir, threads: int,
            u: float = 0.5):
    from .simulate import simulate_finite_batch
    family = build_model(cfg)
    n = int(cfg.n_list[-1])
    b = cfg.bandwidth(n)
    spec = est.SmoothingSpec(bandwidth=b)
    s = family.state_count
    w = est.kernel_weights(u, n, spec)
    paths = simulate_finite_batch(family, n, cfg.seed, np.arange(cfg.replicates))
    scale = np.sqrt(n * b)

    pi_hats = _pi_hat_batch(paths, w, s)
    expected = est.expected_pi_hat(family, n, u, spec)
    pivots = scale * (pi_hats - expected)
    emp_cov = np.cov(pivots.T)
    theory = est.sigma1(family, u, spec)
    rows, worst = [], 0.0
    for x in range(s):
        for y in range(s):
            t = theory[x, y]
            e = emp_cov[x, y]
            rel = abs(e - t) / abs(t) if abs(t) >= 0.05 else ""
            rows.append((f"pi[{x},{y}]", e, t, rel))
            if rel != "":
                worst = max(worst, rel)
    report.add("clt/sigma1-relerr", worst, 0.15, worst < 0.15)

    pair_hats = _pair_hat_batch(paths, w, s)
    exp_pair = est.expected_pi2_hat(family, n, u, spec)
    exp_rows = exp_pair.sum(axis=1)
    q_pivot = scale * (pair_hats / pair_hats.sum(axis=2, keepdims=True)
                       - exp_pair[None] / exp_rows[None, :, None])
    theory_q = est.sigma2(family, u, spec)
    worst_q = 0.0
    for x in range(s):
        for y in range(s):
            t = theory_q[x * s + y, x * s + y]
            if abs(t) < 0.05:
                continue
            e = float(np.var(q_pivot[:, x, y], ddof=1))
            rel = abs(e - t) / abs(t)
            rows.append((f"q[{x},{y}]", e, t, rel))
            worst_q = max(worst_q, rel)
    report.add("clt/sigma2-relerr", worst_q, 0.15, worst_q < 0.15)
    _write_csv(os.path.join(data_dir, "clt.csv"),
               ["entry", "empirical", "theory", "relerr"], rows)


def run_mixing(cfg: ScenarioConfig, report: RunReport, data_dir, threads: int):
    family = build_model(cfg)
    n = int(cfg.n_list[-1])
    j_max = int(cfg.j_max)
    values = mixing.beta_exact_curve(family, n, j_max)
    m_cert, eps, r_bound = kernels.doeblin_certificate(family)
    lags = np.arange(1, j_max + 1)
    bound = mixing.beta_bound_doeblin(m_cert, r_bound, family.holder_L,
                                      family.holder_kappa, lags)
    curve = mixing.MixingCurve(lags=lags, values=values, bound_values=bound,
                               n=n, model_label=family.label)
    curve.to_csv(os.path.join(data_dir, "mixing.csv"))
    worst = float((values - bound).max())
    report.add("mixing/bound-dominates", worst, 0.0, worst <= 1e-12)
    keep = values > 1e-13
    rate = float(np.exp(np.polyfit(lags[keep], np.log(values[keep]), 1)[0]))
    target = r_bound ** (1.0 / m_cert) + 0.05
    report.add("mixing/decay-rate", rate, target, rate <= target)


def run_certify(cfg: ScenarioConfig, report: RunReport, data_dir, threads: int):
    family, drift, _ = build_model(cfg)
    gamma, delta = kernels.mouli_certificate(family, drift, seed=cfg.seed)
    rows = [("gamma", gamma), ("delta", delta), ("m", drift.m),
            ("lambda", drift.lambda_), ("b", drift.b), ("K", drift.K_const),
            ("eta", drift.eta), ("R", drift.R),
            ("epsilon_window", drift.epsilon_window)]
    _write_csv(os.path.join(data_dir, "certify.csv"), ["constant", "value"], rows)
    report.add("certify/gamma", gamma, 1.0, gamma < 1.0)


EXPERIMENT_RUNNERS = {
    "bounds": run_bounds,
    "rates": run_rates,
    "clt": run_clt,
    "mixing": run_mixing,
    "certify": run_certify,
}


def run(cfg: ScenarioConfig, threads: int = 1) -> RunReport:
    """Execute the configured experiment; writes data/*.csv and report.json.

    The JSON report is a deterministic function of the config; wall-clock
    timings go to a separate timings.csv that is excluded from the
    determinism contract.
    """
    out_dir = cfg.output_dir
    data_dir = os.path.join(out_dir, "data")
    os.makedirs(data_dir, exist_ok=True)
    report = RunReport(environment={
        "seed": int(cfg.seed),
        "experiment": cfg.experiment,
        "preset": cfg.preset(),
        "n_list": [int(n) for n in cfg.n_list],
        "replicates": int(cfg.replicates),
        "bandwidth_rule": list(cfg.bandwidth_rule),
        "u_grid_size": len(cfg.u_grid),
    })
    start = time.perf_counter()
    EXPERIMENT_RUNNERS[cfg.experiment](cfg, report, data_dir, threads)
    elapsed = time.perf_counter() - start
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    _write_csv(os.path.join(out_dir, "timings.csv"),
               ["experiment", "seconds"], [(cfg.experiment, f"{elapsed:.3f}")])
    if cfg.figures:
        from . import figures
        figures.render_all(cfg.experiment, data_dir,
                           os.path.join(out_dir, "figures"))
    return report
