"""Exact and Monte-Carlo mixing coefficients for the triangular arrays."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .kernels import (DriftSpec, FiniteKernelFamily, KernelFamily,
                      marginal_laws, stationary_distribution)


@dataclass(frozen=True)
class MixingCurve:
    """Per-lag mixing values together with their theoretical bound curve."""

    lags: np.ndarray
    values: np.ndarray
    bound_values: Optional[np.ndarray]
    n: int
    model_label: str
    kind: str = "beta"
    se: Optional[np.ndarray] = None

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=int)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)
        if self.kind == "beta" and (values.min() < -1e-12 or values.max() > 1 + 1e-12):
            raise ValueError("beta values must lie in [0, 1]")
        if values.min() < -1e-12:
            raise ValueError("mixing values must be nonnegative")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["j", "value", "bound", "se"])
            for t, j in enumerate(self.lags):
                bound = ("" if self.bound_values is None
                         else repr(float(self.bound_values[t])))
                se = "" if self.se is None else repr(float(self.se[t]))
                writer.writerow([int(j), repr(float(self.values[t])), bound, se])


def _beta_values(family, n, j_max, weight_fn):
    """max_i sum_x pi^(n)_i(x) * weight(row x of P_{i->i+j}, pi^(n)_{i+j}), per j.

    The sup over starting indices i runs over {-j_max..n-1}; i <= -j covers
    the homogeneous pre-history (one representative suffices since that
    segment is stationary), and i + j is capped at n.
    """
    pis = marginal_laws(family, n)
    pi0 = pis[0]

    def pi_at(k):
        return pi0 if k <= 0 else pis[k]

    out = np.zeros(j_max)
    for i in range(-j_max, n):
        prod = None
        for j in range(1, j_max + 1):
            k = i + j
            if k > n:
                break
            step = family.matrix(max(k / n, 0.0))
            prod = step if prod is None else prod @ step
            val = weight_fn(pi_at(i), prod, pi_at(k))
            if val > out[j - 1]:
                out[j - 1] = val
    return out


def beta_exact_curve(family: FiniteKernelFamily, n: int, j_max: int) -> np.ndarray:
    """Exact beta mixing coefficients beta_n(j) for j = 1..j_max.

    beta_n(j) is the expected total-variation gap between the conditional
    law of X_{n,i+j} given X_{n,i} and its marginal, maximized over i.
    """
    def tv_weight(pi_i, prod, pi_k):
        tv_rows = 0.5 * np.abs(prod - pi_k[None, :]).sum(axis=1)
        return float(pi_i @ tv_rows)

    return _beta_values(family, n, j_max, tv_weight)


def beta_exact(family: FiniteKernelFamily, n: int, j: int) -> float:
    if j < 1:
        raise ValueError("need lag j >= 1")
    return float(beta_exact_curve(family, n, j)[j - 1])


def beta_bound_doeblin(m: int, r_bound: float, holder_L: float,
                       holder_kappa: float, j) -> np.ndarray:
    """Geometric envelope C rho^floor(j/m) from the Doeblin constants.

    rho = 2 m L eps^kappa + r with eps chosen so the first term equals
    (1 - r)/2, and C = rho^(-1/eps - 1).
    """
    j = np.asarray(j, dtype=int)
    if holder_L > 0:
        eps = ((1.0 - r_bound) / (4.0 * m * holder_L)) ** (1.0 / holder_kappa)
        eps = min(eps, 1.0)
    else:
        eps = 1.0
    rho = 2.0 * m * holder_L * eps ** holder_kappa + r_bound
    c = rho ** (-1.0 / eps - 1.0)
    return c * rho ** (j // m)


def beta_v_exact_curve(family: KernelFamily, drift: DriftSpec, n: int,
                       j_max: int) -> np.ndarray:
    """V-weighted analogue of the beta coefficients, exact on the truncation."""
    v_vals = drift.v_values(family.state_count)

    def v_weight(pi_i, prod, pi_k):
        gaps = np.abs(prod - pi_k[None, :]) @ v_vals
        return float(pi_i @ gaps)

    return _beta_values(family, n, j_max, v_weight)


def beta_v_exact(family: KernelFamily, drift: DriftSpec, n: int, j: int) -> float:
    if j < 1:
        raise ValueError("need lag j >= 1")
    return float(beta_v_exact_curve(family, drift, n, j)[j - 1])


def beta_v_bound(family: KernelFamily, drift: DriftSpec, gamma: float,
                 delta: float, n: int, j) -> np.ndarray:
    """Certified envelope 2 delta^-1 sup_k pi^(n)_k V * K^s gamma^g, j = m g + s."""
    j = np.asarray(j, dtype=int)
    v_vals = drift.v_values(family.state_count)
    sup_piv = float((marginal_laws(family, n) @ v_vals).max())
    g, s = j // drift.m, j % drift.m
    return 2.0 / delta * sup_piv * drift.K_const ** s * gamma ** g


def tau_upper_mc(evolve_fn, states_at, n: int, j: int, replicates: int,
                 seed: int, restart_indices: Optional[Sequence[int]] = None):
    """Monte-Carlo upper estimate of the tau coefficient at lag j.

    ``states_at(i, streams)`` returns the time-i states of the replicate
    paths; ``evolve_fn(states, i, i + j, streams)`` runs the recursion
    forward with reservoir noise addressed by time, so two copies started
    from different states share all post-restart variates (a contraction
    coupling). The restart copy starts from an independent draw of the
    time-i law, realized by rotating the replicate states. Returns
    (estimate, standard_error) for sup over the sampled restart indices of
    E d(X_{n,i+j}, X~_{n,i+j}).
    """
    streams = np.arange(replicates)
    if restart_indices is None:
        restart_indices = [n // 4, n // 2, max(3 * n // 4 - j, 1)]
    restart_indices = [i for i in restart_indices if 0 <= i and i + j <= n]
    best = (0.0, 0.0)
    for i in restart_indices:
        base = states_at(i, streams)
        shuffled = np.roll(base, 1, axis=0)
        end_main = evolve_fn(np.array(base), i, i + j, streams)
        end_restart = evolve_fn(np.array(shuffled), i, i + j, streams)
        gaps = np.abs(np.asarray(end_main, dtype=float)
                      - np.asarray(end_restart, dtype=float))
        if gaps.ndim > 1:
            gaps = gaps[:, 0] if gaps.shape[1] else gaps.sum(axis=1)
        est = float(gaps.mean())
        se = float(gaps.std(ddof=1) / np.sqrt(len(gaps))) if len(gaps) > 1 else 0.0
        if est >= best[0]:
            best = (est, se)
    return best
