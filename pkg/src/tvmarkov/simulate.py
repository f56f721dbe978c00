"""Trajectory simulation for the triangular arrays and their frozen companions.

All randomness is drawn from a counter-addressed reservoir so that a chain
and its frozen-parameter companion can share variates index by index, which
is what makes the coupled-gap experiments meaningful.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ModelInvalidError
from .kernels import FiniteKernelFamily, stationary_distribution, uniform_grid
from .reservoir import stream_uniforms

# address slot reserved for innovation variates (the V_k of the count models)
INNOV_SLOT = 1000


@dataclass(frozen=True)
class PathSample:
    """One simulated trajectory, indexed k = k_min..n (k_min <= 0 is burn-in)."""

    n: int
    k_min: int
    values: np.ndarray
    model_label: str
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if len(self.values) != self.n - self.k_min + 1:
            raise ValueError("values length does not match the index range")

    def value_at(self, k: int) -> float:
        if not self.k_min <= k <= self.n:
            raise IndexError(f"k={k} outside [{self.k_min}, {self.n}]")
        return self.values[k - self.k_min]

    def observed(self) -> np.ndarray:
        """The k >= 0 segment, i.e. values X_{n,0}..X_{n,n}."""
        return self.values[-self.k_min:]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "u", "value"])
            for k in range(self.k_min, self.n + 1):
                writer.writerow([k, k / self.n,
                                 repr(np.asarray(self.value_at(k)).item())])


def _inverse_cdf_rows(cum_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Smallest index with cumulative row mass >= u, per row."""
    return (cum_rows < u[:, None]).sum(axis=1)


def simulate_finite_batch(family: FiniteKernelFamily, n: int, seed: int,
                          streams: Sequence[int]) -> np.ndarray:
    """Paths of the finite-state array for many replicate streams at once.

    Returns an integer array of shape (len(streams), n + 1); column k holds
    X_{n,k}. X_{n,0} is drawn exactly from the invariant law of Q_0 and each
    step applies the inverse CDF of the relevant kernel row.
    """
    streams = np.asarray(streams, dtype=np.int64)
    pi0 = stationary_distribution(family.matrix(0.0)).weights
    out = np.empty((len(streams), n + 1), dtype=np.int64)
    u0 = stream_uniforms(seed, streams, 0, 0, 0)
    out[:, 0] = (np.cumsum(pi0)[None, :] < u0[:, None]).sum(axis=1)
    cums = {}
    for k in range(1, n + 1):
        key = round(k / n, 15)
        cum = cums.get(key)
        if cum is None:
            cum = np.cumsum(family.matrix(k / n), axis=1)
            cums[key] = cum
        u = stream_uniforms(seed, streams, k, 0, 0)
        out[:, k] = _inverse_cdf_rows(cum[out[:, k - 1]], u)
    return out


def simulate_finite(family: FiniteKernelFamily, n: int, seed: int,
                    stream_id: int = 0) -> PathSample:
    values = simulate_finite_batch(family, n, seed, [stream_id])[0]
    return PathSample(n=n, k_min=0, values=values, model_label=family.label,
                      seed=seed, stream_id=stream_id)


def poisson_inverse_cdf(v: np.ndarray, lam: float, cap: int = 10000) -> np.ndarray:
    """Smallest x with Poisson(lam) CDF >= v, vectorized over v."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape, dtype=np.int64)
    pmf = np.exp(-lam)
    cdf = pmf
    x = 0
    pending = v > cdf
    while pending.any():
        x += 1
        if x > cap:
            raise RuntimeError("Poisson quantile loop exceeded its cap")
        pmf *= lam / x
        cdf += pmf
        out[pending] = x
        pending = v > cdf
    return out


def inar_burn_in(alpha_fns: Sequence[Callable], default_scale: int = 10) -> int:
    """Default pre-history length 10 * ceil(1 / (1 - sum alpha_j(0)))."""
    total = sum(f(0.0) for f in alpha_fns)
    return default_scale * int(np.ceil(1.0 / (1.0 - total)))


def check_inar_condition(alpha_fns: Sequence[Callable],
                         grid: Optional[np.ndarray] = None) -> None:
    grid = uniform_grid() if grid is None else np.asarray(grid, dtype=float)
    for u in grid:
        total = sum(f(u) for f in alpha_fns)
        if not total < 1.0:
            raise ModelInvalidError(
                f"thinning coefficients sum to {total} >= 1 at u={u}")
        if any(f(u) < 0 for f in alpha_fns):
            raise ModelInvalidError(f"negative thinning coefficient at u={u}")


def _inar_paths(alpha_fns, lambda_fn, q, n, seed, streams, frozen_u, burn_in):
    """Shared recursion for the array (frozen_u=None) and frozen-u companions.

    Thinning count j at time k consumes uniforms at addresses (k, j, 1..X);
    the innovation consumes (k, INNOV_SLOT, 0). Identical addresses across
    the two variants realize the shared-reservoir coupling.
    """
    streams = np.asarray(streams, dtype=np.int64)
    k_min = -burn_in
    steps = n - k_min + 1
    out = np.zeros((len(streams), steps), dtype=np.int64)
    # lag window; index 0 is the most recent value
    lags = np.zeros((len(streams), q), dtype=np.int64)
    for t, k in enumerate(range(k_min, n + 1)):
        u = frozen_u if frozen_u is not None else max(k / n, 0.0)
        total, lags = inar_step(alpha_fns, lambda_fn, q, lags, k, u, seed, streams)
        out[:, t] = total
    return k_min, out


def inar_step(alpha_fns, lambda_fn, q, lags, k, u, seed, streams):
    """One thinning-plus-innovation step from the lag window ``lags``.

    Addresses depend only on (seed, stream, k, slot, i), so two chains in
    different states consume a shared prefix of thinning indicators.
    """
    streams = np.asarray(streams, dtype=np.int64)
    total = np.zeros(len(streams), dtype=np.int64)
    for j in range(1, q + 1):
        counts = lags[:, j - 1]
        cap = int(counts.max())
        if cap > 0:
            uu = stream_uniforms(seed, streams, k, j, np.arange(1, cap + 1))
            hits = (uu < alpha_fns[j - 1](u)) & (np.arange(cap)[None, :] < counts[:, None])
            total += hits.sum(axis=1)
    v = stream_uniforms(seed, streams, k, INNOV_SLOT, 0)
    total += poisson_inverse_cdf(v, lambda_fn(u))
    new_lags = np.empty_like(lags)
    if q > 1:
        new_lags[:, 1:] = lags[:, :-1]
    new_lags[:, 0] = total
    return total, new_lags


def evolve_inar(alpha_fns, lambda_fn, q, lags, k_from, k_to, n, seed, streams):
    """Run the array recursion from time k_from (exclusive) to k_to."""
    lags = np.array(lags, dtype=np.int64)
    for k in range(k_from + 1, k_to + 1):
        u = max(k / n, 0.0)
        values, lags = inar_step(alpha_fns, lambda_fn, q, lags, k, u, seed, streams)
    return values, lags


def evolve_affine(a_sampler, x, k_from, k_to, n, seed, streams):
    """Run the affine recursion from time k_from (exclusive) to k_to."""
    streams = np.asarray(streams, dtype=np.int64)
    x = np.array(x, dtype=float)
    for k in range(k_from + 1, k_to + 1):
        u = max(k / n, 0.0)
        w = np.stack([stream_uniforms(seed, streams, k, 0, 0),
                      stream_uniforms(seed, streams, k, 1, 0)], axis=-1)
        a, b = a_sampler(u, w)
        x = a * x + b
    return x


def simulate_inar_batch(alpha_fns, lambda_fn, q, n, seed, streams,
                        burn_in: Optional[int] = None):
    """Triangular-array INAR(q) paths; returns (k_min, array of shape (R, n-k_min+1))."""
    check_inar_condition(alpha_fns)
    if burn_in is None:
        burn_in = inar_burn_in(alpha_fns)
    return _inar_paths(alpha_fns, lambda_fn, q, n, seed, streams, None, burn_in)


def simulate_inar(alpha_fns, lambda_fn, q, n, seed, stream_id: int = 0,
                  burn_in: Optional[int] = None) -> PathSample:
    """Integer-valued autoregression with Bernoulli thinning and Poisson innovations.

    X_{n,k} = sum_j sum_{i<=X_{n,k-j}} 1{U^{(k)}_{j,i} < alpha_j(k/n)} + Poi(lambda(k/n));
    pre-history indices k <= 0 run at u = 0.
    """
    k_min, out = simulate_inar_batch(alpha_fns, lambda_fn, q, n, seed,
                                     [stream_id], burn_in)
    return PathSample(n=n, k_min=k_min, values=out[0], model_label="inar",
                      seed=seed, stream_id=stream_id)


def simulate_stationary_inar_batch(u, alpha_fns, lambda_fn, q, n, seed, streams,
                                   burn_in: Optional[int] = None):
    """Frozen-u companion X_k(u), sharing reservoir addresses with the array."""
    check_inar_condition(alpha_fns)
    if burn_in is None:
        burn_in = inar_burn_in(alpha_fns)
    return _inar_paths(alpha_fns, lambda_fn, q, n, seed, streams, float(u), burn_in)


def simulate_stationary_inar(u, alpha_fns, lambda_fn, q, n, seed,
                             stream_id: int = 0,
                             burn_in: Optional[int] = None) -> PathSample:
    k_min, out = simulate_stationary_inar_batch(u, alpha_fns, lambda_fn, q, n,
                                                seed, [stream_id], burn_in)
    return PathSample(n=n, k_min=k_min, values=out[0], model_label="inar-frozen",
                      seed=seed, stream_id=stream_id)


def check_affine_contraction(a_sampler, m: int, s: float,
                             grid: Optional[np.ndarray] = None,
                             samples: int = 10000, seed: int = 0) -> float:
    """Monte-Carlo check that E|A_m(u)...A_1(u)|^s < 1 on a u-grid.

    ``a_sampler(u, w)`` maps uniforms ``w`` of shape (..., 2) to the pair
    (A, B); only A enters the check. Returns the worst grid estimate and
    raises if it reaches 1.
    """
    grid = np.linspace(0.0, 1.0, 11) if grid is None else np.asarray(grid, dtype=float)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for u in grid:
        w = rng.random((samples, m, 2))
        a, _ = a_sampler(u, w)
        est = float(np.mean(np.abs(np.prod(a, axis=1)) ** s))
        worst = max(worst, est)
        if est >= 1.0:
            raise ModelInvalidError(
                f"m-fold product moment estimate {est} >= 1 at u={u}")
    return worst


def simulate_affine_batch(a_sampler, n, seed, streams, frozen_u=None,
                          burn_in: int = 200, x_init: float = 0.0):
    """Scalar affine recursion X_k = A_k X_{k-1} + B_k driven by reservoir pairs.

    ``a_sampler(u, w)`` receives two uniforms per step (slots 0 and 1) and
    returns the coefficient pair; pre-history runs at u = 0 unless frozen.
    """
    streams = np.asarray(streams, dtype=np.int64)
    k_min = -burn_in
    out = np.empty((len(streams), n - k_min + 1))
    x = np.full(len(streams), float(x_init))
    for t, k in enumerate(range(k_min, n + 1)):
        u = frozen_u if frozen_u is not None else max(k / n, 0.0)
        w = np.stack([stream_uniforms(seed, streams, k, 0, 0),
                      stream_uniforms(seed, streams, k, 1, 0)], axis=-1)
        a, b = a_sampler(u, w)
        x = a * x + b
        out[:, t] = x
    return k_min, out


def simulate_affine(a_sampler, n, seed, stream_id: int = 0,
                    contraction_m: int = 10, contraction_s: float = 0.5,
                    burn_in: int = 200, label: str = "affine",
                    skip_check: bool = False) -> PathSample:
    if not skip_check:
        check_affine_contraction(a_sampler, contraction_m, contraction_s, seed=seed)
    k_min, out = simulate_affine_batch(a_sampler, n, seed, [stream_id],
                                       burn_in=burn_in)
    return PathSample(n=n, k_min=k_min, values=out[0], model_label=label,
                      seed=seed, stream_id=stream_id)


def check_walk_functions(p_fn, q_fn, r_fn, grid: Optional[np.ndarray] = None) -> None:
    grid = uniform_grid() if grid is None else np.asarray(grid, dtype=float)
    for u in grid:
        p, q, r = p_fn(u), q_fn(u), r_fn(u)
        if min(p, q, r) < 0 or abs(p + q + r - 1.0) > 1e-12:
            raise ModelInvalidError(f"(p, q, r) leaves the simplex at u={u}")
        if not p / q < 1.0:
            raise ModelInvalidError(f"p/q = {p / q} >= 1 at u={u}: no negative drift")


def simulate_random_walk_batch(p_fn, q_fn, r_fn, n, seed, streams,
                               burn_in: int = 200):
    """Reflected walk on the nonnegative integers; up/down/hold by inverse CDF.

    At state 0 the down move is absorbed into the hold, so the kernel is
    Q(0, 1) = p, Q(0, 0) = 1 - p. Pre-history runs at u = 0.
    """
    check_walk_functions(p_fn, q_fn, r_fn)
    streams = np.asarray(streams, dtype=np.int64)
    k_min = -burn_in
    out = np.empty((len(streams), n - k_min + 1), dtype=np.int64)
    x = np.zeros(len(streams), dtype=np.int64)
    for t, k in enumerate(range(k_min, n + 1)):
        u = max(k / n, 0.0)
        uu = stream_uniforms(seed, streams, k, 0, 0)
        p, q = p_fn(u), q_fn(u)
        up = uu < p
        down = (~up) & (uu < p + q) & (x > 0)
        x = x + up.astype(np.int64) - down.astype(np.int64)
        out[:, t] = x
    return k_min, out


def simulate_random_walk(p_fn, q_fn, r_fn, n, seed, stream_id: int = 0,
                         burn_in: int = 200) -> PathSample:
    k_min, out = simulate_random_walk_batch(p_fn, q_fn, r_fn, n, seed,
                                            [stream_id], burn_in=burn_in)
    return PathSample(n=n, k_min=k_min, values=out[0], model_label="random-walk",
                      seed=seed, stream_id=stream_id)
