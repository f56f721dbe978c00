"""Kernel-weighted local estimators and their asymptotic covariance formulas."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BandwidthWindowError, NonErgodicError, RegressionDegenerateError
from .kernels import KernelFamily, dobrushin_tv, marginal_laws, stationary_distribution
from .measures import DiscreteMeasure
from .simulate import PathSample

KERNELS = {
    "epanechnikov": (lambda x: 0.75 * (1.0 - x * x), 0.6),
    "triangular": (lambda x: 1.0 - np.abs(x), 2.0 / 3.0),
}

MAX_CONDITION = 1e10


_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def _check_kernel(name: str) -> None:
    fn, k2 = KERNELS[name]
    xs = np.linspace(-1.0, 1.0, 20001)
    mass = _trapezoid(fn(xs), xs)
    k2_num = _trapezoid(fn(xs) ** 2, xs)
    if abs(mass - 1.0) > 1e-6 or abs(k2_num - k2) > 1e-6:
        raise ValueError(f"kernel table entry for {name!r} fails quadrature check")


@dataclass(frozen=True)
class SmoothingSpec:
    """Smoothing kernel name, bandwidth and the lowest usable path index."""

    kernel: str = "epanechnikov"
    bandwidth: float = 0.1
    lower_index: int = 1

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}; "
                             f"choose from {sorted(KERNELS)}")
        if not 0 < self.bandwidth < 1:
            raise ValueError("bandwidth must lie in (0, 1)")
        if self.lower_index < 1:
            raise ValueError("lower_index must be >= 1")
        _check_kernel(self.kernel)

    @property
    def k2(self) -> float:
        """The quadrature constant integral of K squared."""
        return KERNELS[self.kernel][1]

    def kernel_fn(self, x):
        return KERNELS[self.kernel][0](x)


@dataclass(frozen=True)
class LocalEstimate:
    """A local value at u together with its effective sample size."""

    u: float
    value: object
    effective_sample: float
    bandwidth: float
    boundary: bool = False

    def __post_init__(self):
        if not self.effective_sample > 0:
            raise ValueError("effective sample size must be positive")


def kernel_weights(u: float, n: int, spec: SmoothingSpec) -> np.ndarray:
    """Normalized weights e_i(u) for i = 0..n; zero below spec.lower_index.

    Strict support: e_i(u) = 0 whenever |u - i/n| >= bandwidth.
    """
    i = np.arange(n + 1)
    z = (u - i / n) / spec.bandwidth
    # strict inequality with a relative guard so that grid points sitting
    # exactly on the window edge do not leak in through float rounding
    w = np.where(np.abs(z) < 1.0 - 1e-9, spec.kernel_fn(z), 0.0)
    w = np.maximum(w, 0.0)
    w[:spec.lower_index] = 0.0
    total = w.sum()
    if total <= 0:
        raise BandwidthWindowError(
            f"no index i in [{spec.lower_index}, {n}] falls within "
            f"bandwidth {spec.bandwidth} of u={u}")
    return w / total


def _is_boundary(u: float, b: float) -> bool:
    return u - b < 0.0 or u + b > 1.0


def estimate_functional(path: PathSample, f: Callable, u: float,
                        spec: SmoothingSpec, ell: int = 1) -> LocalEstimate:
    """Weighted sum of f over ell consecutive states: sum_i e_i(u) f(X_{i-ell+1..i})."""
    n = path.n
    w = kernel_weights(u, n, spec)
    idx = np.nonzero(w)[0]
    vals = np.array([f(*[path.value_at(i - ell + 1 + t) for t in range(ell)])
                     for i in idx])
    return LocalEstimate(u=u, value=float(w[idx] @ vals),
                         effective_sample=1.0 / float(np.sum(w ** 2)),
                         bandwidth=spec.bandwidth,
                         boundary=_is_boundary(u, spec.bandwidth))


def _weighted_counts(values: np.ndarray, w: np.ndarray, state_count: int) -> np.ndarray:
    return np.bincount(values, weights=w, minlength=state_count)


def estimate_pi(path: PathSample, u: float, spec: SmoothingSpec,
                state_count: Optional[int] = None) -> DiscreteMeasure:
    """Local occupation law pi_hat_u(x) = sum_i e_i(u) 1{X_{n,i} = x}."""
    n = path.n
    w = kernel_weights(u, n, spec)
    obs = path.observed()
    if state_count is None:
        state_count = int(obs.max()) + 1
    counts = _weighted_counts(obs.astype(np.int64), w, state_count)
    return DiscreteMeasure.from_weights(counts)


def estimate_pi2(path: PathSample, u: float, spec: SmoothingSpec,
                 state_count: Optional[int] = None) -> np.ndarray:
    """Local pair law pi_hat_{u,2}(x, y) = sum_i e_i(u) 1{X_{n,i-1}=x, X_{n,i}=y}."""
    n = path.n
    w = kernel_weights(u, n, spec)
    obs = path.observed().astype(np.int64)
    if state_count is None:
        state_count = int(obs.max()) + 1
    idx = np.nonzero(w)[0]
    prev = np.array([path.value_at(i - 1) for i in idx], dtype=np.int64)
    cur = obs[idx]
    flat = np.bincount(prev * state_count + cur, weights=w[idx],
                       minlength=state_count * state_count)
    return flat.reshape(state_count, state_count)


def estimate_Q(path: PathSample, u: float, spec: SmoothingSpec,
               state_count: Optional[int] = None) -> np.ndarray:
    """Local transition estimate: rows of pi_hat_{u,2} normalized by their mass.

    Rows whose local occupation mass vanishes are returned as NaN rather
    than imputed.
    """
    pair = estimate_pi2(path, u, spec, state_count)
    row_mass = pair.sum(axis=1)
    q_hat = np.full_like(pair, np.nan)
    ok = row_mass > 0
    q_hat[ok] = pair[ok] / row_mass[ok, None]
    return q_hat


def _gamma_j(pi: np.ndarray, q_pow: np.ndarray) -> np.ndarray:
    return pi[:, None] * q_pow - np.outer(pi, pi)


def sigma1(family: KernelFamily, u: float, spec: SmoothingSpec,
           tail_tol: float = 1e-14, max_terms: int = 100000) -> np.ndarray:
    """Long-run covariance of the local occupation estimator at frozen u.

    k2 * [Gamma(0) + sum_{j>=1} (Gamma(j) + Gamma(j)')] with
    Gamma(j) = diag(pi_u) Q_u^j - pi_u pi_u'; the series is truncated when
    the largest entry of Gamma(j) falls below tail_tol.
    """
    q = family.matrix(u)
    pi = stationary_distribution(q).weights
    total = np.diag(pi) - np.outer(pi, pi)
    q_pow = np.eye(len(pi))
    for _ in range(max_terms):
        q_pow = q_pow @ q
        g = _gamma_j(pi, q_pow)
        if np.abs(g).max() < tail_tol:
            break
        total += g + g.T
    else:
        raise NonErgodicError("covariance series did not decay within the term cap")
    return spec.k2 * total


def sigma2(family: KernelFamily, u: float, spec: SmoothingSpec) -> np.ndarray:
    """Asymptotic covariance of the local transition pivot, an (S^2, S^2) matrix.

    Entry ((x, y), (x', y')) = k2 / pi_u(x) * Q_u(x, y) (1{y=y'} - Q_u(x', y')) 1{x=x'}.
    """
    q = family.matrix(u)
    pi = stationary_distribution(q).weights
    s = len(pi)
    out = np.zeros((s * s, s * s))
    for x in range(s):
        block = (np.diag(q[x]) - np.outer(q[x], q[x])) / pi[x]
        out[x * s:(x + 1) * s, x * s:(x + 1) * s] = block
    return spec.k2 * out


def expected_pi_hat(family: KernelFamily, n: int, u: float,
                    spec: SmoothingSpec) -> np.ndarray:
    """Exact E pi_hat_u = sum_i e_i(u) pi^(n)_i from the marginal laws."""
    w = kernel_weights(u, n, spec)
    pis = marginal_laws(family, n)
    return w @ pis


def expected_pi2_hat(family: KernelFamily, n: int, u: float,
                     spec: SmoothingSpec) -> np.ndarray:
    """Exact E pi_hat_{u,2}(x, y) = sum_i e_i(u) pi^(n)_{i-1}(x) Q_{i/n}(x, y)."""
    w = kernel_weights(u, n, spec)
    pis = marginal_laws(family, n)
    s = family.state_count
    out = np.zeros((s, s))
    for i in np.nonzero(w)[0]:
        out += w[i] * pis[i - 1][:, None] * family.matrix(i / n)
    return out


def lls_inar(path: PathSample, u: float, spec: SmoothingSpec):
    """Localized least squares for the INAR(1) pair a(u) = (alpha(u), lambda(u)).

    Regresses X_i on (1, X_{i-1}) with weights e_i(u); returns
    (alpha_hat, lambda_hat).
    """
    n = path.n
    w = kernel_weights(u, n, spec)
    idx = np.nonzero(w)[0]
    y = np.array([path.value_at(i) for i in idx], dtype=float)
    x_prev = np.array([path.value_at(i - 1) for i in idx], dtype=float)
    design = np.stack([np.ones_like(x_prev), x_prev], axis=1)
    gram = design.T @ (w[idx, None] * design)
    if np.linalg.cond(gram) > MAX_CONDITION:
        raise RegressionDegenerateError(
            "weighted design matrix is numerically singular "
            f"(cond {np.linalg.cond(gram):.3g})")
    rhs = design.T @ (w[idx] * y)
    coef = np.linalg.solve(gram, rhs)
    return float(coef[1]), float(coef[0])


def estimate_walk_pq(path: PathSample, u: float, spec: SmoothingSpec):
    """Local up/down step frequencies of a reflected walk.

    p_hat is the weighted frequency of +1 increments over all states;
    q_hat is conditioned on X_{n,i} >= 1 since the down move is suppressed
    at zero. Returns (p_hat, q_hat) with q_hat NaN when the window never
    visits a positive state.
    """
    n = path.n
    w = kernel_weights(u, n, spec)
    w = w[:n]  # increments X_{i+1} - X_i exist for i <= n - 1
    idx = np.nonzero(w)[0]
    cur = np.array([path.value_at(i) for i in idx], dtype=np.int64)
    nxt = np.array([path.value_at(i + 1) for i in idx], dtype=np.int64)
    diff = nxt - cur
    p_hat = float(np.sum(w[idx] * (diff == 1)) / np.sum(w[idx]))
    pos = cur >= 1
    pos_mass = float(np.sum(w[idx] * pos))
    if pos_mass <= 0:
        return p_hat, float("nan")
    q_hat = float(np.sum(w[idx] * (diff == -1) * pos) / pos_mass)
    return p_hat, q_hat
