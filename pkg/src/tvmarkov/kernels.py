"""Families of slowly varying Markov kernels on finite or truncated state spaces.

Exact laws, ordered kernel products, contraction coefficients, and the
drift-based contraction certificates used by the mixing and bound checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CertificateNotFoundError, ModelInvalidError, NonErgodicError, TruncationError
from .measures import DiscreteMeasure, JointLaw

ROW_SUM_TOL = 1e-12
DEFAULT_GRID_POINTS = 201


def uniform_grid(points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


class FiniteKernelFamily:
    """Map u in [0, 1] to a row-stochastic S x S matrix, Hölder in u.

    ``matrix_fn(u)`` returns the full matrix; alternatively an ``entry(u, x, y)``
    scalar function may be supplied. By convention Q_u = Q_0 for u < 0.
    """

    def __init__(self, state_count: int, matrix_fn: Optional[Callable] = None,
                 entry: Optional[Callable] = None, holder_L: float = 0.0,
                 holder_kappa: float = 1.0, label: str = "finite"):
        if state_count < 2:
            raise ValueError("need at least two states")
        if matrix_fn is None and entry is None:
            raise ValueError("supply matrix_fn or entry")
        if not 0 < holder_kappa <= 1:
            raise ValueError("holder_kappa must lie in (0, 1]")
        if holder_L < 0:
            raise ValueError("holder_L must be nonnegative")
        self.state_count = int(state_count)
        self.holder_L = float(holder_L)
        self.holder_kappa = float(holder_kappa)
        self.label = label
        self._matrix_fn = matrix_fn
        self._entry = entry
        self._cache: dict = {}

    def entry(self, u: float, x: int, y: int) -> float:
        return float(self.matrix(u)[x, y])

    def matrix(self, u: float) -> np.ndarray:
        u = 0.0 if u < 0 else float(u)
        if u > 1.0:
            raise ValueError(f"u={u} outside [0, 1]")
        key = round(u, 15)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if self._matrix_fn is not None:
            mat = np.asarray(self._matrix_fn(u), dtype=float)
        else:
            s = self.state_count
            mat = np.array([[self._entry(u, x, y) for y in range(s)] for x in range(s)])
        if mat.shape != (self.state_count, self.state_count):
            raise ValueError("matrix_fn returned a wrongly shaped matrix")
        if np.any(mat < -ROW_SUM_TOL) or np.max(np.abs(mat.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ValueError(f"kernel at u={u} is not row-stochastic")
        if len(self._cache) < 100000:
            self._cache[key] = mat
        return mat

    def validate_on_grid(self, grid: Optional[np.ndarray] = None) -> None:
        """Check row-stochasticity and the declared Hölder bound on a u-grid."""
        grid = uniform_grid() if grid is None else np.asarray(grid, dtype=float)
        mats = np.stack([self.matrix(u) for u in grid])
        for i, u in enumerate(grid):
            for j in range(i + 1, len(grid)):
                gap = 0.5 * np.abs(mats[i] - mats[j]).sum(axis=1).max()
                allowed = self.holder_L * abs(u - grid[j]) ** self.holder_kappa
                if gap > allowed + 1e-10:
                    raise ValueError(
                        f"Hölder bound violated between u={u} and v={grid[j]}: "
                        f"{gap} > {allowed}")


class CountableKernelFamily:
    """Kernel family on the nonnegative integers, truncated to {0..N}.

    Rows must keep at least ``1 - tail_tolerance`` of their mass inside the
    truncation; retained rows are renormalized to sum to one exactly.
    """

    def __init__(self, truncation_N: int, entry: Optional[Callable] = None,
                 matrix_fn: Optional[Callable] = None, tail_tolerance: float = 1e-10,
                 holder_L: float = 0.0, holder_kappa: float = 1.0, label: str = "countable"):
        if truncation_N < 1:
            raise ValueError("truncation_N must be >= 1")
        if matrix_fn is None and entry is None:
            raise ValueError("supply matrix_fn or entry")
        self.truncation_N = int(truncation_N)
        self.state_count = self.truncation_N + 1
        self.tail_tolerance = float(tail_tolerance)
        self.holder_L = float(holder_L)
        self.holder_kappa = float(holder_kappa)
        self.label = label
        self._matrix_fn = matrix_fn
        self._entry = entry
        self._cache: dict = {}

    def row_deficit(self, u: float) -> float:
        """Worst truncated-away row mass at this u (before renormalization)."""
        raw = self._raw_matrix(u)
        return float(np.max(1.0 - raw.sum(axis=1)))

    def _raw_matrix(self, u: float) -> np.ndarray:
        u = 0.0 if u < 0 else float(u)
        if u > 1.0:
            raise ValueError(f"u={u} outside [0, 1]")
        if self._matrix_fn is not None:
            return np.asarray(self._matrix_fn(u), dtype=float)
        s = self.state_count
        return np.array([[self._entry(u, x, y) for y in range(s)] for x in range(s)])

    def matrix(self, u: float) -> np.ndarray:
        u = 0.0 if u < 0 else float(u)
        key = round(u, 15)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        raw = self._raw_matrix(u)
        deficits = 1.0 - raw.sum(axis=1)
        worst = float(np.max(deficits))
        if worst > self.tail_tolerance:
            raise TruncationError(
                f"row mass {worst} beyond truncation N={self.truncation_N} at u={u} "
                f"exceeds tail tolerance {self.tail_tolerance}")
        mat = raw / raw.sum(axis=1, keepdims=True)
        if len(self._cache) < 100000:
            self._cache[key] = mat
        return mat


KernelFamily = FiniteKernelFamily | CountableKernelFamily


@dataclass(frozen=True)
class DriftSpec:
    """Drift function and certificate constants for the geometric-ergodicity route.

    ``V`` maps states to [1, inf); the m-fold window drift is
    Q_{u_1}...Q_{u_m} V <= lambda_ * V + b with a minoration by eta * nu on
    the sublevel set {V <= R}, for windows of radius ``epsilon_window``.
    """

    V: Callable[[float], float]
    m: int
    lambda_: float
    b: float
    K_const: float
    eta: float
    R: float
    epsilon_window: float
    minoration_nu: DiscreteMeasure

    def __post_init__(self):
        if not 0 < self.lambda_ < 1:
            raise ValueError("lambda_ must lie in (0, 1)")
        if self.R <= 2.0 * self.b / (1.0 - self.lambda_):
            raise ValueError("need R > 2 b / (1 - lambda)")
        if self.m < 1 or self.b <= 0 or self.K_const < 1 or self.epsilon_window <= 0:
            raise ValueError("invalid drift constants")

    def v_values(self, state_count: int) -> np.ndarray:
        vals = np.array([self.V(x) for x in range(state_count)], dtype=float)
        if np.any(vals < 1.0 - 1e-12):
            raise ValueError("V(x) must be >= 1 for all states")
        return vals

    def nu_values(self, state_count: int) -> np.ndarray:
        vals = np.zeros(state_count)
        idx = np.asarray(np.rint(self.minoration_nu.support), dtype=int)
        vals[idx] = self.minoration_nu.weights
        return vals


def transition_matrix(family: KernelFamily, u: float) -> np.ndarray:
    """Row-stochastic matrix Q_u; u < 0 clamps to Q_0."""
    return family.matrix(u)


def dobrushin_tv(p_mat: np.ndarray) -> float:
    """Dobrushin coefficient: max over state pairs of the TV distance of rows."""
    p_mat = np.asarray(p_mat, dtype=float)
    diffs = 0.5 * np.abs(p_mat[:, None, :] - p_mat[None, :, :]).sum(axis=2)
    return float(diffs.max())


def _ergodicity_power(p_mat: np.ndarray, threshold: float = 1.0 - 1e-9):
    """Smallest dyadic power with c(P^m) < threshold, or None."""
    s = p_mat.shape[0]
    cap = s * s
    power = 1
    mat = p_mat
    while power <= cap:
        c = dobrushin_tv(mat)
        if c < threshold:
            return power, c
        mat = mat @ mat
        power *= 2
    return None


def stationary_distribution(p_mat: np.ndarray, tol: float = 1e-12,
                            check_ergodic: bool = True) -> DiscreteMeasure:
    """Unique invariant probability of an ergodic stochastic matrix.

    ``check_ergodic=False`` skips the contraction certificate; callers
    sweeping a continuum of nearby kernels check one representative instead.
    """
    p_mat = np.asarray(p_mat, dtype=float)
    s = p_mat.shape[0]
    if check_ergodic and _ergodicity_power(p_mat) is None:
        raise NonErgodicError("no power up to S^2 contracts in total variation")
    if s <= 2000:
        a = np.vstack([p_mat.T - np.eye(s), np.ones(s)])
        rhs = np.zeros(s + 1)
        rhs[-1] = 1.0
        pi, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    else:
        pi = np.full(s, 1.0 / s)
        for _ in range(100000):
            nxt = pi @ p_mat
            if np.abs(nxt - pi).sum() < 0.01 * tol:
                pi = nxt
                break
            pi = nxt
    pi = np.maximum(pi, 0.0)
    pi = pi / pi.sum()
    residual = float(np.abs(pi @ p_mat - pi).sum())
    if residual >= tol:
        raise NonErgodicError(f"invariant residual {residual} above tolerance {tol}")
    return DiscreteMeasure.from_weights(pi)


def frozen_laws(family: KernelFamily, us) -> np.ndarray:
    """Invariant laws pi_u for many u at once, shape (len(us), S).

    The ergodicity certificate is computed for the first u only; the
    invariance residual is still verified for every u.
    """
    us = np.asarray(us, dtype=float)
    out = np.empty((len(us), family.state_count))
    for t, u in enumerate(us):
        out[t] = stationary_distribution(family.matrix(u),
                                         check_ergodic=(t == 0)).weights
    return out


def inhomogeneous_product(family: KernelFamily, n: int, k_from: int, k_to: int) -> np.ndarray:
    """Ordered product Q_{k_from/n} ... Q_{k_to/n}; indices <= 0 use Q_0."""
    if k_from > k_to:
        raise ValueError("need k_from <= k_to")
    if k_to > n:
        raise ValueError("need k_to <= n")
    prod = family.matrix(k_from / n)
    for k in range(k_from + 1, k_to + 1):
        prod = prod @ family.matrix(k / n)
    return prod


def marginal_law(family: KernelFamily, n: int, k: int) -> DiscreteMeasure:
    """Law of X_{n,k}: pi_0 pushed through Q_{1/n} ... Q_{k/n}; pi_0 for k <= 0."""
    if k > n:
        raise ValueError("need k <= n")
    pi0 = stationary_distribution(family.matrix(0.0))
    w = pi0.weights
    for s in range(1, k + 1):
        w = w @ family.matrix(s / n)
    return DiscreteMeasure.from_weights(w)


def marginal_laws(family: KernelFamily, n: int, k_max: Optional[int] = None) -> np.ndarray:
    """All marginal laws pi^(n)_k for k = 0..k_max, as a (k_max + 1, S) array."""
    k_max = n if k_max is None else k_max
    pi0 = stationary_distribution(family.matrix(0.0)).weights
    out = np.empty((k_max + 1, family.state_count))
    out[0] = pi0
    for k in range(1, k_max + 1):
        out[k] = out[k - 1] @ family.matrix(k / n)
    return out


def finite_dim_law(family: KernelFamily, u: float, j: int) -> JointLaw:
    """Stationary law of j consecutive states of the frozen-u chain."""
    if j < 1:
        raise ValueError("need j >= 1")
    q = family.matrix(u)
    pi = stationary_distribution(q).weights
    w = pi
    for _ in range(j - 1):
        w = w[..., :, None] * q
    return JointLaw(w)


def finite_dim_law_inhom(family: KernelFamily, n: int, k: int, j: int) -> JointLaw:
    """Law of (X_{n,k}, ..., X_{n,k+j-1}) for the triangular array."""
    if j < 1:
        raise ValueError("need j >= 1")
    if k + j - 1 > n:
        raise ValueError("need k + j - 1 <= n")
    w = marginal_law(family, n, k).weights
    for t in range(1, j):
        w = w[..., :, None] * family.matrix((k + t) / n)
    return JointLaw(w)


def doeblin_certificate(family: FiniteKernelFamily, m: int = 1,
                        grid: Optional[np.ndarray] = None, m_cap: int = 64):
    """Contraction constants from the minoration of m-step kernels.

    epsilon = S * min over grid u and (x, y) of Q_u^m(x, y); the returned
    r_bound = 1 - epsilon bounds sup_u c(Q_u^m). If epsilon = 0 at the
    requested m, larger m are tried up to ``m_cap``; the first m with a
    strictly positive minoration is reported.
    """
    grid = uniform_grid() if grid is None else np.asarray(grid, dtype=float)
    s = family.state_count
    mats = [family.matrix(u) for u in grid]

    def min_entry(mm):
        powers = []
        for q in mats:
            p = np.linalg.matrix_power(q, mm)
            powers.append(p.min())
        return min(powers)

    for m_try in range(m, m_cap + 1):
        eps = s * min_entry(m_try)
        if eps > 0:
            return m_try, float(eps), float(1.0 - eps)
    raise CertificateNotFoundError(
        f"no m <= {m_cap} gives a positive uniform minoration")


def holder_invariant_bound(m: int, holder_L: float, r_bound: float) -> float:
    """Lipschitz-type constant m L / (1 - r) for u -> pi_u in TV."""
    return m * holder_L / (1.0 - r_bound)


def tv_envelope(family: FiniteKernelFamily, n: int, k: int, u: float,
                m: int, r_bound: float, tol: float = 1e-14) -> float:
    """Proof-chain bound on TV(pi^(n)_k, pi_u).

    L * sum_l r^l * sum over the l-th m-block of |u - s/n|^kappa, with the
    pre-history terms (s <= 0) contributing |u|^kappa each and the remaining
    geometric tail summed in closed form.
    """
    lcoef = family.holder_L
    kappa = family.holder_kappa
    total = 0.0
    ell = 0
    rl = 1.0
    while True:
        s_hi = k - ell * m
        s_lo = k - (ell + 1) * m + 1
        if s_hi <= 0:
            total += lcoef * abs(u) ** kappa * m * rl / (1.0 - r_bound)
            break
        s_vals = np.arange(s_lo, s_hi + 1)
        w = np.where(s_vals >= 1, np.abs(u - s_vals / n) ** kappa, abs(u) ** kappa)
        total += lcoef * rl * float(w.sum())
        rl *= r_bound
        if rl * lcoef * m * max(1.0, abs(u) ** kappa) < tol:
            break
        ell += 1
    return total


def vnorm_pair_stats(p_mat: np.ndarray, v_vals: np.ndarray):
    """Pairwise row statistics (A, B) with A = TV-part and B = V-weighted part.

    For delta in (0, 1], the V_delta contraction numerator is
    (1 - delta) * A + delta * B.
    """
    diff = np.abs(p_mat[:, None, :] - p_mat[None, :, :])
    a = diff.sum(axis=2)
    b = diff @ v_vals
    return a, b


def dobrushin_vnorm(p_mat: np.ndarray, drift: DriftSpec, delta: float) -> float:
    """Contraction coefficient of P for the V_delta norm, V_delta = 1 - delta + delta V.

    Computed by pair enumeration: sup over x != y of
    ||delta_x P - delta_y P||_{V_delta} / (V_delta(x) + V_delta(y)).
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    p_mat = np.asarray(p_mat, dtype=float)
    s = p_mat.shape[0]
    v_vals = drift.v_values(s)
    a, b = vnorm_pair_stats(p_mat, v_vals)
    vd = 1.0 - delta + delta * v_vals
    numer = (1.0 - delta) * a + delta * b
    denom = vd[:, None] + vd[None, :]
    ratios = numer / denom
    np.fill_diagonal(ratios, 0.0)
    return float(ratios.max())


def _window_tuples(u: float, m: int, eps: float, n_random: int, rng: np.random.Generator):
    """Corner samples (u_1..u_m) with u_i in {u - eps, u, u + eps} cap [0, 1]."""
    corners = np.unique(np.clip([u - eps, u, u + eps], 0.0, 1.0))
    windows = [np.full(m, c) for c in corners]
    for _ in range(n_random):
        windows.append(rng.choice(corners, size=m))
    return windows


def verify_f1(family: KernelFamily, drift: DriftSpec,
              grid: Optional[np.ndarray] = None, n_random_windows: int = 3,
              seed: int = 0, tol: float = 1e-9):
    """Check the drift and minoration inequalities on a u-grid.

    Returns the list of (u, window, product-matrix) triples used, so the
    certificate search can reuse the products. Raises ModelInvalidError
    naming the first violated inequality and the u where it fails.
    """
    if drift.eta <= 0:
        raise ModelInvalidError("minoration constant eta must be positive")
    grid = uniform_grid(21) if grid is None else np.asarray(grid, dtype=float)
    rng = np.random.default_rng(seed)
    s = family.state_count
    v_vals = drift.v_values(s)
    nu_vals = drift.nu_values(s)
    small = v_vals <= drift.R
    if not small.any():
        raise ModelInvalidError("sublevel set {V <= R} is empty on the truncated space")
    checked = []
    for u in grid:
        qv = family.matrix(u) @ v_vals
        bad = qv > drift.K_const * v_vals + tol
        if bad.any():
            x = int(np.argmax(qv - drift.K_const * v_vals))
            raise ModelInvalidError(
                f"one-step drift Q_u V <= K V fails at u={u}, x={x}: "
                f"{qv[x]} > {drift.K_const * v_vals[x]}")
        for window in _window_tuples(u, drift.m, drift.epsilon_window,
                                     n_random_windows, rng):
            prod = family.matrix(window[0])
            for ui in window[1:]:
                prod = prod @ family.matrix(ui)
            pv = prod @ v_vals
            bad = pv > drift.lambda_ * v_vals + drift.b + tol
            if bad.any():
                x = int(np.argmax(pv - (drift.lambda_ * v_vals + drift.b)))
                raise ModelInvalidError(
                    f"m-fold drift fails at u={u}, x={x}: {pv[x]} > "
                    f"{drift.lambda_ * v_vals[x] + drift.b}")
            minor = prod[small] - drift.eta * nu_vals[None, :]
            if minor.min() < -tol:
                x = int(np.where(small)[0][np.argmin(minor.min(axis=1))])
                raise ModelInvalidError(
                    f"minoration fails at u={u}, x={x}: deficit {minor.min()}")
            checked.append((float(u), window, prod))
    return checked


def mouli_certificate(family: KernelFamily, drift: DriftSpec,
                      grid: Optional[np.ndarray] = None,
                      delta_grid: Optional[np.ndarray] = None,
                      n_random_windows: int = 3, seed: int = 0):
    """Search (gamma, delta) with Delta_{V_delta}(window products) <= gamma < 1.

    The drift and minoration inequalities are verified first; the delta scan
    is log-uniform over (1e-3, 1] and gamma is the worst pair-enumeration
    contraction coefficient over the sampled windows.
    """
    checked = verify_f1(family, drift, grid=grid,
                        n_random_windows=n_random_windows, seed=seed)
    v_vals = drift.v_values(family.state_count)
    stats = [vnorm_pair_stats(prod, v_vals) for _, _, prod in checked]
    if delta_grid is None:
        delta_grid = np.logspace(-3, 0, 50)
    vsum = v_vals[:, None] + v_vals[None, :]
    ssum = np.full_like(vsum, 2.0)
    eye = np.eye(len(v_vals), dtype=bool)
    best = (np.inf, None)
    for delta in delta_grid:
        denom = (1.0 - delta) * ssum + delta * vsum
        worst = 0.0
        for a, b in stats:
            numer = (1.0 - delta) * a + delta * b
            ratios = np.where(eye, 0.0, numer / denom)
            worst = max(worst, float(ratios.max()))
            if worst >= best[0]:
                break
        if worst < best[0]:
            best = (worst, float(delta))
    gamma, delta = best
    if not gamma < 1.0:
        raise CertificateNotFoundError(
            f"no delta in the scan achieves contraction; best gamma={gamma}")
    return gamma, delta
