"""Named model presets and declarative coefficient functions of u."""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .errors import ConfigValidationError, ModelInvalidError
from .kernels import CountableKernelFamily, DriftSpec, FiniteKernelFamily, uniform_grid
from .measures import DiscreteMeasure
from .simulate import check_inar_condition, check_walk_functions


def coefficient_fn(spec) -> Callable[[float], float]:
    """Build u -> value from a scalar, {'poly': [...]} or {'trig': {...}} spec.

    poly: c0 + c1 u + c2 u^2 + ...; trig: a0 + sum a_k cos(2 pi k u)
    + sum b_k sin(2 pi k u).
    """
    if isinstance(spec, (int, float)):
        value = float(spec)
        return lambda u: value
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigValidationError(f"coefficient spec {spec!r} is not a scalar, "
                                    "{'poly': [...]} or {'trig': {...}}")
    if "poly" in spec:
        coeffs = [float(c) for c in spec["poly"]]
        return lambda u: float(np.polyval(coeffs[::-1], u))
    if "trig" in spec:
        t = spec["trig"]
        a0 = float(t.get("a0", 0.0))
        cos_c = [float(c) for c in t.get("cos", [])]
        sin_c = [float(c) for c in t.get("sin", [])]

        def fn(u):
            val = a0
            for k, c in enumerate(cos_c, start=1):
                val += c * np.cos(2 * np.pi * k * u)
            for k, c in enumerate(sin_c, start=1):
                val += c * np.sin(2 * np.pi * k * u)
            return float(val)

        return fn
    raise ConfigValidationError(f"unknown coefficient spec keys {sorted(spec)}")


def coefficient_lipschitz(spec) -> float:
    """Upper bound on the Lipschitz constant of a declarative coefficient."""
    if isinstance(spec, (int, float)):
        return 0.0
    if "poly" in spec:
        return float(sum(k * abs(c) for k, c in enumerate(spec["poly"])))
    t = spec["trig"]
    return float(2 * np.pi * (
        sum(k * abs(c) for k, c in enumerate(t.get("cos", []), start=1))
        + sum(k * abs(c) for k, c in enumerate(t.get("sin", []), start=1))))


DEFAULT_P0 = np.array([[0.6, 0.3, 0.1],
                       [0.2, 0.5, 0.3],
                       [0.3, 0.3, 0.4]])
DEFAULT_P1 = np.array([[0.3, 0.4, 0.3],
                       [0.4, 0.3, 0.3],
                       [0.2, 0.3, 0.5]])


def make_finite_affine(p0=None, p1=None, label: str = "finite-affine") -> FiniteKernelFamily:
    """Q_u = (1 - u) P0 + u P1, entrywise affine so kappa = 1 exactly."""
    p0 = DEFAULT_P0 if p0 is None else np.asarray(p0, dtype=float)
    p1 = DEFAULT_P1 if p1 is None else np.asarray(p1, dtype=float)
    if p0.shape != p1.shape or p0.shape[0] != p0.shape[1]:
        raise ModelInvalidError("P0 and P1 must be square matrices of equal size")
    holder_l = float(0.5 * np.abs(p1 - p0).sum(axis=1).max())
    return FiniteKernelFamily(
        state_count=p0.shape[0],
        matrix_fn=lambda u: (1.0 - u) * p0 + u * p1,
        holder_L=holder_l, holder_kappa=1.0, label=label)


def make_finite_constant(p, label: str = "finite-constant") -> FiniteKernelFamily:
    p = np.asarray(p, dtype=float)
    return FiniteKernelFamily(state_count=p.shape[0], matrix_fn=lambda u: p,
                              holder_L=0.0, holder_kappa=1.0, label=label)


def _walk_matrix_fn(p_fn, q_fn, r_fn, n_states):
    def matrix_fn(u):
        p, q, r = p_fn(u), q_fn(u), r_fn(u)
        mat = np.zeros((n_states, n_states))
        idx = np.arange(1, n_states)
        mat[idx, idx] = r
        mat[idx[:-1], idx[:-1] + 1] = p
        mat[idx, idx - 1] = q
        mat[0, 0] = 1.0 - p
        mat[0, 1] = p
        return mat

    return matrix_fn


def make_random_walk(p_spec={"poly": [0.15, 0.1]}, q_spec=0.5,
                     r_spec={"poly": [0.35, -0.1]}, truncation_N: int = 80,
                     z: float = 1.3, m: int = 20, epsilon_window: float = 0.05,
                     tail_tolerance: float = 0.3,
                     grid: Optional[np.ndarray] = None):
    """Reflected nearest-neighbour walk plus its geometric drift certificate.

    Returns (family, drift, fns) where fns = (p_fn, q_fn, r_fn). The drift
    function is V(x) = z^x; the top row of the truncated kernel loses its
    up-move mass, hence the generous tail tolerance (the invariant laws put
    only geometrically small mass near the truncation boundary, which the
    V-norm experiments check explicitly).
    """
    p_fn, q_fn, r_fn = (coefficient_fn(s) for s in (p_spec, q_spec, r_spec))
    check_walk_functions(p_fn, q_fn, r_fn)
    grid = uniform_grid(21) if grid is None else np.asarray(grid, dtype=float)
    # one-step drift factor away from 0 and the boundary constant at 0
    gamma_step = max(r_fn(u) + p_fn(u) * z + q_fn(u) / z for u in grid)
    c0 = max(1.0 + p_fn(u) * (z - 1.0) for u in grid)
    if not gamma_step < 1.0:
        raise ModelInvalidError(f"one-step drift factor {gamma_step} >= 1; "
                                "decrease z or strengthen the downward drift")
    k_const = max(gamma_step, c0) + 1e-9
    lambda_ = gamma_step ** m + 1e-9
    b = c0 / (1.0 - gamma_step) + 1e-9
    r_level = 2.4 * b / (1.0 - lambda_)
    n_states = truncation_N + 1
    family = CountableKernelFamily(
        truncation_N=truncation_N,
        matrix_fn=_walk_matrix_fn(p_fn, q_fn, r_fn, n_states),
        tail_tolerance=tail_tolerance,
        holder_L=coefficient_lipschitz(p_spec) + coefficient_lipschitz(q_spec)
        + coefficient_lipschitz(r_spec),
        holder_kappa=1.0, label="random-walk")
    v_vals = z ** np.arange(n_states)
    small = np.nonzero(v_vals <= r_level)[0]
    # minoration constant: worst mass at 0 after m steps from the sublevel
    # set, over corner windows of every grid u
    eta = np.inf
    for u in grid:
        for w in np.unique(np.clip([u - epsilon_window, u, u + epsilon_window],
                                   0.0, 1.0)):
            prod = np.linalg.matrix_power(family.matrix(w), m)
            eta = min(eta, float(prod[small, 0].min()))
    if eta <= 0:
        raise ModelInvalidError("m-step minoration at 0 vanishes on the sublevel set")
    drift = DriftSpec(V=lambda x: float(z ** x), m=m, lambda_=lambda_, b=b,
                      K_const=k_const, eta=0.9 * eta, R=r_level,
                      epsilon_window=epsilon_window,
                      minoration_nu=DiscreteMeasure.point_mass(0.0))
    return family, drift, (p_fn, q_fn, r_fn)


def make_inar1(alpha_spec={"poly": [0.3, 0.2]}, lambda_spec={"poly": [1.0, 1.0]}):
    """tv-INAR(1) coefficient functions; returns (alpha_fns, lambda_fn, q)."""
    alpha_fn = coefficient_fn(alpha_spec)
    lambda_fn = coefficient_fn(lambda_spec)
    check_inar_condition([alpha_fn])
    for u in uniform_grid():
        if lambda_fn(u) < 0:
            raise ModelInvalidError(f"negative innovation mean at u={u}")
    return [alpha_fn], lambda_fn, 1


def make_tv_ar1(a_spec={"poly": [0.5, 0.3]}, sigma_spec=1.0):
    """tv-AR(1) sampler: X_k = a(k/n) X_{k-1} + sigma(k/n) xi_k, xi Gaussian.

    Returns (a_sampler, a_fn, sigma_fn); the sampler consumes the slot-1
    uniform for the innovation (slot 0 is unused, reserved for models with
    random A coefficients so couplings across presets stay aligned).
    """
    a_fn = coefficient_fn(a_spec)
    sigma_fn = coefficient_fn(sigma_spec)
    for u in uniform_grid():
        if abs(a_fn(u)) >= 1:
            raise ModelInvalidError(f"|a({u})| >= 1: recursion not contracting")

    def a_sampler(u, w):
        w = np.asarray(w)
        a = np.full(w.shape[:-1], a_fn(u))
        b = sigma_fn(u) * ndtri(w[..., 1])
        return a, b

    return a_sampler, a_fn, sigma_fn


def make_tv_arch1_squared(a0_spec={"poly": [0.4, 0.2]}, a1_spec={"poly": [0.2, 0.2]}):
    """Squared tv-ARCH(1): Y_k = xi_k^2 (a0(k/n) + a1(k/n) Y_{k-1}).

    Realized as the affine pair A_k = xi_k^2 a1(k/n), B_k = xi_k^2 a0(k/n)
    with the squared Gaussian drawn from the slot-0 uniform.
    """
    a0_fn = coefficient_fn(a0_spec)
    a1_fn = coefficient_fn(a1_spec)
    for u in uniform_grid():
        if a0_fn(u) < 0 or a1_fn(u) < 0:
            raise ModelInvalidError(f"negative ARCH coefficient at u={u}")

    def a_sampler(u, w):
        w = np.asarray(w)
        xi2 = ndtri(w[..., 0]) ** 2
        return xi2 * a1_fn(u), xi2 * a0_fn(u)

    return a_sampler, a0_fn, a1_fn


PRESET_NAMES = ("finite-affine", "random-walk", "inar1", "tv-ar1",
                "tv-arch1-squared")


def preset_summary() -> dict:
    return {
        "finite-affine": "3-state kernels affine in u between two stochastic "
                         "matrices; exact-law experiments",
        "random-walk": "reflected nearest-neighbour walk on {0..N} with "
                       "geometric drift certificate",
        "inar1": "integer-valued AR(1) with Bernoulli thinning and Poisson "
                 "innovations",
        "tv-ar1": "scalar AR(1) with time-varying coefficient and Gaussian noise",
        "tv-arch1-squared": "squared ARCH(1) as a random-coefficient affine "
                            "recursion",
    }
