import numpy as np
import pytest

from tvmarkov.errors import (CertificateNotFoundError, ModelInvalidError,
                             NonErgodicError, TruncationError)
from tvmarkov.kernels import (CountableKernelFamily, DriftSpec, FiniteKernelFamily,
                              dobrushin_tv, dobrushin_vnorm, doeblin_certificate,
                              finite_dim_law, finite_dim_law_inhom, frozen_laws,
                              holder_invariant_bound, inhomogeneous_product,
                              marginal_law, marginal_laws, mouli_certificate,
                              stationary_distribution, transition_matrix,
                              tv_envelope, verify_f1)
from tvmarkov.measures import DiscreteMeasure
from tvmarkov.metrics import tv_distance
from tvmarkov.presets import make_finite_affine, make_finite_constant, make_random_walk

P_ASYM = np.array([[0.7, 0.3], [0.4, 0.6]])


def affine_2state():
    return FiniteKernelFamily(
        state_count=2,
        matrix_fn=lambda u: np.array([[0.6 + 0.2 * u, 0.4 - 0.2 * u], [0.3, 0.7]]),
        holder_L=0.2, holder_kappa=1.0, label="affine-2")


class TestTransitionMatrix:
    def test_constant_family(self):
        fam = make_finite_constant(P_ASYM)
        assert np.array_equal(transition_matrix(fam, 0.3), P_ASYM)

    def test_negative_u_clamps_to_zero(self):
        fam = affine_2state()
        assert np.array_equal(transition_matrix(fam, -0.2),
                              transition_matrix(fam, 0.0))

    def test_affine_entry_evaluation(self):
        fam = affine_2state()
        assert np.allclose(transition_matrix(fam, 0.5),
                           [[0.7, 0.3], [0.3, 0.7]])

    def test_u_above_one_rejected(self):
        with pytest.raises(ValueError):
            transition_matrix(affine_2state(), 1.5)

    def test_holder_grid_validation(self):
        affine_2state().validate_on_grid()
        bad = FiniteKernelFamily(
            state_count=2,
            matrix_fn=lambda u: np.array([[0.6 + 0.2 * u, 0.4 - 0.2 * u], [0.3, 0.7]]),
            holder_L=0.01, holder_kappa=1.0)
        with pytest.raises(ValueError):
            bad.validate_on_grid()


class TestStationaryDistribution:
    def test_symmetric(self):
        pi = stationary_distribution(np.array([[0.5, 0.5], [0.5, 0.5]]))
        assert np.allclose(pi.weights, [0.5, 0.5])

    def test_asymmetric_known_solution(self):
        pi = stationary_distribution(P_ASYM)
        assert np.allclose(pi.weights, [4 / 7, 3 / 7], atol=1e-12)

    def test_identity_non_ergodic(self):
        with pytest.raises(NonErgodicError):
            stationary_distribution(np.eye(3))

    def test_fixed_point_under_repeated_multiplication(self):
        rng = np.random.default_rng(0)
        p = rng.random((4, 4)) + 0.05
        p /= p.sum(axis=1, keepdims=True)
        pi = stationary_distribution(p).weights
        v = pi.copy()
        for _ in range(10):
            v = v @ p
            assert np.abs(v - pi).sum() < 1e-10


class TestProductsAndLaws:
    def test_constant_family_power(self):
        fam = make_finite_constant(P_ASYM)
        assert np.allclose(inhomogeneous_product(fam, 10, 3, 5),
                           np.linalg.matrix_power(P_ASYM, 3))

    def test_single_factor(self):
        fam = affine_2state()
        assert np.allclose(inhomogeneous_product(fam, 10, 4, 4),
                           transition_matrix(fam, 0.4))

    def test_prehistory_uses_q0(self):
        fam = affine_2state()
        assert np.allclose(inhomogeneous_product(fam, 10, -3, 0),
                           np.linalg.matrix_power(transition_matrix(fam, 0.0), 4))

    def test_marginal_constant_family(self):
        fam = make_finite_constant(P_ASYM)
        for k in (0, 5, 50):
            assert np.allclose(marginal_law(fam, 100, k).weights, [4 / 7, 3 / 7])

    def test_marginal_prehistory_convention(self):
        fam = affine_2state()
        pi0 = stationary_distribution(transition_matrix(fam, 0.0)).weights
        assert np.allclose(marginal_law(fam, 100, 0).weights, pi0)
        assert np.allclose(marginal_law(fam, 100, -7).weights, pi0)

    def test_marginal_laws_match_single_calls(self):
        fam = affine_2state()
        pis = marginal_laws(fam, 20)
        for k in (0, 7, 20):
            assert np.allclose(pis[k], marginal_law(fam, 20, k).weights)

    def test_finite_dim_law_two_steps(self):
        fam = make_finite_constant([[0.75, 0.25], [0.25, 0.75]])
        law = finite_dim_law(fam, 0.0, 2)
        assert law.weights[0, 0] == pytest.approx(0.375)

    def test_finite_dim_marginalization_consistency(self):
        fam = affine_2state()
        three = finite_dim_law(fam, 0.4, 3)
        two = finite_dim_law(fam, 0.4, 2)
        assert np.allclose(three.marginalize_last().weights, two.weights)

    def test_inhom_law_chains_correct_kernels(self):
        fam = affine_2state()
        law = finite_dim_law_inhom(fam, 10, 3, 2)
        pi3 = marginal_law(fam, 10, 3).weights
        expected = pi3[:, None] * transition_matrix(fam, 0.4)
        assert np.allclose(law.weights, expected)


class TestDobrushin:
    def test_rank_one_kernel(self):
        assert dobrushin_tv(np.tile([0.3, 0.7], (2, 1))) == 0.0

    def test_identity(self):
        assert dobrushin_tv(np.eye(4)) == 1.0

    def test_two_state_pair(self):
        assert dobrushin_tv(np.array([[0.9, 0.1], [0.2, 0.8]])) == pytest.approx(0.7)

    def test_submultiplicative_on_random_pairs(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            s = rng.integers(2, 7)
            p = rng.random((s, s)) ** 3 + 1e-6
            q = rng.random((s, s)) ** 3 + 1e-6
            p /= p.sum(axis=1, keepdims=True)
            q /= q.sum(axis=1, keepdims=True)
            assert dobrushin_tv(p @ q) <= dobrushin_tv(p) * dobrushin_tv(q) + 1e-12


class TestDoeblin:
    def test_uniform_kernel(self):
        fam = make_finite_constant([[0.5, 0.5], [0.5, 0.5]])
        m, eps, r = doeblin_certificate(fam, m=1)
        assert (m, eps, r) == (1, pytest.approx(1.0), pytest.approx(0.0))

    def test_identity_has_no_certificate(self):
        fam = FiniteKernelFamily(state_count=2, matrix_fn=lambda u: np.eye(2))
        with pytest.raises(CertificateNotFoundError):
            doeblin_certificate(fam, m=1, m_cap=6)

    def test_entrywise_floor(self):
        fam = make_finite_constant([[0.9, 0.1], [0.1, 0.9]])
        _, eps, _ = doeblin_certificate(fam, m=1)
        assert eps >= 0.2 - 1e-12

    def test_searches_larger_m(self):
        # one zero entry at m=1, strictly positive at m=2
        p = np.array([[0.0, 1.0], [0.5, 0.5]])
        fam = make_finite_constant(p)
        m, eps, _ = doeblin_certificate(fam, m=1)
        assert m == 2 and eps > 0


class TestHolderContinuity:
    def test_invariant_law_lipschitz_bound(self):
        fam = make_finite_affine()
        m, eps, r = doeblin_certificate(fam)
        c = holder_invariant_bound(m, fam.holder_L, r)
        grid = np.linspace(0, 1, 201)
        laws = frozen_laws(fam, grid)
        for i in range(len(grid)):
            for j in range(i + 1, len(grid)):
                gap = 0.5 * np.abs(laws[i] - laws[j]).sum()
                assert gap <= c * abs(grid[i] - grid[j]) + 1e-12


class TestEnvelope:
    def test_dominates_exact_gap(self):
        fam = make_finite_affine()
        m, eps, r = doeblin_certificate(fam)
        n = 150
        pis = marginal_laws(fam, n)
        frozen = frozen_laws(fam, np.arange(n + 1) / n)
        for k in range(n + 1):
            exact = 0.5 * np.abs(pis[k] - frozen[k]).sum()
            assert exact <= tv_envelope(fam, n, k, k / n, m, r) + 1e-12

    def test_joint_law_bound_j_up_to_three(self):
        # inhomogeneous j-dimensional law vs the frozen one, crude constant
        fam = make_finite_affine()
        m, eps, r = doeblin_certificate(fam)
        n, k = 200, 100
        u = k / n
        for j in (1, 2, 3):
            inhom = finite_dim_law_inhom(fam, n, k, j).weights
            frozen = finite_dim_law(fam, u, j).weights
            gap = 0.5 * np.abs(inhom - frozen).sum()
            extra = fam.holder_L * sum(abs(u - (k + t) / n) for t in range(j))
            assert gap <= tv_envelope(fam, n, k, u, m, r) + extra + 1e-12


class TestCountableFamily:
    def test_truncation_error_when_tail_too_fat(self):
        fam, _, _ = make_random_walk()
        tight = CountableKernelFamily(truncation_N=80,
                                      matrix_fn=fam._matrix_fn,
                                      tail_tolerance=1e-10)
        with pytest.raises(TruncationError):
            tight.matrix(0.5)

    def test_rows_renormalized(self):
        fam, _, _ = make_random_walk()
        mat = fam.matrix(0.3)
        assert np.allclose(mat.sum(axis=1), 1.0, atol=1e-12)


def v_one_drift():
    return DriftSpec(V=lambda x: 1.0, m=1, lambda_=0.5, b=1.0, K_const=1.0,
                     eta=0.25, R=5.0, epsilon_window=0.05,
                     minoration_nu=DiscreteMeasure.point_mass(0.0))


class TestVnormCoefficient:
    def test_reduces_to_tv_for_flat_v(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            p = rng.random((3, 3)) + 0.05
            p /= p.sum(axis=1, keepdims=True)
            assert dobrushin_vnorm(p, v_one_drift(), 1.0) == pytest.approx(
                dobrushin_tv(p), abs=1e-12)

    def test_rank_one_is_zero(self):
        p = np.tile([0.2, 0.3, 0.5], (3, 1))
        fam, drift, _ = make_random_walk()
        flat = v_one_drift()
        assert dobrushin_vnorm(p, flat, 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_delta_range(self):
        with pytest.raises(ValueError):
            dobrushin_vnorm(P_ASYM, v_one_drift(), 0.0)


class TestMouliCertificate:
    def test_walk_certificate(self):
        fam, drift, _ = make_random_walk()
        gamma, delta = mouli_certificate(fam, drift)
        assert 0 < gamma < 1
        assert 0 < delta <= 1
        # the certified gamma really bounds the m-fold window coefficient
        prod = np.linalg.matrix_power(fam.matrix(0.5), drift.m)
        assert dobrushin_vnorm(prod, drift, delta) <= gamma + 1e-12

    def test_zero_eta_rejected(self):
        fam, drift, _ = make_random_walk()
        bad = DriftSpec(V=drift.V, m=drift.m, lambda_=drift.lambda_, b=drift.b,
                        K_const=drift.K_const, eta=0.0, R=drift.R,
                        epsilon_window=drift.epsilon_window,
                        minoration_nu=drift.minoration_nu)
        with pytest.raises(ModelInvalidError):
            verify_f1(fam, bad)

    def test_flat_v_reduces_to_tv_contraction(self):
        fam = make_finite_constant([[0.6, 0.4], [0.3, 0.7]])
        gamma, delta = mouli_certificate(fam, v_one_drift())
        assert gamma <= dobrushin_tv(fam.matrix(0.0)) + 1e-9
