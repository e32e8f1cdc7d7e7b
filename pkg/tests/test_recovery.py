import numpy as np
import pytest

from kspace_select.errors import DivergenceError, SizingError
from kspace_select.masks import FreqMask, SparseSupport, random_lowfreq_mask
from kspace_select.recovery import RecoveryConfig, SensingOperator, hard_threshold, iht, lcamp
from kspace_select.transforms import idwt2


@pytest.fixture
def rng():
    return np.random.default_rng(11)


def _sparse(rng, shape, n):
    y = np.zeros(shape)
    y.flat[rng.choice(int(np.prod(shape)), n, replace=False)] = rng.choice([-1.0, 1.0], n)
    return y


def test_hard_threshold_examples():
    np.testing.assert_array_equal(hard_threshold(np.array([3.0, -5.0, 1.0, 0.0]), 2), [3, -5, 0, 0])
    z = np.arange(16.0).reshape(4, 4) - 7
    np.testing.assert_array_equal(hard_threshold(z, 16), z)
    assert not np.any(hard_threshold(z, 0))
    # |-1| ties with |1|: the lower index survives
    np.testing.assert_array_equal(hard_threshold(np.array([0.5, -1.0, 1.0]), 1), [0, -1, 0])
    with pytest.raises(SizingError):
        hard_threshold(z, 17)


def test_adjoint_consistency(rng):
    for seed in range(100):
        mask = random_lowfreq_mask((16, 16), 100, seed=seed)
        A = SensingOperator(mask)
        y = rng.standard_normal((16, 16))
        f = rng.standard_normal(100) + 1j * rng.standard_normal(100)
        lhs = np.vdot(f, A.forward(y)).real
        rhs = np.vdot(A.adjoint(f), y).real
        assert lhs == pytest.approx(rhs, abs=1e-10 * max(1.0, abs(lhs)))


def test_forward_of_image_pyramid_equals_measurement(rng):
    A = SensingOperator(random_lowfreq_mask((16, 16), 50, seed=2))
    y = rng.standard_normal((16, 16))
    np.testing.assert_allclose(A.forward(y), A.measure(idwt2(y)), atol=1e-12)


def test_iht_full_mask_recovers_in_one_iteration(rng):
    y = _sparse(rng, (16, 16), 6)
    A = SensingOperator(FreqMask((16, 16), np.arange(256)))
    history = []
    out = iht(A, A.forward(y), RecoveryConfig(n=6), history)
    np.testing.assert_allclose(history[0], y, atol=1e-12)
    np.testing.assert_allclose(out, y, atol=1e-12)


def test_iht_zero_measurements_stay_zero():
    A = SensingOperator(random_lowfreq_mask((16, 16), 60, seed=0))
    history = []
    out = iht(A, np.zeros(60, dtype=complex), RecoveryConfig(max_iters=5, n=4), history)
    assert not np.any(out) and all(not np.any(h) for h in history)


def test_iht_iterates_are_n_sparse(rng):
    y = _sparse(rng, (16, 16), 8)
    A = SensingOperator(random_lowfreq_mask((16, 16), 90, seed=1))
    history = []
    iht(A, A.forward(y), RecoveryConfig(max_iters=30, n=8), history)
    assert all(np.count_nonzero(h) <= 8 for h in history)
    assert np.count_nonzero(history[-1]) == 8


def test_iht_recovers_sparse_signal(rng):
    y = _sparse(rng, (16, 16), 5)
    A = SensingOperator(random_lowfreq_mask((16, 16), 128, seed=0))
    out = iht(A, A.forward(y), RecoveryConfig(max_iters=100, rel_tol=1e-12, n=5))
    assert np.abs(out - y).max() < 1e-6


def test_iht_needs_sparsity_and_right_length():
    A = SensingOperator(random_lowfreq_mask((8, 8), 10, seed=0))
    with pytest.raises(ValueError):
        iht(A, np.zeros(10), RecoveryConfig())
    with pytest.raises(SizingError):
        iht(A, np.zeros(9), RecoveryConfig(n=2))


def test_lcamp_zero_measurements_stay_zero():
    A = SensingOperator(random_lowfreq_mask((16, 16), 60, seed=0))
    M = SparseSupport((16, 16), np.arange(10))
    history = []
    out = lcamp(A, np.zeros(60, dtype=complex), M, RecoveryConfig(max_iters=5), history)
    assert not np.any(out) and all(not np.any(h) for h in history)


def test_lcamp_exact_support_full_mask_first_iterate(rng):
    y = _sparse(rng, (16, 16), 9)
    M = SparseSupport((16, 16), np.flatnonzero(y))
    A = SensingOperator(FreqMask((16, 16), np.arange(256)))
    history = []
    lcamp(A, A.forward(y), M, RecoveryConfig(max_iters=3), history)
    np.testing.assert_allclose(history[0], y, atol=1e-12)


def test_lcamp_measurement_start_scales_first_residual(rng):
    y = _sparse(rng, (16, 16), 9)
    M = SparseSupport((16, 16), np.flatnonzero(y))
    A = SensingOperator(FreqMask((16, 16), np.arange(256)))
    history = []
    lcamp(A, A.forward(y), M, RecoveryConfig(max_iters=1, lcamp_r0="measurements"), history)
    # r_1 = f + rho c f with rho c = |M| / m
    np.testing.assert_allclose(history[0], (1 + 9 / 256) * y, atol=1e-12)


def test_lcamp_iterates_stay_in_location_mask(rng):
    y = _sparse(rng, (16, 16), 6)
    M = SparseSupport((16, 16), rng.choice(256, 30, replace=False))
    A = SensingOperator(random_lowfreq_mask((16, 16), 100, seed=5))
    history = []
    lcamp(A, A.forward(y), M, RecoveryConfig(max_iters=20), history)
    for h in history:
        assert not np.any(h[~M.mask])


def test_recovery_is_deterministic(rng):
    y = _sparse(rng, (16, 16), 6)
    A = SensingOperator(random_lowfreq_mask((16, 16), 100, seed=5))
    M = SparseSupport((16, 16), np.flatnonzero(y))
    cfg = RecoveryConfig(max_iters=20, n=6)
    np.testing.assert_array_equal(iht(A, A.forward(y), cfg), iht(A, A.forward(y), cfg))
    np.testing.assert_array_equal(lcamp(A, A.forward(y), M, cfg), lcamp(A, A.forward(y), M, cfg))


def test_divergence_guard(rng):
    # a huge Onsager factor (dense location mask, few measurements) blows the residual up
    A = SensingOperator(random_lowfreq_mask((16, 16), 8, seed=0))
    M = SparseSupport((16, 16), np.arange(256))
    f = A.measure(rng.standard_normal((16, 16)))
    with pytest.raises(DivergenceError):
        lcamp(A, f, M, RecoveryConfig(max_iters=100))


def test_config_validation():
    with pytest.raises(ValueError):
        RecoveryConfig(max_iters=0)
    with pytest.raises(ValueError):
        RecoveryConfig(rel_tol=0)
