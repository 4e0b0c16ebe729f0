import numpy as np
import pytest

from auctrack.dynamics import (
    build_motion_model,
    reverse_velocity,
    sample_initial,
    step,
    step_many,
)


def test_transition_and_noise_shapes():
    m = build_motion_model(1.25, 2.5e-3)
    expected_f = np.eye(4)
    expected_f[0, 2] = expected_f[1, 3] = 1.25
    assert np.array_equal(m.F, expected_f)
    # direct evaluation of the white-acceleration covariance at these params
    assert m.Q[0, 0] == pytest.approx(1.6276e-3, abs=5e-8)
    assert m.Q[2, 2] == pytest.approx(2.5e-3 * 1.25)
    assert np.allclose(m.Q, m.Q.T)


def test_zero_noise_model():
    m = build_motion_model(1.0, 0.0)
    assert np.array_equal(m.Q, np.zeros((4, 4)))
    assert m.F[0, 2] == 1.0 and m.F[1, 3] == 1.0


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        build_motion_model(0.0, 1e-3)
    with pytest.raises(ValueError):
        build_motion_model(-1.0, 1e-3)
    with pytest.raises(ValueError):
        build_motion_model(1.0, -1e-3)


def test_noiseless_step_is_linear_propagation():
    m = build_motion_model(1.25, 0.0)
    rng = np.random.default_rng(0)
    out = step(m, np.array([0.0, 0.0, 1.0, 1.0]), rng)
    assert np.allclose(out, [1.25, 1.25, 1.0, 1.0])
    fixed = step(m, np.array([5.0, 5.0, 0.0, 0.0]), rng)
    assert np.allclose(fixed, [5.0, 5.0, 0.0, 0.0])


def test_process_noise_covariance_matches_model():
    m = build_motion_model(1.25, 2.5e-3)
    rng = np.random.default_rng(42)
    s = np.array([1.0, 2.0, 0.5, -0.5])
    samples = step_many(m, np.tile(s, (100_000, 1)), rng) - m.F @ s
    emp = np.cov(samples.T, bias=True)
    scale = np.abs(m.Q).max()
    for i in range(4):
        for j in range(4):
            if m.Q[i, j] != 0.0:
                assert emp[i, j] == pytest.approx(m.Q[i, j], rel=0.05)
            else:
                assert abs(emp[i, j]) < 0.05 * scale


def test_q_positive_semidefinite_across_parameters():
    for d in (0.1, 0.5, 1.0, 1.25, 3.0):
        for tau in (0.0, 1e-4, 2.5e-3, 1.0):
            m = build_motion_model(d, tau)
            eigs = np.linalg.eigvalsh(m.Q)
            assert eigs.min() >= -1e-12 * max(1.0, eigs.max())


def test_sample_initial_zero_cov_returns_mean():
    rng = np.random.default_rng(0)
    mean = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.array_equal(sample_initial(mean, np.zeros((4, 4)), rng), mean)


def test_sample_initial_moments():
    rng = np.random.default_rng(7)
    mean = np.array([-23.0, -23.0, 2.0, 2.0])
    sig = 2.0 / 3.0
    cov = np.diag([sig**2, sig**2, 0.01, 0.01])
    draws = sample_initial(mean, cov, rng, size=100_000)
    se = np.sqrt(np.diag(cov) / draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0) - mean) < 3 * se)
    assert np.allclose(draws.var(axis=0), np.diag(cov), rtol=0.05)


def test_sample_initial_rejects_bad_covariance():
    rng = np.random.default_rng(0)
    bad = np.diag([1.0, 1.0, 1.0, -1.0])
    with pytest.raises(ValueError):
        sample_initial(np.zeros(4), bad, rng)
    asym = np.zeros((4, 4))
    asym[0, 1] = 1.0
    with pytest.raises(ValueError):
        sample_initial(np.zeros(4), asym, rng)


def test_reverse_velocity_retraces_noiseless_path():
    m = build_motion_model(1.0, 0.0)
    rng = np.random.default_rng(0)
    s = np.array([-10.0, -11.0, 2.0, 2.0])
    start = s.copy()
    for _ in range(10):
        s = step(m, s, rng)
    s = reverse_velocity(s)
    for _ in range(10):
        s = step(m, s, rng)
    assert np.allclose(s[:2], start[:2])
    assert np.allclose(s[2:], -start[2:])
