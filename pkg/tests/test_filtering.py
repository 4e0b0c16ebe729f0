import numpy as np
import pytest
from scipy.stats import norm

from auctrack.dynamics import build_motion_model
from auctrack.filtering import (
    ParticleCloud,
    estimate,
    initial_cloud,
    predict,
    resample,
    reverse_cloud_velocity,
    update_weights,
)
from auctrack.sensing import SignalModel, amplitude, build_quantizer, quantize

SIGNAL = SignalModel(p0=1000.0, sigma=1.0)


def uniform_cloud(states):
    states = np.asarray(states, dtype=float)
    return ParticleCloud(states, np.full(states.shape[0], 1.0 / states.shape[0]))


class TestCloudInvariants:
    def test_weights_must_normalize(self):
        with pytest.raises(ValueError):
            ParticleCloud(np.zeros((2, 4)), np.array([0.4, 0.4]))

    def test_needs_particles(self):
        with pytest.raises(ValueError):
            ParticleCloud(np.zeros((0, 4)), np.zeros(0))

    def test_initial_cloud_moments(self):
        rng = np.random.default_rng(0)
        mean = np.array([1.0, -1.0, 2.0, 0.5])
        cov = np.diag([0.4, 0.4, 0.01, 0.01])
        cloud = initial_cloud(mean, cov, 50_000, rng)
        assert cloud.weights.sum() == pytest.approx(1.0)
        assert np.allclose(estimate(cloud), mean, atol=0.02)


class TestPredict:
    def test_noiseless_is_exact_linear_map(self):
        model = build_motion_model(1.25, 0.0)
        rng = np.random.default_rng(0)
        states = np.array([[0.0, 0.0, 1.0, 1.0], [5.0, 5.0, 0.0, 0.0]])
        cloud = ParticleCloud(states, np.array([0.25, 0.75]))
        out = predict(model, cloud, rng)
        assert np.allclose(out.states, states @ model.F.T)
        assert np.array_equal(out.weights, cloud.weights)

    def test_mean_advances_by_transition(self):
        model = build_motion_model(1.0, 2.5e-3)
        rng = np.random.default_rng(1)
        mean = np.array([2.0, -3.0, 1.0, 0.5])
        cloud = initial_cloud(mean, np.eye(4) * 0.1, 100_000, rng)
        out = predict(model, cloud, rng)
        assert np.allclose(estimate(out), model.F @ estimate(cloud), rtol=0.01, atol=0.01)

    def test_reverse_cloud_velocity(self):
        cloud = uniform_cloud([[1.0, 2.0, 3.0, -4.0]])
        flipped = reverse_cloud_velocity(cloud)
        assert np.allclose(flipped.states[0], [1.0, 2.0, -3.0, 4.0])


class TestUpdateWeights:
    def test_no_readings_keeps_weights(self):
        cloud = uniform_cloud(np.random.default_rng(0).normal(size=(10, 4)))
        out, degenerate = update_weights(cloud, SIGNAL, [])
        assert not degenerate
        assert np.array_equal(out.weights, cloud.weights)

    def test_two_particles_direct_bayes(self):
        # equal priors with likelihoods (p1, p2) must renormalize to
        # (p1, p2) / (p1 + p2); likelihoods computed independently via scipy
        q = build_quantizer(1, SIGNAL, strategy=lambda b, s: [norm.ppf(0.8)])
        states = np.array([[0.0, 0.0, 0, 0], [np.sqrt(SIGNAL.p0 - 1.0), 0.0, 0, 0]])
        cloud = uniform_cloud(states)
        sensor_pos = (0.0, 0.0)
        amps = [amplitude(SIGNAL, sensor_pos, s) for s in states]
        p = [1.0 - norm.cdf(q.thresholds[0] - a) for a in amps]
        out, degenerate = update_weights(cloud, SIGNAL, [(q, sensor_pos, 1)])
        expected = np.array(p) / np.sum(p)
        assert not degenerate
        assert np.allclose(out.weights, expected, rtol=1e-10)

    def test_matches_exhaustive_grid_bayes(self):
        # coarse grid of candidate positions, one sensor, exact Bayes oracle
        q = build_quantizer(2, SIGNAL)
        xs = np.linspace(-10, 10, 21)
        ys = np.linspace(-10, 10, 21)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        states = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(gx.size), np.zeros(gx.size)])
        cloud = uniform_cloud(states)
        sensor_pos = (2.5, -1.0)
        level = 2
        out, _ = update_weights(cloud, SIGNAL, [(q, sensor_pos, level)])
        post_mean = estimate(out)

        # oracle: exhaustive Bayes over the same grid via scipy only
        t = q.thresholds
        lik = np.zeros(states.shape[0])
        for i, s in enumerate(states):
            a = np.sqrt(SIGNAL.p0 / (1.0 + (sensor_pos[0] - s[0]) ** 2 + (sensor_pos[1] - s[1]) ** 2))
            hi = norm.cdf(t[level] - a) if level < t.size else 1.0
            lo = norm.cdf(t[level - 1] - a) if level > 0 else 0.0
            lik[i] = max(hi - lo, 0.0)
        post = lik / lik.sum()
        oracle_mean = post @ states
        scale = np.abs(oracle_mean[:2]).max()
        assert np.allclose(post_mean[:2], oracle_mean[:2], atol=0.02 * max(scale, 1.0))
        assert np.allclose(out.weights, post, atol=1e-12)

    def test_information_free_observation_flags_degeneracy(self):
        # a reading that is impossible for every particle: level far beyond
        # anything the cloud could produce with sigma this small
        tight = SignalModel(p0=1000.0, sigma=1e-3)
        q = build_quantizer(3, tight)
        states = np.tile([200.0, 200.0, 0.0, 0.0], (50, 1))  # amplitude ~ 0.11
        cloud = uniform_cloud(states)
        out, degenerate = update_weights(cloud, tight, [(q, (0.0, 0.0), 7)])
        assert degenerate
        assert np.allclose(out.weights, 1.0 / 50)


class TestEstimate:
    def test_symmetric_two_particle_midpoint(self):
        cloud = ParticleCloud(
            np.array([[0.0, 0.0, 0, 0], [2.0, 4.0, 0, 0]]), np.array([0.5, 0.5])
        )
        assert np.allclose(estimate(cloud), [1.0, 2.0, 0.0, 0.0])

    def test_uniform_weights_arithmetic_mean(self):
        rng = np.random.default_rng(3)
        states = rng.normal(size=(100, 4))
        assert np.allclose(estimate(uniform_cloud(states)), states.mean(axis=0))

    def test_weighted_mean_oracle(self):
        rng = np.random.default_rng(4)
        states = rng.normal(size=(50, 4))
        w = rng.random(50)
        w /= w.sum()
        cloud = ParticleCloud(states, w)
        ref = sum(w[i] * states[i] for i in range(50))
        assert np.allclose(estimate(cloud), ref)


class TestResample:
    def test_output_weights_uniform(self):
        rng = np.random.default_rng(5)
        states = rng.normal(size=(64, 4))
        w = rng.random(64)
        w /= w.sum()
        out = resample(ParticleCloud(states, w), rng)
        assert np.allclose(out.weights, 1.0 / 64)
        assert out.size == 64

    def test_uniform_weights_chi_square(self):
        # resampled counts from a uniform cloud look multinomial-uniform
        rng = np.random.default_rng(6)
        n = 200
        states = np.arange(n, dtype=float).reshape(-1, 1) * np.array([[1.0, 0, 0, 0]])
        cloud = uniform_cloud(states)
        counts = np.zeros(n)
        reps = 500
        for _ in range(reps):
            out = resample(cloud, rng)
            idx = out.states[:, 0].astype(int)
            counts += np.bincount(idx, minlength=n)
        expected = reps  # each particle expected once per pass
        chi2 = np.sum((counts - expected) ** 2 / expected)
        # systematic resampling has sub-multinomial variance; bound loosely
        assert chi2 < 1.5 * n

    def test_dominant_weight_duplicates(self):
        rng = np.random.default_rng(7)
        states = np.arange(40, dtype=float).reshape(-1, 1) * np.array([[1.0, 0, 0, 0]])
        w = np.full(40, 1e-6)
        w[13] = 1.0 - w.sum() + 1e-6
        out = resample(ParticleCloud(states, w / w.sum()), rng)
        assert np.mean(out.states[:, 0] == 13.0) > 0.95

    def test_preserves_mean_in_expectation(self):
        rng = np.random.default_rng(8)
        states = rng.normal(size=(5000, 4))
        w = rng.random(5000)
        w /= w.sum()
        cloud = ParticleCloud(states, w)
        target = estimate(cloud)
        means = np.array([estimate(resample(cloud, rng)) for _ in range(200)])
        assert np.allclose(means.mean(axis=0), target, atol=0.01 * max(1.0, np.abs(target).max()))


def test_prediction_only_spreads_monotonically():
    # with zero bandwidth the filter never updates; spread grows every step
    model = build_motion_model(1.0, 2.5e-3)
    rng = np.random.default_rng(9)
    cloud = initial_cloud(np.zeros(4), np.diag([0.4, 0.4, 0.01, 0.01]), 20_000, rng)
    traces = []
    for _ in range(12):
        cloud = predict(model, cloud, rng)
        cov = np.cov(cloud.states.T, aweights=cloud.weights)
        traces.append(np.trace(cov))
    assert all(a < b for a, b in zip(traces, traces[1:]))


def test_update_weight_normalization_invariant():
    rng = np.random.default_rng(10)
    q = build_quantizer(3, SIGNAL)
    states = rng.uniform(-20, 20, (500, 4))
    cloud = uniform_cloud(states)
    for level in (0, 3, 7):
        out, _ = update_weights(cloud, SIGNAL, [(q, (1.0, 1.0), level)])
        assert abs(out.weights.sum() - 1.0) < 1e-9
