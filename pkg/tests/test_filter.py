import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from memekf.errors import DimensionMismatch, SingularInnovation
from memekf.filter import (
    FilterConfig,
    FilterState,
    likelihood,
    predict,
    predict_turn_coupled,
    time_update,
    update_scan,
    update_single,
    update_single_diagnostics,
)
from memekf.moments import shape_matrix
from memekf.random_matrix import RMState, rm_likelihood
from memekf.state import DynamicsModel, KinematicState, MeasurementBatch, SensorModel, ShapeState, cv_transition
from strategies import random_spd


def make_cfg(n=4, C_v=np.diag([2.0, 2.0]), A_r=None, Q_r=None, Q_p=None, T=1.0, turn=False):
    dyn = DynamicsModel(
        np.eye(n) if A_r is None else A_r, np.eye(3),
        np.zeros((n, n)) if Q_r is None else Q_r,
        np.zeros((3, 3)) if Q_p is None else Q_p, T, turn,
    )
    return FilterConfig(SensorModel(C_v), dyn)


def make_state(r=(1, 1, 0, 0), C_r=None, p=(0, 2, 12), C_p=None):
    n = len(r)
    C_r = np.diag([1.0, 1.0] + [0.0] * (n - 2)) if C_r is None else C_r
    C_p = np.diag([1.0, 4.0, 9.0]) if C_p is None else C_p
    return FilterState(KinematicState(r, C_r), ShapeState(p, C_p))


def random_case(gen):
    r = np.concatenate([gen.normal(0, 5, 2), gen.normal(0, 1, 2)])
    p = np.array([gen.uniform(-np.pi, np.pi), *gen.uniform(0.5, 20, 2)])
    state = make_state(r, random_spd(gen, 4, 0.01, 20), p, random_spd(gen, 3, 0.01, 5))
    cfg = make_cfg(C_v=random_spd(gen, 2, 0.1, 10))
    y = r[:2] + gen.normal(0, 10, 2)
    return state, cfg, y


def assert_psd(A, tol=1e-9):
    np.testing.assert_array_equal(A, A.T)
    assert np.linalg.eigvalsh(A).min() >= -tol * max(1.0, np.abs(A).max())


def test_zero_kinematic_innovation():
    state, cfg = make_state(), make_cfg()
    post, d = update_single_diagnostics(state, [1.0, 1.0], cfg)
    np.testing.assert_array_equal(post.kin.mean, state.kin.mean)
    assert np.trace(post.kin.cov) < np.trace(state.kin.cov)
    np.testing.assert_array_equal(d.Y, np.zeros(3))
    assert not np.allclose(post.shape.mean, state.shape.mean)


def test_zero_prior_covariance_is_fixed_point():
    state = make_state(C_r=np.zeros((4, 4)), C_p=np.zeros((3, 3)))
    post = update_single(state, [7.0, -3.0], make_cfg())
    np.testing.assert_array_equal(post.kin.mean, state.kin.mean)
    np.testing.assert_array_equal(post.shape.mean, state.shape.mean)
    np.testing.assert_array_equal(post.kin.cov, state.kin.cov)
    np.testing.assert_array_equal(post.shape.cov, state.shape.cov)


def test_diagnostics_expose_consistent_intermediates():
    state, cfg = make_state(), make_cfg()
    _, d = update_single_diagnostics(state, [3.0, -2.0], cfg)
    np.testing.assert_allclose(d.C_y, np.eye(2) + d.C_I + d.C_II + cfg.sensor.meas_noise_cov)
    np.testing.assert_allclose(d.Y_bar, [d.C_y[0, 0], d.C_y[1, 1], d.C_y[0, 1]])
    np.testing.assert_allclose(d.C_pY, state.shape.cov @ d.M.T)
    np.testing.assert_allclose(d.S, shape_matrix(state.shape.mean))
    assert set(d.to_dict()) >= {"S", "J1", "J2", "C_I", "C_II", "M", "y_bar", "C_y", "Y", "Y_bar", "C_Y", "C_pY"}


@given(st.integers(0, 2**32 - 1))
def test_update_keeps_covariances_psd_and_contracting(seed):
    state, cfg, y = random_case(np.random.default_rng(seed))
    post = update_single(state, y, cfg)
    for prior, posterior in ((state.kin.cov, post.kin.cov), (state.shape.cov, post.shape.cov)):
        assert_psd(posterior)
        assert np.linalg.eigvalsh(prior - posterior).min() >= -1e-9 * max(1.0, np.abs(prior).max())


def test_empty_scan_is_identity():
    state = make_state()
    assert update_scan(state, MeasurementBatch(0, np.empty((0, 2))), make_cfg()) is state


def test_single_detection_scan_equals_single_update():
    state, cfg = make_state(), make_cfg()
    a = update_scan(state, MeasurementBatch(0, [[2.0, 5.0]]), cfg)
    b = update_single(state, [2.0, 5.0], cfg)
    np.testing.assert_array_equal(a.shape.mean, b.shape.mean)
    np.testing.assert_array_equal(a.kin.cov, b.kin.cov)


def test_scan_order_matters_only_slightly():
    state, cfg = make_state(), make_cfg()
    det = np.array([[2.0, 5.0], [-1.0, 3.0], [0.5, -6.0]])
    a = update_scan(state, MeasurementBatch(0, det), cfg)
    b = update_scan(state, MeasurementBatch(0, det[::-1]), cfg)
    assert not np.array_equal(a.shape.mean, b.shape.mean)


def test_singular_innovation_is_reported_with_detection_index():
    state = make_state(C_r=np.zeros((4, 4)), p=(0, 1e-9, 1e-9), C_p=np.zeros((3, 3)))
    cfg = make_cfg(C_v=np.ones((2, 2)))
    with pytest.raises(SingularInnovation) as info:
        update_scan(state, MeasurementBatch(0, [[0.0, 0.0]]), cfg)
    assert info.value.which == "C_y"
    assert info.value.detection_index == 0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        update_single(make_state(), [0, 0], make_cfg(n=5))


def test_axis_clamp_is_counted():
    # a far-inside detection with a large prior axis variance drives l1 below zero
    state = make_state(r=(0, 0, 0, 0), C_r=np.zeros((4, 4)), p=(0, 0.05, 5), C_p=np.diag([0.0, 100.0, 0.0]))
    post = update_single(state, [0.0, 0.0], make_cfg(C_v=np.eye(2) * 1e-3))
    assert post.shape.l1 == pytest.approx(1e-4)
    assert post.clamp_events == 1


def _displacements(state, cfg, y, ks=range(1, 7)):
    moves = []
    for k in ks:
        s = 10.0 ** -k
        scaled = FilterState(KinematicState(state.kin.mean, state.kin.cov * s),
                             ShapeState(state.shape.mean, state.shape.cov * s))
        post = update_single(scaled, y, cfg)
        moves.append(np.linalg.norm(post.kin.mean - state.kin.mean) + np.linalg.norm(post.shape.mean - state.shape.mean))
    return moves


@given(st.integers(0, 2**32 - 1))
def test_gain_vanishes_with_prior_covariance(seed):
    moves = _displacements(*random_case(np.random.default_rng(seed)))
    # monotone once the prior no longer dominates the innovation covariance
    assert all(b < a for a, b in zip(moves[1:], moves[2:]))
    # and linear in the prior scale in the limit
    assert all(b <= 0.2 * a for a, b in zip(moves[3:], moves[4:]))


def test_large_prior_step_can_grow_when_prior_shrinks():
    # shrinking a dominant prior also shrinks the expected pseudo-measurement and
    # its covariance, so the first tenfold reduction can enlarge the shape step
    state, cfg, y = random_case(np.random.default_rng(73996))
    moves = _displacements(state, cfg, y, ks=(1, 2))
    assert moves[1] > moves[0]


def test_predict_identity():
    state = make_state()
    post = predict(state, make_cfg())
    np.testing.assert_array_equal(post.kin.mean, state.kin.mean)
    np.testing.assert_array_equal(post.shape.cov, state.shape.cov)
    assert post.time_index == state.time_index + 1


def test_predict_adds_shape_noise_exactly():
    Q_p = np.diag([0.1, 1.0, 1.0])
    state = make_state()
    post = predict(state, make_cfg(Q_p=Q_p))
    np.testing.assert_allclose(post.shape.cov - state.shape.cov, Q_p, rtol=0, atol=1e-15)


def test_predict_cv_shifts_position():
    state = make_state(r=(1, 2, 3, -4))
    post = predict(state, make_cfg(A_r=cv_transition(1.0)))
    np.testing.assert_array_equal(post.kin.mean, [4, -2, 3, -4])


def turn_case(omega, var_omega=0.001, Q_p=np.diag([0.01, 1.0, 1.0])):
    C_r = np.diag([1.0, 1.0, 1.0, 1.0, var_omega])
    state = make_state(r=(0, 0, 10, 0, omega), C_r=C_r, p=(0.2, 5, 2), C_p=np.diag([0.1, 1.0, 1.0]))
    return state, make_cfg(n=5, Q_p=Q_p, turn=True)


def test_turn_coupled_without_turn_matches_linear_shape_predict():
    state, cfg = turn_case(0.0, var_omega=0.0)
    a = predict_turn_coupled(state, cfg)
    np.testing.assert_array_equal(a.shape.mean, state.shape.mean)
    np.testing.assert_allclose(a.shape.cov, state.shape.cov + cfg.dynamics.Q_p)
    np.testing.assert_allclose(a.kin.mean, [10, 0, 10, 0, 0])


def test_turn_coupled_advances_orientation():
    state, cfg = turn_case(0.1)
    post = predict_turn_coupled(state, cfg)
    assert post.shape.alpha == pytest.approx(0.3)
    assert post.shape.cov[0, 0] - state.shape.cov[0, 0] == pytest.approx(0.001 + 0.01)
    assert time_update(state, cfg).shape.alpha == post.shape.alpha


def test_turn_coupled_needs_turn_rate():
    with pytest.raises(DimensionMismatch):
        predict_turn_coupled(make_state(), make_cfg())


def test_likelihood_peak_and_normalization():
    state, cfg = make_state(p=(0.5, 2, 4)), make_cfg()
    S = shape_matrix(state.shape.mean)
    cov = S @ S.T / 4 + cfg.sensor.meas_noise_cov
    assert likelihood(state, [1, 1], cfg) == pytest.approx(1 / (2 * np.pi * np.sqrt(np.linalg.det(cov))), rel=1e-12)
    g = np.linspace(-14, 16, 241)
    X, Y = np.meshgrid(g, g)
    dens = np.array([likelihood(state, (x, y), cfg) for x, y in zip(X.ravel(), Y.ravel())])
    assert dens.sum() * (g[1] - g[0]) ** 2 == pytest.approx(1.0, abs=1e-6)


@given(st.integers(0, 2**32 - 1))
def test_likelihood_equals_random_matrix_form(seed):
    gen = np.random.default_rng(seed)
    state, cfg, _ = random_case(gen)
    S = shape_matrix(state.shape.mean)
    y = gen.multivariate_normal(state.kin.mean[:2], S @ S.T / 4 + cfg.sensor.meas_noise_cov)
    rm = RMState.from_extent(state.kin, S @ S.T, v=56.0, z=4.0)
    a = likelihood(state, y, cfg)
    b = rm_likelihood(rm, y, cfg.sensor.meas_noise_cov)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_stationary_prior_converges_toward_truth():
    gen = np.random.default_rng(5)
    S_true = shape_matrix([np.pi / 3, 2, 9])
    cfg = make_cfg()
    state = make_state()
    for _ in range(100):
        u = gen.uniform(-1, 1, 2)
        while u @ u > 1:
            u = gen.uniform(-1, 1, 2)
        state = update_single(state, S_true @ u + gen.multivariate_normal([0, 0], cfg.sensor.meas_noise_cov), cfg)
    S = shape_matrix(state.shape.mean)
    prior = shape_matrix([0, 2, 12])
    truth_ext = S_true @ S_true.T
    assert np.linalg.norm(S @ S.T - truth_ext) < 0.5 * np.linalg.norm(prior @ prior.T - truth_ext)
