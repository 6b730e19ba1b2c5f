import math

import numpy as np
import pytest

from conftest import central_difference, max_relative_error, min_abs_preactivation
from parksac.nets import (
    LOG_STD_MAX,
    LOG_STD_MIN,
    AdamState,
    GaussianPolicy,
    Mlp,
    TwinCritic,
    adam_step,
    copy_params,
    polyak_update,
)


def rng_for(seed):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------- forward


def test_forward_zero_weights_gives_zero():
    net = Mlp([3, 4, 2], rng_for(0))
    for p in net.params:
        p[...] = 0.0
    out = net.forward(np.ones((5, 3)))
    assert np.array_equal(out, np.zeros((5, 2)))


def test_forward_hand_composition():
    # 1-1-1 net, w=[[2]], b=[1] each layer: relu(2*1+1)=3 -> 2*3+1=7
    net = Mlp([1, 1, 1], rng_for(0))
    for i in range(2):
        net.params[2 * i][...] = 2.0
        net.params[2 * i + 1][...] = 1.0
    out = net.forward(np.array([[1.0]]))
    assert out[0, 0] == pytest.approx(7.0)


def test_relu_kills_negative_preactivations():
    net = Mlp([1, 1, 1], rng_for(0))
    net.params[0][...] = -5.0  # hidden pre-activation negative for positive input
    net.params[1][...] = 0.0
    net.params[2][...] = 3.0
    net.params[3][...] = 0.25
    out = net.forward(np.array([[2.0]]))
    assert out[0, 0] == pytest.approx(0.25)  # only the output bias survives


def test_forward_rejects_bad_width():
    net = Mlp([3, 4, 2], rng_for(0))
    with pytest.raises(ValueError):
        net.forward(np.ones((2, 5)))


# ---------------------------------------------------------------- backward


def test_backward_zero_upstream_gives_zero_grads():
    net = Mlp([3, 5, 2], rng_for(1))
    x = rng_for(2).normal(size=(4, 3))
    y, cache = net.forward_cached(x)
    grads, dx = net.backward(cache, np.zeros_like(y))
    assert all(np.all(g == 0.0) for g in grads)
    assert np.all(dx == 0.0)


def test_backward_matches_finite_differences():
    checked = 0
    seed = 0
    while checked < 20:
        seed += 1
        rng = rng_for(seed)
        sizes = [int(rng.integers(2, 6)), int(rng.integers(2, 9)),
                 int(rng.integers(2, 9)), int(rng.integers(1, 4))]
        net = Mlp(sizes, rng)
        x = rng.normal(size=(3, sizes[0]))
        if min_abs_preactivation(net, x) < 1e-7:
            continue  # re-sample near ReLU kinks
        u = rng.normal(size=(3, sizes[-1]))
        y, cache = net.forward_cached(x)
        grads, _ = net.backward(cache, u)
        numeric = central_difference(lambda: float(np.sum(net.forward(x) * u)), net.params)
        assert max_relative_error(grads, numeric) < 1e-5
        checked += 1


def test_input_gradient_matches_finite_differences():
    rng = rng_for(11)
    net = Mlp([4, 6, 2], rng)
    x = rng.normal(size=(2, 4))
    u = rng.normal(size=(2, 2))
    _, cache = net.forward_cached(x)
    dx = net.input_grad(cache, u)
    numeric = central_difference(lambda: float(np.sum(net.forward(x) * u)), [x])
    assert max_relative_error([dx], numeric) < 1e-5


def test_batch_gradient_is_sum_of_per_sample_gradients():
    rng = rng_for(12)
    net = Mlp([3, 5, 2], rng)
    x = rng.normal(size=(4, 3))
    u = rng.normal(size=(4, 2))
    _, cache = net.forward_cached(x)
    batch_grads, _ = net.backward(cache, u)
    accum = [np.zeros_like(p) for p in net.params]
    for i in range(4):
        _, ci = net.forward_cached(x[i : i + 1])
        gi, _ = net.backward(ci, u[i : i + 1])
        for a, g in zip(accum, gi):
            a += g
    assert max_relative_error(batch_grads, accum, floor=1e-9) < 1e-9


# ---------------------------------------------------------------- adam


def test_adam_zero_gradient_is_fixed_point():
    params = [np.array([1.0, -2.0]), np.array([[3.0]])]
    st = AdamState.for_params(params)
    before = [p.copy() for p in params]
    adam_step(params, [np.zeros(2), np.zeros((1, 1))], st, lr=0.1)
    assert all(np.array_equal(p, b) for p, b in zip(params, before))


def test_adam_first_step_magnitude_is_lr():
    # bias-corrected: m_hat = g, v_hat = g^2, so the step is lr / (1 + eps)
    params = [np.array([0.0])]
    st = AdamState.for_params(params)
    adam_step(params, [np.array([1.0])], st, lr=3e-4)
    assert params[0][0] == pytest.approx(-3e-4, rel=1e-6)


def test_adam_two_steps_deterministic_with_carried_state():
    def run(n):
        params = [np.array([0.5, -0.5])]
        st = AdamState.for_params(params)
        for _ in range(n):
            adam_step(params, [np.array([0.3, -0.7])], st, lr=0.01)
        return params[0].copy(), st.step

    one_then_one, steps = run(2)
    params = [np.array([0.5, -0.5])]
    st = AdamState.for_params(params)
    adam_step(params, [np.array([0.3, -0.7])], st, lr=0.01)
    adam_step(params, [np.array([0.3, -0.7])], st, lr=0.01)
    assert np.array_equal(one_then_one, params[0])
    assert steps == st.step == 2


def test_adam_shape_mismatch_rejected():
    params = [np.zeros(3)]
    st = AdamState.for_params(params)
    with pytest.raises(ValueError):
        adam_step(params, [np.zeros(4)], st, lr=0.01)


# ---------------------------------------------------------------- policy


def small_policy(seed, hidden=(8, 8), obs_dim=4, sigma0=None):
    rng = rng_for(seed)
    pol = GaussianPolicy(obs_dim, (math.radians(30.0), 1.0), rng, hidden=hidden)
    if sigma0 is not None:
        pol.b_logstd[...] = math.log(sigma0)
        pol.w_logstd *= 0.0
    return pol


def test_sigma_floor_gives_deterministic_action():
    pol = small_policy(3)
    pol.b_logstd[...] = LOG_STD_MIN - 5.0  # saturate the clamp floor
    obs = rng_for(4).normal(size=4)
    a1, _ = pol.sample(obs, rng_for(5))
    a2, _ = pol.sample(obs, rng_for(6))
    expected = pol.mean_action(obs[None, :])[0]
    assert np.allclose(a1, expected, atol=1e-7)
    assert np.allclose(a2, expected, atol=1e-7)


def test_actions_respect_bounds():
    pol = small_policy(7)
    rng = rng_for(8)
    obs = rng.normal(size=(256, 4))
    noise = rng.standard_normal((256, 2))
    actions, _, _ = pol.sample_batch(obs, noise)
    assert np.all(np.abs(actions[:, 0]) <= math.radians(30.0))
    assert np.all(np.abs(actions[:, 1]) <= 1.0)


def test_log_prob_finite_at_clamp_extremes():
    for shift in (LOG_STD_MIN - 50.0, LOG_STD_MAX + 50.0):
        pol = small_policy(9)
        pol.b_logstd[...] = shift
        obs = rng_for(10).normal(size=(64, 4))
        noise = rng_for(11).standard_normal((64, 2))
        _, logp, _ = pol.sample_batch(obs, noise)
        assert np.all(np.isfinite(logp))


def squashed_density(pol, obs_row, actions):
    """Density of the squashed Gaussian at given actions, via the inverse transform."""
    mu, log_std = pol.dist_params(obs_row[None, :])
    sigma = np.exp(log_std[0])
    t = actions / pol.action_scale
    z = np.arctanh(t)
    log_n = -0.5 * ((z - mu[0]) / sigma) ** 2 - np.log(sigma) - 0.5 * np.log(2 * np.pi)
    log_det = np.log(pol.action_scale * (1.0 - t * t))
    return np.exp((log_n - log_det).sum(axis=-1))


def test_sampled_log_prob_matches_density_histogram():
    pol = small_policy(13, sigma0=0.4)
    obs = rng_for(14).normal(size=4)
    n = 1_000_000
    noise = rng_for(15).standard_normal((n, 2))
    actions, logp, _ = pol.sample_batch(np.tile(obs, (n, 1)), noise)

    # cross-check the reported log-probs against the inverse-transform density
    probe = slice(0, 512)
    assert np.allclose(np.exp(logp[probe]),
                       squashed_density(pol, obs, actions[probe]), rtol=1e-9)

    nbins = 12
    edges0 = np.linspace(-pol.action_scale[0], pol.action_scale[0], nbins + 1)
    edges1 = np.linspace(-pol.action_scale[1], pol.action_scale[1], nbins + 1)
    counts, _, _ = np.histogram2d(actions[:, 0], actions[:, 1], bins=(edges0, edges1))
    area = (edges0[1] - edges0[0]) * (edges1[1] - edges1[0])

    checked = 0
    for i in range(nbins):
        for j in range(nbins):
            # expected mass by midpoint quadrature on a 5x5 subgrid
            sub0 = edges0[i] + (np.arange(5) + 0.5) / 5 * (edges0[1] - edges0[0])
            sub1 = edges1[j] + (np.arange(5) + 0.5) / 5 * (edges1[1] - edges1[0])
            g0, g1 = np.meshgrid(sub0, sub1)
            pts = np.stack([g0.ravel(), g1.ravel()], axis=1)
            mass = squashed_density(pol, obs, pts).mean() * area
            if mass < 0.02:
                continue  # interior high-mass bins only; elsewhere MC noise dominates
            emp = counts[i, j] / n
            assert abs(emp - mass) / mass < 0.02
            checked += 1
    assert checked >= 4


def test_policy_sampling_deterministic_given_seed():
    pol = small_policy(16)
    obs = rng_for(17).normal(size=4)
    a1, lp1 = pol.sample(obs, rng_for(18))
    a2, lp2 = pol.sample(obs, rng_for(18))
    assert np.array_equal(a1, a2) and lp1 == lp2


def test_policy_backward_matches_finite_differences():
    checked = 0
    seed = 100
    while checked < 20:
        seed += 1
        rng = rng_for(seed)
        pol = small_policy(seed, hidden=(int(rng.integers(3, 9)), int(rng.integers(3, 9))))
        obs = rng.normal(size=(3, 4))
        noise = rng.standard_normal((3, 2))
        if min_abs_preactivation(pol.trunk, obs) < 1e-7:
            continue
        da = rng.normal(size=(3, 2))
        dlp = rng.normal(size=3)

        def loss():
            actions, logp, _ = pol.sample_batch(obs, noise)
            return float(np.sum(actions * da) + np.sum(logp * dlp))

        _, _, cache = pol.sample_batch(obs, noise)
        grads = pol.backward_sample(cache, da, dlp)
        numeric = central_difference(loss, pol.params)
        assert max_relative_error(grads, numeric) < 1e-5
        checked += 1


# ---------------------------------------------------------------- twin critic


def test_twin_critics_initialized_independently():
    tc = TwinCritic(3, 2, rng_for(19), hidden=(8, 8))
    assert not np.array_equal(tc.q1.params[0], tc.q2.params[0])


def test_min_q_with_action_grad_matches_finite_differences():
    rng = rng_for(20)
    tc = TwinCritic(3, 2, rng, hidden=(6, 6))
    obs = rng.normal(size=(4, 3))
    act = rng.normal(size=(4, 2)) * 0.5
    qmin, dq_da = tc.min_q_with_action_grad(obs, act)
    assert np.allclose(qmin, np.minimum(*tc.q_values(obs, act)))
    numeric = central_difference(lambda: float(np.sum(tc.min_q(obs, act))), [act])
    assert max_relative_error([dq_da], numeric) < 1e-5


# ---------------------------------------------------------------- polyak


def test_polyak_tau_one_copies_online():
    t = [np.zeros(3), np.zeros((2, 2))]
    o = [np.arange(3.0), np.full((2, 2), 7.0)]
    polyak_update(t, o, 1.0)
    assert all(np.array_equal(a, b) for a, b in zip(t, o))


def test_polyak_tau_zero_keeps_target():
    t = [np.full(3, 2.0)]
    polyak_update(t, [np.full(3, 9.0)], 0.0)
    assert np.array_equal(t[0], np.full(3, 2.0))


def test_polyak_hand_value():
    t = [np.zeros(1)]
    polyak_update(t, [np.ones(1)], 0.05)
    assert t[0][0] == pytest.approx(0.05)


def test_polyak_contraction_toward_online():
    rng = rng_for(21)
    t = [rng.normal(size=(4, 3))]
    o = [rng.normal(size=(4, 3))]
    gap_before = np.abs(t[0] - o[0])
    polyak_update(t, o, 0.05)
    assert np.allclose(np.abs(t[0] - o[0]), 0.95 * gap_before)


def test_polyak_rejects_bad_tau():
    with pytest.raises(ValueError):
        polyak_update([np.zeros(1)], [np.zeros(1)], 1.5)


def test_copy_params_copies_values_not_identity():
    src = [np.arange(4.0)]
    dst = [np.zeros(4)]
    copy_params(dst, src)
    assert np.array_equal(dst[0], src[0])
    src[0][0] = 99.0
    assert dst[0][0] == 0.0
