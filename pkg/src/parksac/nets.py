"""Minimal neural-network kernel in numpy: fixed-topology MLPs with exact
reverse-mode gradients, Adam, the tanh-squashed Gaussian policy head, and
Polyak target updates. Everything runs in 64-bit floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_LOG_2PI = math.log(2.0 * math.pi)

Params = list  # list[np.ndarray], interleaved [W0, b0, W1, b1, ...]


def _init_linear(rng: np.random.Generator, n_in: int, n_out: int,
                 scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    bound = 1.0 / math.sqrt(n_in)
    w = rng.uniform(-bound, bound, size=(n_out, n_in)) * scale
    b = rng.uniform(-bound, bound, size=n_out) * scale
    return w, b


class Mlp:
    """Fully connected net with ReLU hidden activations and identity output.

    Parameters are stored as [W0, b0, W1, b1, ...] with W shaped (out, in).
    `relu_out=True` additionally rectifies the final layer, used by the policy
    trunk so that all its hidden layers are ReLU-activated before the linear
    heads.
    """

    def __init__(self, sizes: list[int], rng: np.random.Generator,
                 out_scale: float = 1.0, relu_out: bool = False):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = list(sizes)
        self.relu_out = relu_out
        self.params: Params = []
        n_layers = len(sizes) - 1
        for i in range(n_layers):
            scale = out_scale if i == n_layers - 1 else 1.0
            w, b = _init_linear(rng, sizes[i], sizes[i + 1], scale)
            self.params.extend((w, b))

    @property
    def n_layers(self) -> int:
        return len(self.params) // 2

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.sizes[0]:
            raise ValueError(f"input width {x.shape[-1]} != {self.sizes[0]}")
        h = x
        k = self.n_layers
        for layer in range(k):
            w, b = self.params[2 * layer], self.params[2 * layer + 1]
            h = h @ w.T + b
            if layer < k - 1 or self.relu_out:
                h = np.maximum(h, 0.0)
        return h

    def forward_cached(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Forward pass that also returns per-layer inputs for backward()."""
        if x.shape[-1] != self.sizes[0]:
            raise ValueError(f"input width {x.shape[-1]} != {self.sizes[0]}")
        cache = [x]
        h = x
        k = self.n_layers
        for layer in range(k):
            w, b = self.params[2 * layer], self.params[2 * layer + 1]
            h = h @ w.T + b
            if layer < k - 1 or self.relu_out:
                h = np.maximum(h, 0.0)
            cache.append(h)
        return h, cache

    def backward(self, cache: list[np.ndarray],
                 dy: np.ndarray) -> tuple[Params, np.ndarray]:
        """Exact reverse-mode gradients for the upstream gradient dy.

        Returns (parameter gradients aligned with self.params, input gradient).
        """
        k = self.n_layers
        if dy.shape != cache[k].shape:
            raise ValueError(f"upstream gradient shape {dy.shape} != {cache[k].shape}")
        grads: Params = [None] * (2 * k)
        dz = dy * (cache[k] > 0.0) if self.relu_out else dy
        dx = dz
        for layer in range(k - 1, -1, -1):
            x_in = cache[layer]
            grads[2 * layer] = dz.T @ x_in
            grads[2 * layer + 1] = dz.sum(axis=0)
            dx = dz @ self.params[2 * layer]
            if layer > 0:
                dz = dx * (cache[layer] > 0.0)
        return grads, dx

    def input_grad(self, cache: list[np.ndarray], dy: np.ndarray) -> np.ndarray:
        """Gradient w.r.t. the input only (parameters held frozen)."""
        k = self.n_layers
        dz = dy * (cache[k] > 0.0) if self.relu_out else dy
        for layer in range(k - 1, -1, -1):
            dx = dz @ self.params[2 * layer]
            if layer > 0:
                dz = dx * (cache[layer] > 0.0)
        return dx


@dataclass
class PolicySampleCache:
    """Intermediates of one reparameterized sampling pass."""

    noise: np.ndarray
    sigma: np.ndarray
    log_std_raw: np.ndarray
    squashed: np.ndarray  # tanh(z)
    trunk_out: np.ndarray
    trunk_cache: list[np.ndarray]


class GaussianPolicy:
    """Tanh-squashed Gaussian policy: trunk MLP plus mean and log-std heads.

    Actions are bound * tanh(z) with z ~ Normal(mu, sigma); log-probabilities
    carry the change-of-variables correction so they stay exact densities over
    the bounded action box.
    """

    def __init__(self, obs_dim: int, action_scale, rng: np.random.Generator,
                 hidden: tuple[int, ...] = (256, 256, 256), head_scale: float = 0.01):
        self.obs_dim = obs_dim
        self.action_scale = np.asarray(action_scale, dtype=float)
        self.action_dim = len(self.action_scale)
        if np.any(self.action_scale <= 0.0):
            raise ValueError("action bounds must be positive")
        self.trunk = Mlp([obs_dim, *hidden], rng, relu_out=True)
        self.w_mean, self.b_mean = _init_linear(rng, hidden[-1], self.action_dim, head_scale)
        self.w_logstd, self.b_logstd = _init_linear(rng, hidden[-1], self.action_dim, head_scale)

    @property
    def params(self) -> Params:
        return self.trunk.params + [self.w_mean, self.b_mean, self.w_logstd, self.b_logstd]

    def param_names(self) -> list[str]:
        names = []
        for i in range(self.trunk.n_layers):
            names.extend((f"trunk.w{i}", f"trunk.b{i}"))
        names.extend(("mean.w", "mean.b", "logstd.w", "logstd.b"))
        return names

    def dist_params(self, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Mean and clamped log-std of the pre-squash Gaussian."""
        h = self.trunk.forward(obs)
        mu = h @ self.w_mean.T + self.b_mean
        log_std = np.minimum(np.maximum(h @ self.w_logstd.T + self.b_logstd,
                                        LOG_STD_MIN), LOG_STD_MAX)
        return mu, log_std

    def mean_action(self, obs: np.ndarray) -> np.ndarray:
        """Deterministic action bound * tanh(mu), used for evaluation."""
        h = self.trunk.forward(obs)
        mu = h @ self.w_mean.T + self.b_mean
        return self.action_scale * np.tanh(mu)

    def sample_batch(self, obs: np.ndarray, noise: np.ndarray
                     ) -> tuple[np.ndarray, np.ndarray, PolicySampleCache]:
        """Reparameterized sample a = bound * tanh(mu + sigma * noise).

        Returns (actions (B, A), log_probs (B,), cache for backward_sample).
        """
        h, trunk_cache = self.trunk.forward_cached(obs)
        mu = h @ self.w_mean.T + self.b_mean
        log_std_raw = h @ self.w_logstd.T + self.b_logstd
        log_std = np.minimum(np.maximum(log_std_raw, LOG_STD_MIN), LOG_STD_MAX)
        sigma = np.exp(log_std)
        z = mu + sigma * noise
        t = np.tanh(z)
        actions = self.action_scale * t
        # log(1 - tanh(z)^2) = 2*(log 2 - z - softplus(-2z)), stable for large |z|
        log_one_minus_t2 = 2.0 * (math.log(2.0) - z - np.logaddexp(0.0, -2.0 * z))
        per_dim = (-0.5 * noise * noise - log_std - 0.5 * _LOG_2PI
                   - log_one_minus_t2 - np.log(self.action_scale))
        log_probs = per_dim.sum(axis=1)
        cache = PolicySampleCache(noise, sigma, log_std_raw, t, h, trunk_cache)
        return actions, log_probs, cache

    def backward_sample(self, cache: PolicySampleCache, d_action: np.ndarray,
                        d_logp: np.ndarray) -> Params:
        """Gradients of sum(d_action * a + d_logp * log_prob) w.r.t. params."""
        t = cache.squashed
        d_logp_col = d_logp[:, None]
        # action path: da/dz = bound * (1 - t^2); logp path: dlogp/dz = 2 t
        dz = self.action_scale * (1.0 - t * t) * d_action + 2.0 * t * d_logp_col
        dmu = dz
        # z = mu + exp(log_std) * noise, plus the direct -log_std term of logp
        dls = dz * cache.sigma * cache.noise - d_logp_col
        in_window = (cache.log_std_raw > LOG_STD_MIN) & (cache.log_std_raw < LOG_STD_MAX)
        dls_raw = dls * in_window
        h = cache.trunk_out
        g_w_mean = dmu.T @ h
        g_b_mean = dmu.sum(axis=0)
        g_w_logstd = dls_raw.T @ h
        g_b_logstd = dls_raw.sum(axis=0)
        dh = dmu @ self.w_mean + dls_raw @ self.w_logstd
        trunk_grads, _ = self.trunk.backward(cache.trunk_cache, dh)
        return trunk_grads + [g_w_mean, g_b_mean, g_w_logstd, g_b_logstd]

    def sample(self, obs: np.ndarray, rng: np.random.Generator
               ) -> tuple[np.ndarray, float]:
        """Draw one action for a single observation vector."""
        noise = rng.standard_normal((1, self.action_dim))
        actions, log_probs, _ = self.sample_batch(obs[None, :], noise)
        return actions[0], float(log_probs[0])


class TwinCritic:
    """Two independently initialized Q-networks over concat(obs, action)."""

    def __init__(self, obs_dim: int, act_dim: int, rng: np.random.Generator,
                 hidden: tuple[int, ...] = (256, 256, 256)):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        sizes = [obs_dim + act_dim, *hidden, 1]
        self.q1 = Mlp(sizes, rng)
        self.q2 = Mlp(sizes, rng)

    @property
    def params(self) -> Params:
        return self.q1.params + self.q2.params

    def param_names(self) -> list[str]:
        names = []
        for tag, net in (("q1", self.q1), ("q2", self.q2)):
            for i in range(net.n_layers):
                names.extend((f"{tag}.w{i}", f"{tag}.b{i}"))
        return names

    def q_values(self, obs: np.ndarray, act: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.concatenate([obs, act], axis=1)
        return self.q1.forward(x)[:, 0], self.q2.forward(x)[:, 0]

    def min_q(self, obs: np.ndarray, act: np.ndarray) -> np.ndarray:
        q1, q2 = self.q_values(obs, act)
        return np.minimum(q1, q2)

    def min_q_with_action_grad(self, obs: np.ndarray, act: np.ndarray
                               ) -> tuple[np.ndarray, np.ndarray]:
        """Per-sample min(q1, q2) and its gradient w.r.t. the action input."""
        x = np.concatenate([obs, act], axis=1)
        y1, c1 = self.q1.forward_cached(x)
        y2, c2 = self.q2.forward_cached(x)
        ones = np.ones_like(y1)
        d1 = self.q1.input_grad(c1, ones)[:, self.obs_dim:]
        d2 = self.q2.input_grad(c2, ones)[:, self.obs_dim:]
        take_first = (y1 <= y2)
        qmin = np.where(take_first[:, 0], y1[:, 0], y2[:, 0])
        dq_da = np.where(take_first, d1, d2)
        return qmin, dq_da


@dataclass
class AdamState:
    """First/second moment accumulators and step counter for one parameter list."""

    m: Params
    v: Params
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: Params) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params])


def adam_step(params: Params, grads: Params, st: AdamState,
              lr: float) -> tuple[Params, AdamState]:
    """One bias-corrected Adam update, in place on params and state."""
    if len(params) != len(grads) or len(params) != len(st.m):
        raise ValueError("params, grads, and state must align")
    st.step += 1
    c1 = 1.0 - st.beta1 ** st.step
    c2 = 1.0 - st.beta2 ** st.step
    for p, g, m, v in zip(params, grads, st.m, st.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= st.beta1
        m += (1.0 - st.beta1) * g
        v *= st.beta2
        v += (1.0 - st.beta2) * (g * g)
        p -= lr * (m / c1) / (np.sqrt(v / c2) + st.eps)
    return params, st


def polyak_update(target_params: Params, online_params: Params, tau: float) -> Params:
    """target <- tau * online + (1 - tau) * target, elementwise in place."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    for t, o in zip(target_params, online_params):
        t *= 1.0 - tau
        t += tau * o
    return target_params


def copy_params(dst: Params, src: Params) -> None:
    for d, s in zip(dst, src):
        d[...] = s
