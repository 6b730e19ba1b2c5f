"""Soft actor-critic learning loop: replay buffer, soft Bellman critic updates,
entropy-regularized actor updates, adaptive temperature, target maintenance,
and the training/evaluation drivers.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .fileio import atomic_write_text
from .nets import AdamState, GaussianPolicy, TwinCritic, adam_step, copy_params, polyak_update
from .parking_env import EnvConfig, ParkingEnv, RewardWeights, SuccessTolerance
from .scenarios import make_scenario
from .sensors import LidarConfig
from .trajectory import TrajectoryRow, save_trajectory_csv
from .vehicle import ControlInput, VehicleParams

METRICS_HEADER = ["episode", "steps", "return", "success", "collision", "final_dist",
                  "final_dtheta", "alpha", "critic_loss", "actor_loss"]

EVAL_EPISODE_SEED_BASE = 1_000_000  # keeps evaluation starts disjoint from training ones


@dataclass(frozen=True)
class Transition:
    """One environment step. `done` is the bootstrap-terminal flag (collision
    or success); timeout truncation is pushed with done=False so the target
    keeps bootstrapping through it."""

    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray
    done: bool


@dataclass
class Batch:
    s: np.ndarray
    a: np.ndarray
    r: np.ndarray
    s_next: np.ndarray
    done: np.ndarray  # float 0/1


class ReplayBuffer:
    """Ring buffer over transitions with uniform sampling."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int = 2):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.s = np.zeros((capacity, obs_dim))
        self.a = np.zeros((capacity, act_dim))
        self.r = np.zeros(capacity)
        self.s_next = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)
        self.pos = 0
        self.count = 0  # total insertions, monotone

    def __len__(self) -> int:
        return min(self.count, self.capacity)

    def push(self, t: Transition) -> None:
        i = self.pos
        self.s[i] = t.s
        self.a[i] = t.a
        self.r[i] = t.r
        self.s_next[i] = t.s_next
        self.done[i] = float(t.done)
        self.pos = (self.pos + 1) % self.capacity
        self.count += 1

    def sample(self, rng: np.random.Generator, batch_size: int) -> Batch:
        n = len(self)
        if n == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, n, size=batch_size)
        return Batch(self.s[idx], self.a[idx], self.r[idx], self.s_next[idx], self.done[idx])


@dataclass(frozen=True)
class SacConfig:
    episodes: int = 3000          # M
    max_steps: int = 1000         # T
    batch_size: int = 128         # B
    gamma: float = 0.99
    noise_sigma: float = 0.01     # applied as the lidar noise std during training
    tau: float = 0.05
    lr: float = 3e-4
    buffer_capacity: int = 1_000_000
    warmup_steps: int = 1000
    updates_per_env_step: int = 1
    target_entropy: float = -2.0
    initial_alpha: float = 0.2
    seed: int = 0
    hidden: tuple[int, ...] = (256, 256, 256)
    checkpoint_every: int = 200   # episodes between periodic checkpoints
    eval_every: int = 50          # episodes between in-training evals; 0 disables
    eval_episodes: int = 100
    early_stop_success: float = 0.8    # stop once eval clears both bars; <=0 disables
    early_stop_collision: float = 0.05
    weights: RewardWeights = field(default_factory=RewardWeights)
    tol: SuccessTolerance = field(default_factory=SuccessTolerance)

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.batch_size > self.buffer_capacity:
            raise ValueError("batch size cannot exceed buffer capacity")
        if self.initial_alpha <= 0.0:
            raise ValueError("initial_alpha must be positive")


@dataclass
class TrainState:
    cfg: SacConfig
    policy: GaussianPolicy
    critics: TwinCritic
    target_critics: TwinCritic
    adam_policy: AdamState
    adam_q1: AdamState
    adam_q2: AdamState
    adam_alpha: AdamState
    log_alpha: np.ndarray  # shape (1,)
    buffer: ReplayBuffer
    rng: np.random.Generator
    env_steps: int = 0
    episode: int = 0
    updates: int = 0

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha[0]))


def init_train_state(cfg: SacConfig, obs_dim: int,
                     action_scale: tuple[float, float]) -> TrainState:
    rng = np.random.default_rng(np.random.PCG64(cfg.seed))
    policy = GaussianPolicy(obs_dim, action_scale, rng, hidden=cfg.hidden)
    critics = TwinCritic(obs_dim, 2, rng, hidden=cfg.hidden)
    targets = TwinCritic(obs_dim, 2, rng, hidden=cfg.hidden)
    copy_params(targets.params, critics.params)
    log_alpha = np.array([math.log(cfg.initial_alpha)])
    return TrainState(
        cfg=cfg,
        policy=policy,
        critics=critics,
        target_critics=targets,
        adam_policy=AdamState.for_params(policy.params),
        adam_q1=AdamState.for_params(critics.q1.params),
        adam_q2=AdamState.for_params(critics.q2.params),
        adam_alpha=AdamState.for_params([log_alpha]),
        log_alpha=log_alpha,
        buffer=ReplayBuffer(cfg.buffer_capacity, obs_dim),
        rng=rng,
    )


# ------------------------------------------------------------------ updates


def critic_target(batch: Batch, policy: GaussianPolicy, target_critics: TwinCritic,
                  alpha: float, gamma: float, rng: np.random.Generator) -> np.ndarray:
    """Soft Bellman target y = r + gamma * (1 - done) * (min Q̄(s', a') - alpha log pi(a'|s'))
    with a fresh a' ~ pi(.|s') per element."""
    noise = rng.standard_normal((len(batch.r), policy.action_dim))
    a_next, logp_next, _ = policy.sample_batch(batch.s_next, noise)
    q_next = target_critics.min_q(batch.s_next, a_next)
    return batch.r + gamma * (1.0 - batch.done) * (q_next - alpha * logp_next)


def critic_loss_grads(net, x: np.ndarray, y: np.ndarray) -> tuple[float, list]:
    """Mean squared residual loss of one critic against fixed targets, with
    exact parameter gradients."""
    q, cache = net.forward_cached(x)
    resid = q[:, 0] - y
    loss = float(np.mean(resid * resid))
    grads, _ = net.backward(cache, (2.0 / len(y)) * resid[:, None])
    return loss, grads


def critic_update(state: TrainState, batch: Batch) -> tuple[float, float]:
    """One Adam step per critic on the mean squared soft Bellman residual.

    Targets are constants: no gradient flows through target networks or a'.
    """
    y = critic_target(batch, state.policy, state.target_critics, state.alpha,
                      state.cfg.gamma, state.rng)
    x = np.concatenate([batch.s, batch.a], axis=1)
    losses = []
    for net, adam in ((state.critics.q1, state.adam_q1), (state.critics.q2, state.adam_q2)):
        loss, grads = critic_loss_grads(net, x, y)
        losses.append(loss)
        adam_step(net.params, grads, adam, state.cfg.lr)
    return losses[0], losses[1]


def actor_loss_grads(policy: GaussianPolicy, critics, s: np.ndarray, noise: np.ndarray,
                     alpha: float) -> tuple[float, list]:
    """Loss E[alpha log pi(a|s) - min Q(s, a)] over reparameterized samples and
    its exact gradients w.r.t. policy parameters (critics held frozen)."""
    n = len(s)
    actions, logp, cache = policy.sample_batch(s, noise)
    qmin, dq_da = critics.min_q_with_action_grad(s, actions)
    loss = float(np.mean(alpha * logp - qmin))
    grads = policy.backward_sample(cache, -dq_da / n, np.full(n, alpha / n))
    return loss, grads


def actor_update(state: TrainState, batch: Batch) -> float:
    """One Adam step on the policy minimizing E[alpha log pi(a|s) - min Q(s, a)]
    through reparameterized samples; critic parameters stay frozen."""
    noise = state.rng.standard_normal((len(batch.r), state.policy.action_dim))
    loss, grads = actor_loss_grads(state.policy, state.critics, batch.s, noise, state.alpha)
    adam_step(state.policy.params, grads, state.adam_policy, state.cfg.lr)
    return loss


def temperature_grad(log_alpha: float, logp: np.ndarray, target_entropy: float) -> float:
    """d/dlog_alpha of E[-exp(log_alpha) * (log pi + target_entropy)]."""
    return float(np.mean(-math.exp(log_alpha) * (logp + target_entropy)))


def temperature_update(state: TrainState, batch: Batch) -> float:
    """One Adam step on log alpha toward the target entropy; returns new alpha."""
    n = len(batch.r)
    noise = state.rng.standard_normal((n, state.policy.action_dim))
    _, logp, _ = state.policy.sample_batch(batch.s, noise)
    g = temperature_grad(float(state.log_alpha[0]), logp, state.cfg.target_entropy)
    adam_step([state.log_alpha], [np.array([g])], state.adam_alpha, state.cfg.lr)
    return state.alpha


def run_updates(state: TrainState, batch: Batch) -> tuple[float, float, float]:
    """One full update cycle: critics, actor, temperature, Polyak targets."""
    l1, l2 = critic_update(state, batch)
    la = actor_update(state, batch)
    temperature_update(state, batch)
    polyak_update(state.target_critics.params, state.critics.params, state.cfg.tau)
    state.updates += 1
    critic_loss = 0.5 * (l1 + l2)
    if not (math.isfinite(critic_loss) and math.isfinite(la)
            and math.isfinite(state.alpha)):
        raise FloatingPointError(
            f"non-finite loss at update {state.updates} "
            f"(env step {state.env_steps}, seed {state.cfg.seed})"
        )
    return l1, l2, la


# ------------------------------------------------------------------ drivers


@dataclass(frozen=True)
class EvalReport:
    success_rate: float
    collision_rate: float
    mean_episode_steps: float
    mean_return: float
    mean_final_dist: float
    mean_inference_time_per_episode: float


@dataclass(frozen=True)
class MetricsRow:
    episode: int
    steps: int
    ret: float
    success: bool
    collision: bool
    final_dist: float
    final_dtheta: float
    alpha: float
    critic_loss: float
    actor_loss: float

    def as_csv(self) -> list:
        return [self.episode, self.steps, repr(self.ret), int(self.success),
                int(self.collision), repr(self.final_dist), repr(self.final_dtheta),
                repr(self.alpha), repr(self.critic_loss), repr(self.actor_loss)]


def save_metrics_csv(rows: list[MetricsRow], path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRICS_HEADER)
    for row in rows:
        writer.writerow(row.as_csv())
    atomic_write_text(path, buf.getvalue())


def build_env(scenario_kind: str, cfg: SacConfig, noise_sigma: float | None = None,
              vehicle: VehicleParams | None = None, lidar: LidarConfig | None = None,
              env_cfg: EnvConfig | None = None, scenario_seed: int | None = None,
              dynamic_obstacles: bool = False) -> ParkingEnv:
    vehicle = vehicle or VehicleParams()
    lidar = lidar or LidarConfig()
    if noise_sigma is not None:
        lidar = replace(lidar, noise_sigma=noise_sigma)
    env_cfg = replace(env_cfg or EnvConfig(), max_steps=cfg.max_steps)
    seed = cfg.seed if scenario_seed is None else scenario_seed
    spec = make_scenario(scenario_kind, seed, vehicle, dynamic_obstacles=dynamic_obstacles)
    return ParkingEnv(spec, vehicle, lidar, cfg.weights, cfg.tol, env_cfg)


def _warmup_action(rng: np.random.Generator, max_steer: float) -> np.ndarray:
    return np.array([rng.uniform(-max_steer, max_steer), rng.uniform(-1.0, 1.0)])


def train(cfg: SacConfig, scenario_kind: str, out_dir: str | Path | None = None,
          vehicle: VehicleParams | None = None, lidar: LidarConfig | None = None,
          env_cfg: EnvConfig | None = None, state: TrainState | None = None,
          config_echo: str = "", quiet: bool = True, dynamic_obstacles: bool = False,
          ) -> tuple[TrainState, list[MetricsRow]]:
    """Run the episodic training loop; returns the final state and metric rows.

    Actions are uniform-random until warmup_steps total env steps, then one
    full update cycle runs per env step (times updates_per_env_step). Pass a
    restored `state` to resume; metrics rows cover only the episodes run here.
    When out_dir is given, metrics.csv and periodic/final checkpoints land
    there.
    """
    from .checkpoint import save_checkpoint  # deferred: checkpoint is format-only

    vehicle = vehicle or VehicleParams()
    env = build_env(scenario_kind, cfg, noise_sigma=cfg.noise_sigma, vehicle=vehicle,
                    lidar=lidar, env_cfg=env_cfg, dynamic_obstacles=dynamic_obstacles)
    if state is None:
        state = init_train_state(cfg, env.obs_dim, (vehicle.max_steer, 1.0))
    else:
        state.cfg = cfg  # resumed runs follow the currently resolved config
    rows: list[MetricsRow] = []
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    def flush_metrics() -> None:
        if out is not None:
            save_metrics_csv(rows, out / "metrics.csv")

    stop = False
    while state.episode < cfg.episodes and not stop:
        state.episode += 1
        ep = state.episode
        obs = env.reset(episode_seed=ep)
        ep_return = 0.0
        critic_losses: list[float] = []
        actor_losses: list[float] = []
        info = None
        for _ in range(cfg.max_steps):
            if state.env_steps < cfg.warmup_steps:
                action = _warmup_action(state.rng, vehicle.max_steer)
            else:
                action, _ = state.policy.sample(obs, state.rng)
            res = env.step(ControlInput(float(action[0]), float(action[1])))
            state.buffer.push(Transition(obs, action, res.reward, res.obs,
                                         res.info.collision or res.info.success))
            obs = res.obs
            state.env_steps += 1
            ep_return += res.reward
            if state.env_steps >= cfg.warmup_steps and len(state.buffer) >= cfg.batch_size:
                for _ in range(cfg.updates_per_env_step):
                    batch = state.buffer.sample(state.rng, cfg.batch_size)
                    l1, l2, la = run_updates(state, batch)
                    critic_losses.append(0.5 * (l1 + l2))
                    actor_losses.append(la)
            info = res.info
            if res.done:
                break
        assert info is not None
        rows.append(MetricsRow(
            episode=ep, steps=info.t, ret=ep_return, success=info.success,
            collision=info.collision, final_dist=info.dist, final_dtheta=info.dtheta,
            alpha=state.alpha,
            critic_loss=float(np.mean(critic_losses)) if critic_losses else 0.0,
            actor_loss=float(np.mean(actor_losses)) if actor_losses else 0.0,
        ))
        if not quiet and (ep % 10 == 0 or ep == 1):
            recent = rows[-50:]
            print(f"episode {ep}: return {ep_return:.1f} steps {info.t} "
                  f"success {sum(r.success for r in recent)}/{len(recent)} (last 50) "
                  f"alpha {state.alpha:.3f}", flush=True)
        if out is not None and cfg.checkpoint_every > 0 and ep % cfg.checkpoint_every == 0:
            flush_metrics()
            save_checkpoint(state, out / f"checkpoint_ep{ep}.ckpt", config_echo)
        if (cfg.eval_every > 0 and ep % cfg.eval_every == 0
                and state.env_steps >= cfg.warmup_steps and cfg.early_stop_success > 0.0):
            report = evaluate(state.policy, scenario_kind, cfg.eval_episodes,
                              cfg.seed, cfg=cfg, vehicle=vehicle, lidar=lidar,
                              env_cfg=env_cfg)
            if not quiet:
                print(f"eval at episode {ep}: success {report.success_rate:.2f} "
                      f"collision {report.collision_rate:.2f}", flush=True)
            if (report.success_rate >= cfg.early_stop_success
                    and report.collision_rate <= cfg.early_stop_collision):
                stop = True
    flush_metrics()
    if out is not None:
        save_checkpoint(state, out / "final.ckpt", config_echo)
    return state, rows


def rollout_deterministic(policy: GaussianPolicy, env: ParkingEnv, episode_seed: int):
    """Roll one episode with the deterministic action bound*tanh(mu).

    Returns (trajectory rows, episode return, final StepInfo).
    """
    obs = env.reset(episode_seed=episode_seed)
    s = env.state
    rows = [TrajectoryRow(0, s.pose.x, s.pose.y, s.pose.theta, s.v)]
    ep_return = 0.0
    info = None
    while not env.done:
        action = policy.mean_action(obs[None, :])[0]
        res = env.step(ControlInput(float(action[0]), float(action[1])))
        obs = res.obs
        ep_return += res.reward
        s = env.state
        rows.append(TrajectoryRow(env.t, s.pose.x, s.pose.y, s.pose.theta, s.v,
                                  float(action[0]), float(action[1]), res.reward,
                                  res.info.collision, res.info.success))
        info = res.info
    return rows, ep_return, info


def evaluate(policy: GaussianPolicy, scenario_kind: str, n_episodes: int, seed: int,
             cfg: SacConfig | None = None, vehicle: VehicleParams | None = None,
             lidar: LidarConfig | None = None, env_cfg: EnvConfig | None = None,
             trajectory_dir: str | Path | None = None,
             dynamic_obstacles: bool = False) -> EvalReport:
    """Deterministic-policy evaluation with zero sensor noise.

    Episode starts are drawn from a seed block disjoint from training
    episodes; inference time is the wall-clock of each full rollout.
    """
    cfg = cfg or SacConfig(seed=seed)
    env = build_env(scenario_kind, cfg, noise_sigma=0.0, vehicle=vehicle, lidar=lidar,
                    env_cfg=env_cfg, scenario_seed=seed,
                    dynamic_obstacles=dynamic_obstacles)
    successes = collisions = 0
    steps: list[int] = []
    returns: list[float] = []
    dists: list[float] = []
    times: list[float] = []
    for i in range(n_episodes):
        t0 = time.perf_counter()
        rows, ep_return, info = rollout_deterministic(policy, env, EVAL_EPISODE_SEED_BASE + i)
        times.append(time.perf_counter() - t0)
        successes += int(info.success)
        collisions += int(info.collision)
        steps.append(info.t)
        returns.append(ep_return)
        dists.append(info.dist)
        if trajectory_dir is not None:
            save_trajectory_csv(rows, Path(trajectory_dir) / f"episode_{i:03d}.csv")
    return EvalReport(
        success_rate=successes / n_episodes,
        collision_rate=collisions / n_episodes,
        mean_episode_steps=float(np.mean(steps)),
        mean_return=float(np.mean(returns)),
        mean_final_dist=float(np.mean(dists)),
        mean_inference_time_per_episode=float(np.mean(times)),
    )
