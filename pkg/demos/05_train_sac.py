"""Short soft actor-critic training demo on the perpendicular scenario.

This runs a deliberately small budget (a few minutes of CPU) to show the
training loop, metrics rows, and checkpointing; a real run uses the defaults
(3000 episodes, early stop on the evaluation thresholds) via the CLI:

    parksac train --out runs/perp --scenario perpendicular --verbose

Run:  python demos/05_train_sac.py    (writes demo_run/)
"""

from parksac.sac import SacConfig, evaluate, train

cfg = SacConfig(
    episodes=60,
    max_steps=300,
    warmup_steps=500,
    eval_every=0,
    checkpoint_every=30,
    seed=0,
)
state, rows = train(cfg, "perpendicular", out_dir="demo_run", quiet=False)

returns = [r.ret for r in rows]
print(f"\nfirst-10 mean return {sum(returns[:10]) / 10:8.1f}")
print(f"last-10 mean return  {sum(returns[-10:]) / 10:8.1f}")
print(f"alpha ended at {state.alpha:.3f} after {state.updates} updates")

report = evaluate(state.policy, "perpendicular", n_episodes=20, seed=cfg.seed, cfg=cfg)
print(f"deterministic eval: success {report.success_rate:.2f}, "
      f"collision {report.collision_rate:.2f}, "
      f"mean steps {report.mean_episode_steps:.0f}")
print("metrics and checkpoints in demo_run/")
