"""Checkpoint persistence.

Format: an ASCII header (magic line, embedded config echo, one manifest line
per tensor giving name, shape, and byte offset) followed by a binary blob of
little-endian float64 values in manifest order. A CRC32 of the blob is stored
in the header so corrupted files never load silently. Writes are atomic
(temp file + rename).

Checkpoints carry everything training resume needs to be bit-exact: network
parameters, Adam moments and step counters, log_alpha, loop counters, the
replay buffer contents, and the PCG64 stream state (bit-cast into the blob).
"""

from __future__ import annotations

import zlib
from pathlib import Path

import numpy as np

from .fileio import atomic_write_bytes
from .parking_env import RewardWeights, SuccessTolerance
from .sac import SacConfig, TrainState, init_train_state

MAGIC = "PARKSAC-CKPT v1"


class CheckpointError(Exception):
    """Base class for checkpoint load failures."""


class CheckpointMagicError(CheckpointError):
    """Magic or version line mismatch."""


class CheckpointIntegrityError(CheckpointError):
    """Truncated blob, inconsistent offsets, or checksum mismatch."""


class CheckpointShapeError(CheckpointError):
    """Manifest tensors do not fit the expected model structure."""


# ------------------------------------------------------------------ raw format


def write_tensors(tensors: dict[str, np.ndarray], path: str | Path,
                  config_text: str = "") -> None:
    path = Path(path)
    blobs: list[bytes] = []
    manifest: list[str] = []
    offset = 0
    for name, arr in tensors.items():
        if " " in name:
            raise ValueError(f"tensor name {name!r} may not contain spaces")
        arr64 = np.ascontiguousarray(arr, dtype="<f8")
        raw = arr64.tobytes()
        shape = ",".join(str(d) for d in arr64.shape) or "1"
        manifest.append(f"{name} {shape} {offset}")
        blobs.append(raw)
        offset += len(raw)
    blob = b"".join(blobs)
    config_lines = config_text.splitlines()
    header = [MAGIC, f"config {len(config_lines)}", *config_lines,
              f"tensors {len(manifest)}", *manifest,
              f"blob {len(blob)} crc32 {zlib.crc32(blob):08x}", ""]
    atomic_write_bytes(path, "\n".join(header).encode() + blob)


def read_tensors(path: str | Path) -> tuple[dict[str, np.ndarray], str]:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        lines, blob = _split_header(data)
    except CheckpointError:
        raise
    except Exception as exc:
        raise CheckpointIntegrityError(f"{path}: unreadable header ({exc})") from exc
    it = iter(lines)
    if next(it, None) != MAGIC:
        raise CheckpointMagicError(f"{path}: bad magic line (expected {MAGIC!r})")
    config_decl = next(it, "")
    if not config_decl.startswith("config "):
        raise CheckpointIntegrityError(f"{path}: missing config declaration")
    n_cfg = int(config_decl.split()[1])
    config_text = "\n".join(next(it) for _ in range(n_cfg))
    tensors_decl = next(it, "")
    if not tensors_decl.startswith("tensors "):
        raise CheckpointIntegrityError(f"{path}: missing tensors declaration")
    n_tensors = int(tensors_decl.split()[1])
    manifest = []
    for _ in range(n_tensors):
        name, shape_s, offset_s = next(it).split(" ")
        shape = tuple(int(d) for d in shape_s.split(","))
        manifest.append((name, shape, int(offset_s)))
    blob_decl = next(it, "")
    parts = blob_decl.split()
    if len(parts) != 4 or parts[0] != "blob" or parts[2] != "crc32":
        raise CheckpointIntegrityError(f"{path}: missing blob declaration")
    n_bytes, crc_expect = int(parts[1]), parts[3]
    if len(blob) != n_bytes:
        raise CheckpointIntegrityError(
            f"{path}: blob truncated ({len(blob)} bytes, manifest says {n_bytes})"
        )
    if f"{zlib.crc32(blob):08x}" != crc_expect:
        raise CheckpointIntegrityError(f"{path}: blob checksum mismatch")
    tensors: dict[str, np.ndarray] = {}
    for name, shape, offset in manifest:
        count = int(np.prod(shape))
        end = offset + 8 * count
        if end > n_bytes:
            raise CheckpointIntegrityError(
                f"{path}: tensor {name} extends past blob end ({end} > {n_bytes})"
            )
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
        tensors[name] = arr.reshape(shape).astype(np.float64)
    return tensors, config_text


def _split_header(data: bytes) -> tuple[list[str], bytes]:
    # the header ends at the first newline after the "blob ..." line
    lines: list[str] = []
    pos = 0
    while True:
        nl = data.index(b"\n", pos)
        line = data[pos:nl].decode("latin-1")  # never fails; magic check reports garbage
        pos = nl + 1
        lines.append(line)
        if line.startswith("blob "):
            return lines, data[pos:]


# ------------------------------------------------------------------ TrainState


_CFG_SCALARS = [
    ("episodes", int), ("max_steps", int), ("batch_size", int), ("gamma", float),
    ("noise_sigma", float), ("tau", float), ("lr", float), ("buffer_capacity", int),
    ("warmup_steps", int), ("updates_per_env_step", int), ("target_entropy", float),
    ("initial_alpha", float), ("seed", int), ("checkpoint_every", int),
    ("eval_every", int), ("eval_episodes", int), ("early_stop_success", float),
    ("early_stop_collision", float),
]


def _rng_state_bits(rng: np.random.Generator) -> np.ndarray:
    st = rng.bit_generator.state
    s, inc = st["state"]["state"], st["state"]["inc"]
    mask = (1 << 64) - 1
    words = np.array(
        [s >> 64 & mask, s & mask, inc >> 64 & mask, inc & mask,
         st["has_uint32"] & mask, st["uinteger"] & mask],
        dtype=np.uint64,
    )
    return words.view(np.float64)


def _restore_rng(bits: np.ndarray) -> np.random.Generator:
    words = np.ascontiguousarray(bits, dtype=np.float64).view(np.uint64)
    rng = np.random.default_rng(0)
    rng.bit_generator.state = {
        "bit_generator": "PCG64",
        "state": {"state": int(words[0]) << 64 | int(words[1]),
                  "inc": int(words[2]) << 64 | int(words[3])},
        "has_uint32": int(words[4]),
        "uinteger": int(words[5]),
    }
    return rng


def state_to_tensors(state: TrainState) -> dict[str, np.ndarray]:
    cfg = state.cfg
    t: dict[str, np.ndarray] = {}
    t["cfg.fields"] = np.array([float(getattr(cfg, name)) for name, _ in _CFG_SCALARS])
    t["cfg.hidden"] = np.array(cfg.hidden, dtype=float)
    t["cfg.weights"] = np.array([cfg.weights.w1, cfg.weights.w2, cfg.weights.w3, cfg.weights.w4])
    t["cfg.tol"] = np.array([cfg.tol.pos_tol, cfg.tol.ang_tol, cfg.tol.speed_tol])
    t["policy.action_scale"] = state.policy.action_scale.copy()
    for name, p in zip(state.policy.param_names(), state.policy.params):
        t[f"policy.{name}"] = p
    for name, p in zip(state.critics.param_names(), state.critics.params):
        t[f"critic.{name}"] = p
    for name, p in zip(state.target_critics.param_names(), state.target_critics.params):
        t[f"target.{name}"] = p
    for tag, adam in (("policy", state.adam_policy), ("q1", state.adam_q1),
                      ("q2", state.adam_q2), ("alpha", state.adam_alpha)):
        for i, (m, v) in enumerate(zip(adam.m, adam.v)):
            t[f"adam.{tag}.m{i}"] = m
            t[f"adam.{tag}.v{i}"] = v
        t[f"adam.{tag}.step"] = np.array([float(adam.step)])
    t["log_alpha"] = state.log_alpha
    t["counters"] = np.array([float(state.env_steps), float(state.episode),
                              float(state.updates)])
    t["rng.state_bits"] = _rng_state_bits(state.rng)
    buf = state.buffer
    n = len(buf)
    t["buffer.meta"] = np.array([float(buf.pos), float(buf.count)])
    t["buffer.s"] = buf.s[:n]
    t["buffer.a"] = buf.a[:n]
    t["buffer.r"] = buf.r[:n]
    t["buffer.s_next"] = buf.s_next[:n]
    t["buffer.done"] = buf.done[:n]
    return t


def tensors_to_state(t: dict[str, np.ndarray]) -> TrainState:
    try:
        raw = t["cfg.fields"]
        kwargs = {name: conv(raw[i]) for i, (name, conv) in enumerate(_CFG_SCALARS)}
        w = t["cfg.weights"]
        tol = t["cfg.tol"]
        cfg = SacConfig(
            hidden=tuple(int(h) for h in t["cfg.hidden"]),
            weights=RewardWeights(*map(float, w)),
            tol=SuccessTolerance(*map(float, tol)),
            **kwargs,
        )
        obs_dim = t["policy.trunk.w0"].shape[1]
        action_scale = tuple(map(float, t["policy.action_scale"]))
    except KeyError as exc:
        raise CheckpointShapeError(f"checkpoint missing tensor {exc}") from exc
    state = init_train_state(cfg, obs_dim, action_scale)

    def load_into(params, names, prefix):
        for name, p in zip(names, params):
            src = t.get(f"{prefix}.{name}")
            if src is None:
                raise CheckpointShapeError(f"checkpoint missing tensor {prefix}.{name}")
            if src.shape != p.shape:
                raise CheckpointShapeError(
                    f"tensor {prefix}.{name}: shape {src.shape} != expected {p.shape}"
                )
            p[...] = src

    load_into(state.policy.params, state.policy.param_names(), "policy")
    load_into(state.critics.params, state.critics.param_names(), "critic")
    load_into(state.target_critics.params, state.target_critics.param_names(), "target")
    for tag, adam in (("policy", state.adam_policy), ("q1", state.adam_q1),
                      ("q2", state.adam_q2), ("alpha", state.adam_alpha)):
        for i in range(len(adam.m)):
            for kind, dst in (("m", adam.m[i]), ("v", adam.v[i])):
                src = t.get(f"adam.{tag}.{kind}{i}")
                if src is None or src.shape != dst.shape:
                    raise CheckpointShapeError(f"bad adam tensor adam.{tag}.{kind}{i}")
                dst[...] = src
        adam.step = int(t[f"adam.{tag}.step"][0])
    state.log_alpha[...] = t["log_alpha"]
    counters = t["counters"]
    state.env_steps = int(counters[0])
    state.episode = int(counters[1])
    state.updates = int(counters[2])
    state.rng = _restore_rng(t["rng.state_bits"])
    n = t["buffer.s"].shape[0]
    if n > cfg.buffer_capacity or t["buffer.s"].shape[1] != obs_dim:
        raise CheckpointShapeError("buffer tensors inconsistent with config")
    buf = state.buffer
    buf.s[:n] = t["buffer.s"]
    buf.a[:n] = t["buffer.a"]
    buf.r[:n] = t["buffer.r"]
    buf.s_next[:n] = t["buffer.s_next"]
    buf.done[:n] = t["buffer.done"]
    buf.pos = int(t["buffer.meta"][0])
    buf.count = int(t["buffer.meta"][1])
    return state


def save_checkpoint(state: TrainState, path: str | Path, config_echo: str = "") -> None:
    write_tensors(state_to_tensors(state), path, config_echo)


def load_checkpoint(path: str | Path) -> tuple[TrainState, str]:
    tensors, config_text = read_tensors(path)
    return tensors_to_state(tensors), config_text
