"""Actor-critic network over ego-centric set observations.

A single learned query token (embedded ego/goal features) cross-attends to
the embedded obstacle tokens; masked slots receive exactly zero attention
weight and contribute nothing to outputs or gradients. The fused features
feed a small tanh MLP with a categorical action head and a scalar value
head.

Everything is float64 numpy with a hand-derived reverse pass; gradients
are verified against central finite differences in the test suite. Chunk
encodings:

  repeat   - one categorical over the 8 primitives; the wrapper repeats the
             choice for the whole chunk (four repeats of a pre-steer
             primitive sweep the steering from 0 to the limit).
  factored - chunk_length independent categorical heads, one per primitive
             slot; log-probabilities and entropies sum over slots.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .env import Observation
from .errors import ConfigurationError, InputError

FEATURE_DIM = 6  # ego_steer, gear, goal (4)
N_PRIMITIVES = 8


@dataclass(frozen=True)
class PolicyConfig:
    embed_dim: int = 64
    n_heads: int = 4
    fusion_width: int = 128
    chunk_length: int = 4
    chunk_mode: str = "repeat"  # repeat | factored
    k_obstacles: int = 256

    def __post_init__(self):
        if self.embed_dim % self.n_heads != 0:
            raise ConfigurationError("embed_dim must be divisible by n_heads")
        if self.chunk_mode not in ("repeat", "factored"):
            raise ConfigurationError(f"unknown chunk_mode '{self.chunk_mode}'")
        if self.chunk_length < 1:
            raise ConfigurationError("chunk_length must be >= 1")

    @property
    def n_action_outputs(self) -> int:
        if self.chunk_mode == "repeat":
            return N_PRIMITIVES
        return self.chunk_length * N_PRIMITIVES


def batch_observations(obs_list: list[Observation]) -> dict:
    return {
        "feats": np.stack([o.features() for o in obs_list]),
        "tokens": np.stack([o.tokens for o in obs_list]),
        "mask": np.stack([o.mask for o in obs_list]),
    }


@dataclass
class ActionDistribution:
    """Categorical distribution over macro-actions.

    ``logits`` has shape (B, 8) in repeat mode or (B, h, 8) in factored
    mode; ``entropy`` is per-sample and sums over factored slots.
    """

    logits: np.ndarray
    log_probs: np.ndarray
    probs: np.ndarray
    entropy: np.ndarray
    mode: str
    chunk_length: int

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        u = rng.uniform(size=self.probs.shape[:-1] + (1,))
        cdf = np.cumsum(self.probs, axis=-1)
        return np.minimum((u > cdf).sum(axis=-1), N_PRIMITIVES - 1)

    def greedy(self) -> np.ndarray:
        return np.argmax(self.logits, axis=-1)

    def log_prob(self, actions: np.ndarray) -> np.ndarray:
        actions = np.asarray(actions)
        if np.any(actions < 0) or np.any(actions >= N_PRIMITIVES):
            raise InputError("action index out of range")
        picked = np.take_along_axis(
            self.log_probs, actions[..., None], axis=-1
        )[..., 0]
        if self.mode == "factored":
            return picked.sum(axis=-1)
        return picked

    def chunks(self, actions: np.ndarray) -> list[list[int]]:
        """Primitive index sequences executed by the env wrapper."""
        if self.mode == "repeat":
            return [[int(a)] * self.chunk_length for a in np.atleast_1d(actions)]
        return [[int(v) for v in row] for row in np.atleast_2d(actions)]


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=-1, keepdims=True)
    z = logits - m
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def make_distribution(logits: np.ndarray, cfg: PolicyConfig) -> ActionDistribution:
    if cfg.chunk_mode == "factored":
        logits = logits.reshape(logits.shape[0], cfg.chunk_length, N_PRIMITIVES)
    logp = _log_softmax(logits)
    p = np.exp(logp)
    ent = -(p * logp).sum(axis=-1)
    if cfg.chunk_mode == "factored":
        ent = ent.sum(axis=-1)
    return ActionDistribution(logits, logp, p, ent, cfg.chunk_mode, cfg.chunk_length)


class PolicyNetwork:
    def __init__(self, cfg: PolicyConfig | None = None, seed: int = 0):
        self.cfg = cfg or PolicyConfig()
        self.seed = seed
        self.params = self._init_params(np.random.default_rng(seed))

    def _init_params(self, rng) -> dict[str, np.ndarray]:
        d = self.cfg.embed_dim
        w = self.cfg.fusion_width
        a = self.cfg.n_action_outputs

        def uniform(shape, fan_in):
            bound = 1.0 / math.sqrt(fan_in)
            return rng.uniform(-bound, bound, size=shape)

        return {
            "tok_w": uniform((2, d), 2),
            "tok_b": np.zeros(d),
            "ego_w": uniform((FEATURE_DIM, d), FEATURE_DIM),
            "ego_b": np.zeros(d),
            "wq": uniform((d, d), d),
            "wk": uniform((d, d), d),
            "wv": uniform((d, d), d),
            "wo": uniform((d, d), d),
            "ob": np.zeros(d),
            "f1_w": uniform((2 * d, w), 2 * d),
            "f1_b": np.zeros(w),
            "f2_w": uniform((w, w), w),
            "f2_b": np.zeros(w),
            "act_w": uniform((w, a), w),
            "act_b": np.zeros(a),
            "val_w": uniform((w, 1), w),
            "val_b": np.zeros(1),
        }

    # -- forward -------------------------------------------------------------

    def forward(self, batch: dict, params: dict | None = None):
        """Compute (logits, values, cache) for a batch of observations."""
        p = params if params is not None else self.params
        feats, tokens, mask = batch["feats"], batch["tokens"], batch["mask"]
        if feats.shape[1] != FEATURE_DIM or tokens.shape[2] != 2:
            raise ConfigurationError("observation does not match the network input")
        d = self.cfg.embed_dim
        nh = self.cfg.n_heads
        dh = d // nh
        b, k, _ = tokens.shape

        e = np.tanh(tokens @ p["tok_w"] + p["tok_b"])  # (B,K,d)
        q0 = np.tanh(feats @ p["ego_w"] + p["ego_b"])  # (B,d)

        qh = (q0 @ p["wq"]).reshape(b, nh, dh)
        kh = (e @ p["wk"]).reshape(b, k, nh, dh).transpose(0, 2, 1, 3)  # (B,H,K,dh)
        vh = (e @ p["wv"]).reshape(b, k, nh, dh).transpose(0, 2, 1, 3)

        scores = np.einsum("bhd,bhkd->bhk", qh, kh) / math.sqrt(dh)
        masked = np.where(mask[:, None, :], scores, -np.inf)
        m = masked.max(axis=-1, keepdims=True)
        m = np.where(np.isfinite(m), m, 0.0)  # rows with no unmasked token
        ex = np.exp(masked - m)
        z = ex.sum(axis=-1, keepdims=True)
        w = ex / np.where(z > 0.0, z, 1.0)  # masked slots exactly 0

        ctx = np.einsum("bhk,bhkd->bhd", w, vh).reshape(b, d)
        attn = ctx @ p["wo"] + p["ob"]
        fused = np.concatenate([q0, attn], axis=1)
        h1 = np.tanh(fused @ p["f1_w"] + p["f1_b"])
        h2 = np.tanh(h1 @ p["f2_w"] + p["f2_b"])
        logits = h2 @ p["act_w"] + p["act_b"]
        values = (h2 @ p["val_w"])[:, 0] + p["val_b"][0]

        cache = {
            "feats": feats, "tokens": tokens, "mask": mask,
            "e": e, "q0": q0, "qh": qh, "kh": kh, "vh": vh, "w": w,
            "ctx": ctx, "fused": fused, "h1": h1, "h2": h2,
        }
        return logits, values, cache

    def distribution(self, batch: dict, params: dict | None = None):
        logits, values, cache = self.forward(batch, params)
        return make_distribution(logits, self.cfg), values, cache

    def act(self, obs: Observation, params: dict | None = None):
        """Single-observation distribution and value."""
        dist, values, _ = self.distribution(batch_observations([obs]), params)
        return dist, float(values[0])

    def attention_weights(
        self, obs: Observation, params: dict | None = None
    ) -> np.ndarray:
        """(n_heads, K) attention weights over obstacle token slots."""
        _, _, cache = self.forward(batch_observations([obs]), params)
        return cache["w"][0]

    # -- reverse mode ----------------------------------------------------------

    def gradients(
        self, cache: dict, dlogits: np.ndarray, dvalues: np.ndarray,
        params: dict | None = None,
    ) -> dict[str, np.ndarray]:
        """Exact gradients of (dlogits . logits + dvalues . values) with
        respect to every parameter."""
        p = params if params is not None else self.params
        d = self.cfg.embed_dim
        nh = self.cfg.n_heads
        dh = d // nh
        b, k, _ = cache["tokens"].shape
        e, q0, w = cache["e"], cache["q0"], cache["w"]
        h1, h2, fused, ctx = cache["h1"], cache["h2"], cache["fused"], cache["ctx"]

        g = {}
        g["act_w"] = h2.T @ dlogits
        g["act_b"] = dlogits.sum(axis=0)
        g["val_w"] = (h2 * dvalues[:, None]).sum(axis=0)[:, None]
        g["val_b"] = np.array([dvalues.sum()])

        dh2 = dlogits @ p["act_w"].T + dvalues[:, None] * p["val_w"][:, 0]
        dh2 = dh2 * (1.0 - h2 * h2)
        g["f2_w"] = h1.T @ dh2
        g["f2_b"] = dh2.sum(axis=0)

        dh1 = (dh2 @ p["f2_w"].T) * (1.0 - h1 * h1)
        g["f1_w"] = fused.T @ dh1
        g["f1_b"] = dh1.sum(axis=0)

        dfused = dh1 @ p["f1_w"].T
        dq0 = dfused[:, :d].copy()
        dattn = dfused[:, d:]

        g["wo"] = ctx.T @ dattn
        g["ob"] = dattn.sum(axis=0)
        dctx = (dattn @ p["wo"].T).reshape(b, nh, dh)

        vh, kh, qh = cache["vh"], cache["kh"], cache["qh"]
        dw = np.einsum("bhd,bhkd->bhk", dctx, vh)
        dvh = np.einsum("bhk,bhd->bhkd", w, dctx)
        ds = w * (dw - (dw * w).sum(axis=-1, keepdims=True))
        ds = ds / math.sqrt(dh)
        dqh = np.einsum("bhk,bhkd->bhd", ds, kh)
        dkh = np.einsum("bhk,bhd->bhkd", ds, qh)

        dq = dqh.reshape(b, d)
        dk = dkh.transpose(0, 2, 1, 3).reshape(b, k, d)
        dv = dvh.transpose(0, 2, 1, 3).reshape(b, k, d)

        g["wq"] = q0.T @ dq
        dq0 += dq @ p["wq"].T
        g["wk"] = np.tensordot(e, dk, axes=([0, 1], [0, 1]))
        g["wv"] = np.tensordot(e, dv, axes=([0, 1], [0, 1]))
        de = (dk @ p["wk"].T + dv @ p["wv"].T) * (1.0 - e * e)

        g["tok_w"] = np.tensordot(cache["tokens"], de, axes=([0, 1], [0, 1]))
        g["tok_b"] = de.sum(axis=(0, 1))

        dq0 = dq0 * (1.0 - q0 * q0)
        g["ego_w"] = cache["feats"].T @ dq0
        g["ego_b"] = dq0.sum(axis=0)
        return g

    # -- persistence -----------------------------------------------------------

    def save_checkpoint(self, path, extra: dict | None = None) -> None:
        meta = {
            "format_version": 1,
            "config": asdict(self.cfg),
            "seed": self.seed,
            "extra": extra or {},
        }
        meta_bytes = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
        np.savez(path, _meta=meta_bytes, **self.params)

    @classmethod
    def load_checkpoint(cls, path) -> "PolicyNetwork":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"checkpoint not found: {path}")
        data = np.load(path)
        meta = json.loads(bytes(data["_meta"]).decode())
        if meta.get("format_version") != 1:
            raise InputError(
                f"unsupported checkpoint format {meta.get('format_version')}"
            )
        net = cls(PolicyConfig(**meta["config"]), seed=meta["seed"])
        net.params = {k: data[k] for k in data.files if k != "_meta"}
        net.extra = meta.get("extra", {})
        return net
