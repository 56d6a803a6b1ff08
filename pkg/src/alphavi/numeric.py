"""Random streams and log-space weight arithmetic."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


@dataclass
class RandomStream:
    """A reproducible substream identified by ``(seed, stream_id)``.

    Draws come from numpy's PCG64 seeded through ``SeedSequence`` with the
    stream id as spawn key, so distinct ids give independent sequences.
    Normals use numpy's ziggurat transform. The stream is consumed by
    successive calls; two fresh streams with equal ids replay identically.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(entropy=int(self.seed) % 2**64,
                                    spawn_key=(int(self.stream_id) % 2**64,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def spawn(self, stream_id: int) -> "RandomStream":
        return RandomStream(self.seed, stream_id)


def stream_id_for(*key) -> int:
    """Stable 63-bit stream id for an arbitrary cell key (not Python's salted hash)."""
    text = "|".join(str(k) for k in key).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "big") >> 1


def standard_normals(stream: RandomStream, n) -> np.ndarray:
    """Draw ``n`` i.i.d. N(0, 1) variates; ``n`` may be a shape tuple."""
    return stream.generator.standard_normal(n)


def _check_logs(logs):
    logs = np.asarray(logs, dtype=float)
    if logs.size == 0:
        raise ValueError("log weights are empty")
    if np.any(np.isnan(logs)) or np.any(logs == np.inf):
        raise ValueError("log weights contain NaN or +inf")
    if not np.any(np.isfinite(logs)):
        raise ValueError("all log weights are -inf")
    return logs


def log_sum_exp(logs) -> float:
    """``log(sum(exp(logs)))`` with a max shift."""
    logs = _check_logs(logs)
    m = logs.max()
    return float(m + np.log(np.sum(np.exp(logs - m))))


def snis_weights(logs) -> np.ndarray:
    """Self-normalized weights ``exp(logs - lse(logs))``."""
    logs = _check_logs(logs)
    w = np.exp(logs - logs.max())
    return w / w.sum()


def chivi_weights(logs) -> np.ndarray:
    """Squared max-normalized weights ``(w_k / max_j w_j) ** 2``; the max entry is exactly 1."""
    logs = _check_logs(logs)
    return np.exp(2.0 * (logs - logs.max()))


def ess(normalized) -> float:
    """Effective sample size ``1 / sum(w**2)`` of normalized weights."""
    w = np.asarray(normalized, dtype=float)
    if w.size == 0 or abs(w.sum() - 1.0) > 1e-6:
        raise ValueError(f"weights must sum to 1 (got {w.sum()!r})")
    return float(1.0 / np.sum(w * w))
