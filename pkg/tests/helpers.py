"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from clwe import EmbeddingSpace


def random_space(rng: np.random.Generator, n: int, d: int, prefix: str = "w") -> EmbeddingSpace:
    """A space of n Gaussian rows with distinct synthetic words."""
    return EmbeddingSpace([f"{prefix}{i:05d}" for i in range(n)], rng.normal(size=(n, d)))


def random_rotation(rng: np.random.Generator, d: int) -> np.ndarray:
    """A uniformly random proper rotation matrix (QR with sign fix)."""
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


def strip_timing(obj):
    """Recursively drop wall-clock fields from a parsed report."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k != "wall_clock_sec"}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj
