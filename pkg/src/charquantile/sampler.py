"""Inverse-transform sampling through composite quantiles.

Uniforms come from xorshift64* so streams are reproducible in any language:

    x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27      (all mod 2^64)
    out = x * 0x2545F4914F6CDD1D                    (mod 2^64)
    U   = ((out >> 12) + 0.5) / 2^52

The state is seeded from ``seed`` with one splitmix64 step:

    s += 0x9E3779B97F4A7C15
    z  = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9
    z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z ^= z >> 31

Partition ``i`` of a batch split across workers uses the ``(i+2)``-th
splitmix64 output of the same seed (``partition_seed``); the unsplit stream
is the first.  With the top 52 bits every ``k + 0.5`` is exact in double
precision, so U lies strictly inside (0, 1); ``(k + 0.5) / 2^64`` and the
53-bit variant both round to 1.0 for the largest ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .charfns import make_levy_area_p
from .errors import DomainError
from .series import build_series
from .tails import CompositeQuantile, composite_for, eval_quantile

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MULT = 0x2545F4914F6CDD1D


def splitmix64(state: int) -> tuple[int, int]:
    """One step; returns ``(new_state, output)``."""
    state = (state + GOLDEN) & MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return state, z ^ (z >> 31)


def partition_seed(seed: int, index: int) -> int:
    """Initial xorshift state for worker ``index`` (``-1`` is the single stream)."""
    s = seed & MASK
    for _ in range(index + 2):
        s, out = splitmix64(s)
    return out or GOLDEN


class XorShift64Star:
    def __init__(self, seed: int, partition: int = -1):
        self.state = partition_seed(seed, partition)

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x = (x ^ (x << 25)) & MASK
        x ^= x >> 27
        self.state = x
        return (x * MULT) & MASK

    def uniforms(self, n: int) -> np.ndarray:
        out = np.empty(n)
        x = self.state
        for i in range(n):
            x ^= x >> 12
            x = (x ^ (x << 25)) & MASK
            x ^= x >> 27
            out[i] = ((((x * MULT) & MASK) >> 12) + 0.5) / 4503599627370496.0
        self.state = x
        return out


@dataclass
class SampleBatch:
    values: np.ndarray
    seed: int
    dist: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.values)


def uniforms(n: int, seed: int, partition: int = -1) -> np.ndarray:
    return XorShift64Star(seed, partition).uniforms(n)


def sample(q: CompositeQuantile, n: int, seed: int, partition: int = -1) -> SampleBatch:
    if n < 1:
        raise DomainError("sample size must be at least 1")
    u = uniforms(n, seed, partition)
    return SampleBatch(np.asarray(eval_quantile(q, u), dtype=float), seed, dict(q.central.dist))


def loop_quantile(u, delta_t: float):
    """Quantile of the logistic loop part: ``(dt/pi) log(u / (1 - u))``."""
    u = np.asarray(u, dtype=float)
    out = delta_t / math.pi * np.log(u / (1.0 - u))
    return out if out.ndim else float(out)


@lru_cache(maxsize=8)
def levy_p_quantile(r: float, terms: int = 35) -> CompositeQuantile:
    return composite_for(build_series(make_levy_area_p(r), terms=terms))


def sample_levy_area(r: float, delta_t: float, n: int, seed: int, terms: int = 35) -> SampleBatch:
    """Draws of ``Q_X(U1) + delta_t * Q_P(U2)``.

    ``U1`` and ``U2`` alternate in a single stream: draw ``i`` uses uniforms
    ``2i`` and ``2i + 1``.
    """
    if r <= 0 or delta_t <= 0:
        raise DomainError("Levy area sampling needs r > 0 and delta_t > 0")
    if n < 1:
        raise DomainError("sample size must be at least 1")
    u = uniforms(2 * n, seed)
    qp = levy_p_quantile(float(r), terms)
    vals = loop_quantile(u[0::2], delta_t) + delta_t * np.asarray(eval_quantile(qp, u[1::2]))
    return SampleBatch(vals, seed, {"dist": "levy-area", "r": r, "delta_t": delta_t})
