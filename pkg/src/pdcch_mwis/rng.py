"""Seeded counter-based random streams.

Every stream is a Philox4x64 generator keyed by ``(seed, scenario, stream)``,
so scenarios can run in any order or in parallel and still draw the same
numbers.
"""

from __future__ import annotations

import math

import numpy as np

POISSON_INVERSION_MAX = 30.0

# stream ids inside one scenario
STREAM_ALS = 1
STREAM_TRAFFIC = 2


def make_rng(seed: int, scenario: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, scenario, stream])
    return np.random.Generator(np.random.Philox(ss))


def poisson(rng: np.random.Generator, lam: float, size: int | tuple[int, ...]) -> np.ndarray:
    """Poisson draws: CDF inversion for small means, rounded normal otherwise."""
    if lam <= 0:
        raise ValueError("poisson mean must be positive")
    if lam > POISSON_INVERSION_MAX:
        z = rng.standard_normal(size)
        return np.maximum(0.0, np.rint(lam + math.sqrt(lam) * z))
    u = rng.random(size)
    out = np.zeros(np.shape(u))
    p = math.exp(-lam)
    cdf = np.full(np.shape(u), p)
    k = 0
    active = u > cdf
    while active.any():
        k += 1
        p *= lam / k
        out[active] = k
        cdf = cdf + p
        active = active & (u > cdf)
        if p == 0.0:
            break
    return out
