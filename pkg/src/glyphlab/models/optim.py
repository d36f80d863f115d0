"""RMSProp: per-parameter moving average of squared gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError


@dataclass
class RmspropState:
    """One squared-gradient cache per parameter tensor, all >= 0."""

    caches: list


def rmsprop_init(params: list) -> RmspropState:
    return RmspropState([np.zeros_like(p) for p in params])


def rmsprop_step(
    params: list,
    grads: list,
    state: RmspropState,
    lr: float,
    rho: float = 0.9,
    eps: float = 1e-8,
) -> RmspropState:
    """In-place update: cache <- rho*cache + (1-rho)*g^2, then
    p <- p - lr * g / (sqrt(cache) + eps), elementwise."""
    if not (len(params) == len(grads) == len(state.caches)):
        raise DimensionError("params, grads and caches must align one-to-one")
    for p, g, c in zip(params, grads, state.caches):
        if p.shape != g.shape or p.shape != c.shape:
            raise DimensionError(f"shape mismatch: {p.shape} vs {g.shape} vs {c.shape}")
        c *= rho
        c += (1.0 - rho) * g * g
        p -= lr * g / (np.sqrt(c) + eps)
    return state
