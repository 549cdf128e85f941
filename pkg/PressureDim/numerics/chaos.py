"""
Chaos game for affine IFS.

Runs a block of independent chains in lockstep so that large clouds cost a few
thousand vectorised steps instead of one Python step per point.
"""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from config import settings

logger = logging.getLogger(__name__)

MAX_CHAINS = 1024


def chaos_game(
    linear: np.ndarray,
    translations: np.ndarray,
    count: int,
    seed: int,
    weights: Optional[np.ndarray] = None,
    burn_in: Optional[int] = None,
) -> np.ndarray:
    """
    Sample `count` points of the attractor of x -> linear[i] @ x + translations[i].

    Every chain starts at the origin and discards `burn_in` steps.
    """
    burn_in = settings.CHAOS_BURN_IN if burn_in is None else burn_in
    linear = np.asarray(linear, dtype=float)
    translations = np.asarray(translations, dtype=float)
    m, d = translations.shape
    if weights is None:
        weights = np.full(m, 1.0 / m)

    rng = np.random.default_rng(seed)
    chains = min(count, MAX_CHAINS)
    steps = math.ceil(count / chains)
    x = np.zeros((chains, d))
    out = np.empty((steps * chains, d))

    for step in range(burn_in + steps):
        idx = rng.choice(m, size=chains, p=weights)
        x = np.einsum("cij,cj->ci", linear[idx], x) + translations[idx]
        if step >= burn_in:
            k = step - burn_in
            out[k * chains:(k + 1) * chains] = x

    logger.debug("chaos game: %d chains x %d steps after %d burn-in", chains, steps, burn_in)
    return out[:count]
