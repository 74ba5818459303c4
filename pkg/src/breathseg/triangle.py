"""Single-triangle least-squares fit of an energy segment.

A segment x[k1..k3] is modelled by a triangle that is zero at both ends
and peaks with height alpha at an interior frame k2. For a fixed k2 the
best alpha is a one-dimensional linear least-squares problem; k2 itself is
found by exhaustive search.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import FitError, ValidationError


@dataclass(frozen=True)
class TriangleFit:
    k1: int
    k2: int
    k3: int
    alpha: float
    cost: float


def triangle_template(k1: int, k2: int, k3: int, alpha: float, k: float) -> float:
    if not k1 < k2 < k3:
        raise ValidationError(f"need k1 < k2 < k3, got ({k1}, {k2}, {k3})")
    if not k1 <= k <= k3:
        raise ValidationError(f"k={k} outside [{k1}, {k3}]")
    if k <= k2:
        return alpha * (k - k1) / (k2 - k1)
    return alpha * (k - k3) / (k2 - k3)


@lru_cache(maxsize=512)
def _unit_templates(length: int) -> np.ndarray:
    """Row i holds the unit-apex triangle on 0..length-1 with apex at i+1."""
    last = length - 1
    j = np.arange(length, dtype=np.float64)[None, :]
    apex = np.arange(1, last, dtype=np.float64)[:, None]
    g = np.where(j <= apex, j / apex, (last - j) / (last - apex))
    g.flags.writeable = False
    return g


def fit_triangle(segment, k1: int = 0) -> TriangleFit:
    """Best triangle over ``segment``, whose first sample sits at index ``k1``.

    Ties in cost go to the smallest apex index.
    """
    x = np.asarray(segment, dtype=np.float64)
    if x.ndim != 1:
        raise FitError("segment must be 1-D")
    if len(x) < 3:
        raise FitError(f"segment of {len(x)} frames has no interior apex position")
    g = _unit_templates(len(x))
    alphas = (g @ x) / np.einsum("ij,ij->i", g, g)
    resid = x[None, :] - alphas[:, None] * g
    costs = np.einsum("ij,ij->i", resid, resid)
    best = int(np.argmin(costs))
    return TriangleFit(k1, k1 + best + 1, k1 + len(x) - 1, float(alphas[best]), float(costs[best]))


def triangle_cost(x, k1: int, k3: int) -> float:
    """J(k1, k3): residual of the best triangle over ``x[k1..k3]`` inclusive."""
    return fit_triangle(np.asarray(x)[k1 : k3 + 1], k1).cost
