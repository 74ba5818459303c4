"""Dynamic-programming placement of P end-to-end triangles.

Boundaries n_1 = 0 < n_2 < ... < n_{P+1} = M are chosen to minimise the
summed single-triangle residuals J(n_p, n_{p+1}). The end of phase k is
only searched within ``k*floor(d(1-delta)) .. k*floor(d(1+delta))`` frames,
where d is the expected phase length, which keeps the tables small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, ValidationError
from .preprocess import EnergySignal
from .signal_io import LabelTrack
from .triangle import fit_triangle

MIN_PHASE_FRAMES = 2


def candidate_range(k: int, d: float, delta: float, M: int) -> range:
    """Admissible frame indices for the end of phase ``k`` (1-based).

    Returned as a ``range``; it is empty when the clamped interval is.
    """
    if k < 1:
        raise ValidationError(f"phase index must be >= 1, got {k}")
    if not 0 < delta < 1:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    if not d > 0:
        raise ValidationError(f"phase duration must be positive, got {d}")
    lo = max(k * math.floor(d * (1 - delta)), 1)
    hi = min(k * math.floor(d * (1 + delta)), M - 1)
    return range(lo, hi + 1)


class SegmentCost:
    """Memoised J(k1, k3) over one energy sequence."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.float64)
        self._cache: dict[tuple[int, int], float] = {}

    def __call__(self, k1: int, k3: int) -> float:
        key = (k1, k3)
        cost = self._cache.get(key)
        if cost is None:
            cost = fit_triangle(self.values[k1 : k3 + 1], k1).cost
            self._cache[key] = cost
        return cost


@dataclass
class DpTables:
    """Accumulated cost ``O[k][n]`` and predecessor ``I[k][n]`` per phase k."""

    O: dict[int, dict[int, float]] = field(default_factory=dict)
    I: dict[int, dict[int, int]] = field(default_factory=dict)


@dataclass(frozen=True)
class SegmentationResult:
    boundaries_frames: tuple[int, ...]
    frame_rate: float
    total_cost: float
    P: int
    d: float
    delta: float

    @property
    def boundaries_s(self) -> tuple[float, ...]:
        return tuple(n / self.frame_rate for n in self.boundaries_frames)

    def to_dict(self) -> dict:
        return {
            "boundaries": list(self.boundaries_s),
            "boundaries_frames": list(self.boundaries_frames),
            "frame_rate": self.frame_rate,
            "total_cost": self.total_cost,
            "P": self.P,
            "d": self.d,
            "delta": self.delta,
        }


def _solve(cost: SegmentCost, P: int, d: float, delta: float, M: int):
    tables = DpTables()
    ranges = {k: candidate_range(k, d, delta, M) for k in range(1, P)}
    for k, r in ranges.items():
        if len(r) == 0:
            raise InfeasibleError(f"phase {k}: empty boundary search range (d={d:.3f}, M={M})")

    first = ranges[1]
    tables.O[1] = {n: cost(0, n) for n in first if n >= MIN_PHASE_FRAMES}
    tables.I[1] = {n: 0 for n in tables.O[1]}
    if not tables.O[1]:
        raise InfeasibleError("phase 1: no admissible end boundary")

    for k in range(2, P + 1):
        targets = ranges[k] if k < P else (M,)
        prev = tables.O[k - 1]
        Ok: dict[int, float] = {}
        Ik: dict[int, int] = {}
        for n_next in targets:
            best, arg = math.inf, None
            for n_k, acc in prev.items():  # ascending n_k, so ties keep the smallest
                if n_next - n_k < MIN_PHASE_FRAMES:
                    break
                total = acc + cost(n_k, n_next)
                if total < best:
                    best, arg = total, n_k
            if arg is not None:
                Ok[n_next] = best
                Ik[n_next] = arg
        if not Ok:
            raise InfeasibleError(
                f"phase {k}: no end boundary reachable at least "
                f"{MIN_PHASE_FRAMES} frames after phase {k - 1}"
            )
        tables.O[k] = Ok
        tables.I[k] = Ik
    return tables


def segment(energy: EnergySignal, P: int, d: float, delta: float = 0.3, return_tables: bool = False):
    """Optimal boundary sequence for ``P`` phases over a downsampled energy signal."""
    x = energy.values
    M = len(x) - 1
    if P < 1 or int(P) != P:
        raise ValidationError(f"phase count must be a positive integer, got {P}")
    P = int(P)
    if not 0 < delta < 1:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    if not d > 0:
        raise ValidationError(f"phase duration must be positive, got {d}")
    if M < MIN_PHASE_FRAMES * P:
        raise InfeasibleError(
            f"{M + 1} frames cannot hold {P} phases of at least {MIN_PHASE_FRAMES} frames"
        )

    cost = SegmentCost(x)
    if P == 1:
        bounds = (0, M)
        tables = DpTables(O={1: {M: cost(0, M)}}, I={1: {M: 0}})
    else:
        tables = _solve(cost, P, d, delta, M)
        seq = [M]
        for k in range(P, 0, -1):
            seq.append(tables.I[k][seq[-1]])
        bounds = tuple(reversed(seq))

    total = math.fsum(cost(a, b) for a, b in zip(bounds[:-1], bounds[1:]))
    result = SegmentationResult(bounds, energy.frame_rate, total, P, float(d), float(delta))
    return (result, tables) if return_tables else result


def boundaries_to_track(
    result: SegmentationResult, first_label: str = "inhale", frame_rate: float | None = None
) -> LabelTrack:
    rate = result.frame_rate if frame_rate is None else frame_rate
    return LabelTrack.from_boundaries([n / rate for n in result.boundaries_frames], first_label)
