"""Boundary-level scoring of a predicted segmentation against a reference.

Match, deletion and insertion rates are computed from a one-to-one pairing
of reference and predicted boundaries within a time tolerance. A reference
segment whose two endpoints are both matched is a segment match, and its
overlap with the predicted segment between the two matched boundaries gives
the overlap rate (OvR).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .signal_io import LabelTrack

# Slack on the tolerance comparison so label files at microsecond resolution
# do not flip a match through float rounding.
_EPS = 1e-9


@dataclass(frozen=True)
class BoundaryMatching:
    pairs: tuple[tuple[int, int, float], ...]
    unmatched_ref: tuple[int, ...]
    unmatched_hyp: tuple[int, ...]
    threshold_s: float

    def hyp_for_ref(self) -> dict[int, int]:
        return {r: h for r, h, _ in self.pairs}


@dataclass(frozen=True)
class EvalReport:
    match_pct: float
    deletion_pct: float
    insertion_pct: float
    segment_match_pct: float
    ovr_mean: float
    ovr_std: float
    n_ref_boundaries: int
    n_hyp_boundaries: int
    n_matches: int
    n_insertions: int
    n_segments: int
    n_segment_matches: int
    threshold_s: float
    boundaries_ref: tuple[float, ...] = ()
    boundaries_hyp: tuple[float, ...] = ()
    ovr_values: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "match_pct": round(self.match_pct, 2),
            "deletion_pct": round(self.deletion_pct, 2),
            "insertion_pct": round(self.insertion_pct, 2),
            "segment_match_pct": round(self.segment_match_pct, 2),
            "ovr_mean": self.ovr_mean,
            "ovr_std": self.ovr_std,
            "n_ref_boundaries": self.n_ref_boundaries,
            "n_hyp_boundaries": self.n_hyp_boundaries,
            "n_matches": self.n_matches,
            "n_insertions": self.n_insertions,
            "n_segments": self.n_segments,
            "n_segment_matches": self.n_segment_matches,
            "threshold_s": self.threshold_s,
            "boundaries_ref": list(self.boundaries_ref),
            "boundaries_hyp": list(self.boundaries_hyp),
        }


def _check_increasing(name: str, times: np.ndarray) -> None:
    if times.ndim != 1 or not np.all(np.isfinite(times)):
        raise ValidationError(f"{name} boundaries must be a 1-D sequence of finite times")
    if np.any(np.diff(times) <= 0):
        raise ValidationError(f"{name} boundaries must be strictly increasing")


def match_boundaries(ref, hyp, threshold_s: float = 0.5) -> BoundaryMatching:
    """Greedy one-to-one pairing, closest pairs first.

    Candidate pairs within the threshold are taken in order of increasing
    distance, then earlier reference time, then earlier predicted time.
    """
    ref = np.asarray(ref, dtype=np.float64).reshape(-1)
    hyp = np.asarray(hyp, dtype=np.float64).reshape(-1)
    if not threshold_s > 0:
        raise ValidationError(f"threshold must be positive, got {threshold_s}")
    _check_increasing("reference", ref)
    _check_increasing("predicted", hyp)

    candidates = []
    for i, r in enumerate(ref):
        lo = np.searchsorted(hyp, r - threshold_s - _EPS, side="left")
        hi = np.searchsorted(hyp, r + threshold_s + _EPS, side="right")
        for j in range(lo, hi):
            dt = abs(hyp[j] - r)
            if dt <= threshold_s + _EPS:
                candidates.append((dt, i, j))
    candidates.sort()

    used_ref: set[int] = set()
    used_hyp: set[int] = set()
    pairs = []
    for dt, i, j in candidates:
        if i in used_ref or j in used_hyp:
            continue
        used_ref.add(i)
        used_hyp.add(j)
        pairs.append((i, j, float(dt)))
    pairs.sort()
    return BoundaryMatching(
        tuple(pairs),
        tuple(i for i in range(len(ref)) if i not in used_ref),
        tuple(j for j in range(len(hyp)) if j not in used_hyp),
        float(threshold_s),
    )


def overlap_rate(ref_seg, hyp_seg) -> float:
    """Common duration over the longer of the two durations."""
    (r0, r1), (h0, h1) = ref_seg, hyp_seg
    if not (r0 < r1 and h0 < h1):
        raise ValidationError(f"degenerate segment in overlap_rate: {ref_seg}, {hyp_seg}")
    common = max(0.0, min(r1, h1) - max(r0, h0))
    return common / max(r1 - r0, h1 - h0)


def _boundaries(track) -> np.ndarray:
    if isinstance(track, LabelTrack):
        return track.boundaries
    return np.asarray(track, dtype=np.float64).reshape(-1)


def compute_report(ref, hyp, threshold_s: float = 0.5) -> EvalReport:
    """Score ``hyp`` against ``ref``; both are label tracks or boundary arrays."""
    rb = _boundaries(ref)
    hb = _boundaries(hyp)
    m = match_boundaries(rb, hb, threshold_s)
    n_ref = len(rb)
    n_match = len(m.pairs)
    n_ins = len(m.unmatched_hyp)

    to_hyp = m.hyp_for_ref()
    n_segments = max(n_ref - 1, 0)
    ovr = []
    for i in range(n_segments):
        if i in to_hyp and i + 1 in to_hyp:
            h0, h1 = hb[to_hyp[i]], hb[to_hyp[i + 1]]
            if h0 < h1:
                ovr.append(overlap_rate((rb[i], rb[i + 1]), (h0, h1)))
            else:
                ovr.append(0.0)
    n_seg_match = len(ovr)

    match_pct = 100.0 * n_match / n_ref if n_ref else 0.0
    return EvalReport(
        match_pct=match_pct,
        deletion_pct=100.0 - match_pct if n_ref else 0.0,
        insertion_pct=100.0 * n_ins / n_ref if n_ref else 0.0,
        segment_match_pct=100.0 * n_seg_match / n_segments if n_segments else 0.0,
        ovr_mean=float(np.mean(ovr)) if ovr else float("nan"),
        ovr_std=float(np.std(ovr)) if len(ovr) > 1 else 0.0,
        n_ref_boundaries=n_ref,
        n_hyp_boundaries=len(hb),
        n_matches=n_match,
        n_insertions=n_ins,
        n_segments=n_segments,
        n_segment_matches=n_seg_match,
        threshold_s=float(threshold_s),
        boundaries_ref=tuple(float(t) for t in rb),
        boundaries_hyp=tuple(float(t) for t in hb),
        ovr_values=tuple(ovr),
    )


def pooled_report(reports) -> dict:
    """Corpus-level figures: boundary counts summed over files, OvR pooled."""
    reports = list(reports)
    n_ref = sum(r.n_ref_boundaries for r in reports)
    n_match = sum(r.n_matches for r in reports)
    n_ins = sum(r.n_insertions for r in reports)
    n_seg = sum(r.n_segments for r in reports)
    n_seg_match = sum(r.n_segment_matches for r in reports)
    ovr = [v for r in reports for v in r.ovr_values]
    return {
        "files": len(reports),
        "match_pct": 100.0 * n_match / n_ref if n_ref else 0.0,
        "deletion_pct": 100.0 * (n_ref - n_match) / n_ref if n_ref else 0.0,
        "insertion_pct": 100.0 * n_ins / n_ref if n_ref else 0.0,
        "segment_match_pct": 100.0 * n_seg_match / n_seg if n_seg else 0.0,
        "ovr_mean": float(np.mean(ovr)) if ovr else float("nan"),
        "ovr_std": float(np.std(ovr)) if ovr else 0.0,
    }
