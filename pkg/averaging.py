"""Model averaging over a grid of candidate thresholds.

Pipeline: build grid -> fit every candidate -> softmax of criterion/2 ->
weighted index and threshold.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from typing import NamedTuple

import numpy as np
from scipy.special import softmax

from errors import (
    AllCandidatesFailed, EmptyGrid, GridOutOfRange, MisalignedInputs, TailAvgError,
)
from estimators import fit_candidate
from models import (
    CandidateFit, Method, Sample, SkippedCandidate, ThresholdGrid, WeightEntry,
    WeightTable, WeightedEstimate,
)

logger = logging.getLogger(__name__)

DEFAULT_K_MIN = 50
DEFAULT_K_MAX = 500
DEFAULT_STRIDE = 1


class Estimation(NamedTuple):
    estimate: WeightedEstimate
    weights: WeightTable
    fits: list[CandidateFit]


def build_grid(
    n: int,
    k_min: int = DEFAULT_K_MIN,
    k_max: int = DEFAULT_K_MAX,
    stride: int = DEFAULT_STRIDE,
) -> ThresholdGrid:
    if stride < 1 or k_min >= k_max:
        raise EmptyGrid(f"no candidates for k_min={k_min}, k_max={k_max}, stride={stride}")
    if k_min < 2 or k_max >= n:
        raise GridOutOfRange(f"grid [{k_min}, {k_max}] does not fit 2 <= k < n={n}")
    return ThresholdGrid(k_min=k_min, k_max=k_max, stride=stride)


def compute_weights(
    criteria: Iterable[tuple[int, float]],
    skipped: Iterable[tuple[int, str]] = (),
) -> WeightTable:
    """Normalized weights exp(I_m / 2) / sum_j exp(I_j / 2)."""
    pairs = sorted(criteria)
    skipped_rows = [SkippedCandidate(m=m, reason=reason) for m, reason in sorted(skipped)]
    if not pairs:
        raise AllCandidatesFailed(f"no candidate could be fitted ({len(skipped_rows)} skipped)")

    ms = [m for m, _ in pairs]
    crit = np.array([c for _, c in pairs], dtype=float)
    weights = softmax(crit / 2.0)

    return WeightTable(
        entries=[
            WeightEntry(m=m, criterion=float(c), weight=float(w))
            for m, c, w in zip(ms, crit, weights)
        ],
        skipped=skipped_rows,
    )


def weighted_estimate(
    fits: Sequence[CandidateFit],
    weights: WeightTable,
    method: Method,
    sample: Sample,
) -> WeightedEstimate:
    by_m = {f.m: f for f in fits}
    entries = weights.entries
    if len(by_m) != len(fits) or set(by_m) != {e.m for e in entries}:
        raise MisalignedInputs("fits and weight entries do not cover the same candidates")

    w = np.array([e.weight for e in entries])
    alphas = np.array([by_m[e.m].alpha_hat for e in entries])
    thresholds = np.array([by_m[e.m].threshold for e in entries])

    # convex combinations stay inside the candidate range
    alpha_bar = float(np.clip(w @ alphas, alphas.min(), alphas.max()))
    threshold_bar = float(np.clip(w @ thresholds, thresholds.min(), thresholds.max()))
    m_eff = sample.n - int(np.searchsorted(sample.values, threshold_bar, side="right"))

    return WeightedEstimate(
        alpha_bar=alpha_bar,
        xi_bar=1.0 / alpha_bar,
        threshold_bar=threshold_bar,
        m_eff=m_eff,
        method=Method(method),
    )


def estimate(s: Sample, grid: ThresholdGrid, method: Method = Method.PARETO) -> Estimation:
    """Fit every grid candidate, weight them and aggregate."""
    method = Method(method)
    build_grid(s.n, grid.k_min, grid.k_max, grid.stride)

    fits: list[CandidateFit] = []
    skipped: list[tuple[int, str]] = []
    for m in grid.candidates():
        try:
            fits.append(fit_candidate(s, m, method))
        except TailAvgError as e:
            logger.debug("candidate m=%d skipped: %s", m, e)
            skipped.append((m, e.kind))

    if skipped:
        logger.warning("%d of %d %s candidates skipped", len(skipped), len(skipped) + len(fits), method.value)

    weights = compute_weights([(f.m, f.criterion) for f in fits], skipped)
    est = weighted_estimate(fits, weights, method, s)
    logger.debug(
        "%s: alpha=%.4f threshold=%.4f m_eff=%d over %d candidates",
        method.value, est.alpha_bar, est.threshold_bar, est.m_eff, len(fits),
    )
    return Estimation(est, weights, fits)
