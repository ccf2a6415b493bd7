"""Replicated Monte Carlo studies of the weighted estimators."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import NamedTuple

import numpy as np

from averaging import estimate
from errors import BadSpec, EmptyResult, TailAvgError, TooManyFailures
from estimators import make_sample
from models import Method, SeededStream, StudyConfig, StudyResult
from sampling import draw

logger = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.10


class ReplicateOutcome(NamedTuple):
    replicate: int
    alpha: float | None
    threshold: float | None
    error: str = ""


def run_replicate(cfg: StudyConfig, replicate: int) -> ReplicateOutcome:
    """Draw replicate ``replicate`` on its own stream and estimate it."""
    raw = draw(cfg.spec, cfg.n, SeededStream(master_seed=cfg.master_seed, stream_id=replicate))
    try:
        sample = make_sample(raw, take_abs=bool(cfg.take_abs))
        est, _, _ = estimate(sample, cfg.grid, cfg.method)
    except TailAvgError as e:
        return ReplicateOutcome(replicate, None, None, e.kind)
    return ReplicateOutcome(replicate, est.alpha_bar, est.threshold_bar)


def _run_chunk(args: tuple[StudyConfig, list[int]]) -> list[ReplicateOutcome]:
    cfg, replicates = args
    return [run_replicate(cfg, r) for r in replicates]


def _check_config(cfg: StudyConfig) -> None:
    if cfg.replicates < 1:
        raise BadSpec(f"replicates must be at least 1, got {cfg.replicates}")
    if not 2 <= cfg.grid.k_min < cfg.grid.k_max < cfg.n or cfg.grid.stride < 1:
        raise BadSpec(f"grid [{cfg.grid.k_min}, {cfg.grid.k_max}] is not valid for n={cfg.n}")
    # validates the distribution parameters without drawing
    draw(cfg.spec, 0, SeededStream(master_seed=cfg.master_seed))


def run_study(cfg: StudyConfig, workers: int = 1) -> StudyResult:
    """Run every replicate and summarize bias and MSE against the true index.

    Replicates are reduced in id order, so the result does not depend on
    ``workers``.
    """
    _check_config(cfg)
    ids = list(range(cfg.replicates))

    if workers > 1:
        chunks = [ids[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = [o for part in pool.map(_run_chunk, [(cfg, c) for c in chunks]) for o in part]
    else:
        outcomes = []
        step = max(1, cfg.replicates // 10)
        for r in ids:
            outcomes.append(run_replicate(cfg, r))
            if (r + 1) % step == 0:
                logger.info("replicate %d/%d done", r + 1, cfg.replicates)

    outcomes.sort(key=lambda o: o.replicate)
    failed = [o for o in outcomes if o.alpha is None]
    for o in failed:
        logger.warning("replicate %d failed: %s", o.replicate, o.error)
    if len(failed) > MAX_FAILURE_FRACTION * cfg.replicates or len(failed) == len(outcomes):
        raise TooManyFailures(f"{len(failed)} of {cfg.replicates} replicates failed")

    alphas = np.array([o.alpha for o in outcomes if o.alpha is not None])
    thresholds = np.array([o.threshold for o in outcomes if o.alpha is not None])
    alpha_true = cfg.spec.alpha_true
    mean_alpha = float(alphas.mean())

    return StudyResult(
        alpha_true=alpha_true,
        mean_alpha=mean_alpha,
        bias=mean_alpha - alpha_true,
        mse=float(np.mean((alphas - alpha_true) ** 2)),
        mean_threshold=float(thresholds.mean()),
        per_replicate_alphas=alphas.tolist(),
        per_replicate_thresholds=thresholds.tolist(),
        failures=len(failed),
    )


def run_methods(cfg: StudyConfig, methods: list[Method], workers: int = 1) -> list[tuple[StudyConfig, StudyResult]]:
    """One study per method on identical replicate streams."""
    rows = []
    for method in methods:
        method_cfg = cfg.model_copy(update={"method": Method(method)})
        rows.append((method_cfg, run_study(method_cfg, workers=workers)))
    return rows


def histogram_data(result: StudyResult, bins: int) -> list[tuple[float, int]]:
    """Equal-width bins over [min, max] of the replicate indices."""
    if not result.per_replicate_alphas:
        raise EmptyResult("no replicate estimates to bin")
    if bins < 1:
        raise BadSpec(f"bins must be at least 1, got {bins}")
    alphas = np.asarray(result.per_replicate_alphas)
    counts, edges = np.histogram(alphas, bins=bins)
    centers = (edges[:-1] + edges[1:]) / 2.0
    return [(float(c), int(k)) for c, k in zip(centers, counts)]
