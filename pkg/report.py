"""Report assembly, serialization and plot/table data.

JSON output is deterministic: sorted keys, no timestamps, every real written
with exactly 17 significant digits in exponent form. CSV output writes reals
with up to 17 significant digits. Plots are emitted as data, not images.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Sequence

import numpy as np

from averaging import Estimation
from errors import NoExceedances
from models import (
    CandidateRow, Method, PlotKind, PlotSeries, Report, ReportMetadata, Sample,
    StudyConfig, StudyResult, ThresholdGrid, WeightedEstimate, WeightedSummary,
)
from sampling import GENERATOR_NAME, STABLE_PARAMETERIZATION

VERSION = "0.1.0"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _csv_bytes(header: Sequence[str], rows: Iterable[Sequence[object]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue().encode("utf-8")


def _json_real(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite real {x!r}")
    return format(x, ".16e")


def _json_text(value: object, depth: int = 0) -> str:
    """Indented JSON with sorted keys and fixed-precision reals."""
    pad, end = "  " * (depth + 1), "  " * depth
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {_json_text(v, depth + 1)}"
            for k, v in sorted(value.items())
        ]
        return "{\n" + ",\n".join(items) + f"\n{end}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{pad}{_json_text(v, depth + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{end}]"
    if isinstance(value, float):
        return _json_real(value)
    return json.dumps(value)


def _json_bytes(payload: dict) -> bytes:
    return (_json_text(payload) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Estimation reports
# ---------------------------------------------------------------------------

def build_report(
    sample: Sample,
    estimation: Estimation,
    method: Method,
    grid: ThresholdGrid,
    seed: int | None = None,
    source: str = "",
) -> Report:
    est, weights, fits = estimation
    by_m = {f.m: f for f in fits}
    candidates = [
        CandidateRow(
            m=e.m,
            threshold=by_m[e.m].threshold,
            alpha=by_m[e.m].alpha_hat,
            criterion=e.criterion,
            weight=e.weight,
        )
        for e in weights.entries
    ]
    return Report(
        method=Method(method),
        grid=grid,
        weighted=WeightedSummary(
            alpha=est.alpha_bar, xi=est.xi_bar, threshold=est.threshold_bar, m_eff=est.m_eff,
        ),
        candidates=candidates,
        skipped=list(weights.skipped),
        metadata=ReportMetadata(
            seed=seed,
            generator=GENERATOR_NAME if seed is not None else None,
            input_digest=sample.digest(),
            version=VERSION,
            n=sample.n,
            abs_applied=sample.abs_applied,
            source=source or sample.source,
        ),
    )


def emit_report(report: Report, fmt: str = "json") -> bytes:
    if fmt == "json":
        return _json_bytes(report.model_dump(mode="json"))
    if fmt == "csv":
        return _csv_bytes(
            ["m", "threshold", "alpha", "criterion", "weight"],
            ([c.m, c.threshold, c.alpha, c.criterion, c.weight] for c in report.candidates),
        )
    raise ValueError(f"unknown report format: {fmt!r}")


def parse_report(data: bytes | str) -> Report:
    return Report.model_validate_json(data)


def render_summary(report: Report) -> str:
    """Markdown summary of a report."""
    w = report.weighted
    lines = [
        f"# Weighted tail index ({report.method.value})",
        "",
        "| | |",
        "|---|---|",
        f"| **Source** | {report.metadata.source or '-'} (n={report.metadata.n}) |",
        f"| **Grid** | k = {report.grid.k_min}..{report.grid.k_max} step {report.grid.stride} |",
        f"| **Index alpha** | {w.alpha:.4f} |",
        f"| **Shape xi** | {w.xi:.4f} |",
        f"| **Threshold** | {w.threshold:.4f} |",
        f"| **Exceedances** | {w.m_eff} |",
        f"| **Candidates** | {len(report.candidates)} fitted, {len(report.skipped)} skipped |",
        "",
    ]

    top = sorted(report.candidates, key=lambda c: c.weight, reverse=True)[:5]
    lines.append("| m | threshold | alpha | weight |")
    lines.append("|---|-----------|-------|--------|")
    for c in top:
        lines.append(f"| {c.m} | {c.threshold:.4f} | {c.alpha:.4f} | {c.weight:.4f} |")
    lines.append("")
    lines.append(f"**Input digest (SHA-256):** `{report.metadata.input_digest[:16]}...`")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Plot data
# ---------------------------------------------------------------------------

def _exceedances(s: Sample, est: WeightedEstimate) -> np.ndarray:
    x = s.values[s.values > est.threshold_bar]
    if x.size == 0:
        raise NoExceedances(f"no observations above {est.threshold_bar!r}")
    return x


def _hazen_log_survival(m: int) -> np.ndarray:
    # ascending order: the i-th value is the (m - i)-th largest
    j = np.arange(m, 0, -1, dtype=float)
    return np.log((j - 0.5) / m)


def plot_survival_fit(s: Sample, est: WeightedEstimate) -> PlotSeries:
    """Empirical vs fitted Pareto survival of the exceedances, log-log scale."""
    x = _exceedances(s, est)
    log_x = np.log(x)
    observed = _hazen_log_survival(x.size)
    fitted = est.alpha_bar * (math.log(est.threshold_bar) - log_x)
    return PlotSeries(
        kind=PlotKind.SURVIVAL_FIT,
        rows=[(float(a), float(b), float(c)) for a, b, c in zip(log_x, observed, fitted)],
    )


def plot_qq(s: Sample, est: WeightedEstimate) -> PlotSeries:
    """Empirical vs fitted Pareto quantiles of the exceedances, log scale."""
    x = _exceedances(s, est)
    log_x = np.log(x)
    fitted = math.log(est.threshold_bar) - _hazen_log_survival(x.size) / est.alpha_bar
    return PlotSeries(
        kind=PlotKind.QQ,
        rows=[(float(a), float(a), float(c)) for a, c in zip(log_x, fitted)],
    )


def plot_csv(series: PlotSeries) -> bytes:
    return _csv_bytes(["x", "observed", "fitted"], series.rows)


# ---------------------------------------------------------------------------
# Study tables
# ---------------------------------------------------------------------------

STUDY_COLUMNS = [
    "family", "params", "n", "method", "est_threshold", "mse", "bias",
    "mean_alpha", "replicates", "failures",
]


def study_table(rows: Iterable[tuple[StudyConfig, StudyResult]]) -> bytes:
    return _csv_bytes(STUDY_COLUMNS, (
        [
            cfg.spec.family.value, cfg.spec.label(), cfg.n, cfg.method.value,
            res.mean_threshold, res.mse, res.bias, res.mean_alpha,
            cfg.replicates, res.failures,
        ]
        for cfg, res in rows
    ))


def study_json(rows: Iterable[tuple[StudyConfig, StudyResult]]) -> bytes:
    rows = list(rows)
    return _json_bytes({
        "studies": [
            {"config": cfg.model_dump(mode="json"), "result": res.model_dump(mode="json")}
            for cfg, res in rows
        ],
        "metadata": {
            "generator": GENERATOR_NAME,
            "seed": rows[0][0].master_seed if rows else None,
            "stable_parameterization": STABLE_PARAMETERIZATION,
            "version": VERSION,
        },
    })


def histogram_csv(rows: Iterable[tuple[Method, list[tuple[float, int]]]]) -> bytes:
    return _csv_bytes(["method", "bin_center", "count"], (
        [Method(method).value, center, count]
        for method, bins in rows
        for center, count in bins
    ))
