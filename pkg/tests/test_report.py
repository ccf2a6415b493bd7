"""Tests for report serialization, plot data and study tables."""

from __future__ import annotations

import csv
import io
import json
import math
import re

import numpy as np
import pytest

from averaging import build_grid, estimate
from conftest import pareto_draws
from errors import NoExceedances
from estimators import make_sample
from models import (
    DistributionSpec, Family, Method, PlotKind, StudyConfig, StudyResult, ThresholdGrid,
    WeightedEstimate,
)
from report import (
    STUDY_COLUMNS, VERSION, build_report, emit_report, histogram_csv, parse_report,
    plot_csv, plot_qq, plot_survival_fit, render_summary, study_json, study_table,
)


@pytest.fixture
def pareto_report(pareto_sample):
    grid = build_grid(pareto_sample.n, 50, 500, 1)
    return build_report(pareto_sample, estimate(pareto_sample, grid), Method.PARETO, grid)


def _rows(data: bytes) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(data.decode("utf-8"))))


class TestEstimationReport:

    def test_contents(self, pareto_report, pareto_sample):
        assert pareto_report.method is Method.PARETO
        assert len(pareto_report.candidates) == 451
        assert pareto_report.weighted.xi == 1.0 / pareto_report.weighted.alpha
        meta = pareto_report.metadata
        assert meta.n == 2500
        assert meta.version == VERSION
        assert meta.input_digest == pareto_sample.digest()
        assert meta.seed is None and meta.generator is None

    def test_seed_recorded(self, pareto_sample):
        grid = build_grid(pareto_sample.n, 50, 100, 10)
        r = build_report(pareto_sample, estimate(pareto_sample, grid), Method.PARETO, grid, seed=9)
        assert r.metadata.seed == 9
        assert r.metadata.generator == "PCG64"

    def test_json_round_trip(self, pareto_report):
        assert parse_report(emit_report(pareto_report, "json")) == pareto_report

    def test_json_deterministic(self, pareto_sample):
        grid = build_grid(pareto_sample.n, 50, 500, 1)
        first = emit_report(build_report(pareto_sample, estimate(pareto_sample, grid), Method.PARETO, grid))
        second = emit_report(build_report(pareto_sample, estimate(pareto_sample, grid), Method.PARETO, grid))
        assert first == second
        assert b"timestamp" not in first

    def test_json_reals_have_seventeen_digits(self, pareto_report):
        reals: list[str] = []
        json.loads(emit_report(pareto_report, "json"), parse_float=lambda t: reals.append(t) or float(t))
        assert len(reals) > 4 * len(pareto_report.candidates)
        for token in reals:
            assert re.fullmatch(r"-?\d\.\d{16}e[+-]\d{2,3}", token), token

    def test_json_integers_stay_integers(self, pareto_report):
        payload = json.loads(emit_report(pareto_report, "json"))
        assert payload["metadata"]["n"] == 2500
        assert isinstance(payload["weighted"]["m_eff"], int)
        assert [c["m"] for c in payload["candidates"]] == list(range(50, 501))

    def test_csv_weights_sum_to_one(self, pareto_report):
        rows = _rows(emit_report(pareto_report, "csv"))
        assert list(rows[0]) == ["m", "threshold", "alpha", "criterion", "weight"]
        assert [int(r["m"]) for r in rows] == list(range(50, 501))
        assert math.fsum(float(r["weight"]) for r in rows) == pytest.approx(1.0, abs=1e-12)

    def test_csv_full_precision(self, pareto_report):
        rows = _rows(emit_report(pareto_report, "csv"))
        assert [float(r["alpha"]) for r in rows] == [c.alpha for c in pareto_report.candidates]

    def test_unknown_format(self, pareto_report):
        with pytest.raises(ValueError):
            emit_report(pareto_report, "xml")

    def test_summary(self, pareto_report):
        text = render_summary(pareto_report)
        assert text.startswith("# Weighted tail index (pareto)")
        assert f"{pareto_report.weighted.alpha:.4f}" in text
        assert "451 fitted, 0 skipped" in text


class TestPlotData:

    def test_survival_fit_shape(self, pareto_sample):
        est, _, _ = estimate(pareto_sample, build_grid(pareto_sample.n, 50, 500, 1))
        series = plot_survival_fit(pareto_sample, est)
        assert series.kind is PlotKind.SURVIVAL_FIT
        assert len(series.rows) == est.m_eff
        fitted = [r[2] for r in series.rows]
        observed = [r[1] for r in series.rows]
        assert all(a > b for a, b in zip(fitted, fitted[1:]))
        assert all(a > b for a, b in zip(observed, observed[1:]))

    def test_survival_fit_matches_exact_pareto(self):
        s = make_sample(pareto_draws(1.5, 1.0, 100_000, seed=17))
        est = WeightedEstimate(
            alpha_bar=1.5, xi_bar=1.0 / 1.5, threshold_bar=1.0, m_eff=s.n, method=Method.PARETO,
        )
        rows = np.array(plot_survival_fit(s, est).rows)
        body = rows[np.exp(rows[:, 1]) >= 0.05]
        assert body.size
        assert np.max(np.abs(body[:, 1] - body[:, 2])) < 0.1

    def test_qq(self, pareto_sample):
        est, _, _ = estimate(pareto_sample, build_grid(pareto_sample.n, 50, 500, 1))
        series = plot_qq(pareto_sample, est)
        assert series.kind is PlotKind.QQ
        assert all(r[0] == r[1] for r in series.rows)
        assert len(series.rows) == est.m_eff

    def test_no_exceedances(self, pareto_sample):
        est = WeightedEstimate(
            alpha_bar=1.0, xi_bar=1.0, threshold_bar=float(pareto_sample.values[-1]),
            m_eff=0, method=Method.PARETO,
        )
        with pytest.raises(NoExceedances):
            plot_survival_fit(pareto_sample, est)
        with pytest.raises(NoExceedances):
            plot_qq(pareto_sample, est)

    def test_csv(self):
        s = make_sample([1.0, 2.0, 4.0])
        est = WeightedEstimate(alpha_bar=1.0, xi_bar=1.0, threshold_bar=1.0, m_eff=2, method=Method.PARETO)
        rows = _rows(plot_csv(plot_survival_fit(s, est)))
        assert list(rows[0]) == ["x", "observed", "fitted"]
        assert float(rows[0]["x"]) == math.log(2.0)
        assert float(rows[0]["observed"]) == pytest.approx(math.log(0.75))
        assert float(rows[1]["fitted"]) == pytest.approx(-math.log(4.0))


def _study_row(method: Method = Method.PARETO) -> tuple[StudyConfig, StudyResult]:
    cfg = StudyConfig(
        spec=DistributionSpec(family=Family.STABLE, alpha=1.0),
        n=2500, replicates=3, grid=ThresholdGrid(k_min=50, k_max=500),
        method=method, master_seed=7,
    )
    result = StudyResult(
        alpha_true=1.0, mean_alpha=1.02, bias=0.02, mse=0.0031, mean_threshold=8.5,
        per_replicate_alphas=[0.98, 1.02, 1.06], per_replicate_thresholds=[8.0, 8.5, 9.0],
    )
    return cfg, result


class TestStudyOutputs:

    def test_table(self):
        rows = _rows(study_table([_study_row(), _study_row(Method.GPD)]))
        assert list(rows[0]) == STUDY_COLUMNS
        assert [r["method"] for r in rows] == ["pareto", "gpd"]
        assert rows[0]["family"] == "stable"
        assert rows[0]["params"] == "alpha=1;beta=0;mu=0;sigma=1"
        assert float(rows[0]["bias"]) == 0.02
        assert rows[0]["failures"] == "0"

    def test_json(self):
        payload = json.loads(study_json([_study_row()]))
        meta = payload["metadata"]
        assert meta["generator"] == "PCG64"
        assert meta["seed"] == 7
        assert "Chambers-Mallows-Stuck" in meta["stable_parameterization"]
        study = payload["studies"][0]
        assert study["config"]["spec"]["family"] == "stable"
        assert study["result"]["per_replicate_alphas"] == [0.98, 1.02, 1.06]
        assert b"\"bias\": 2.0000000000000000e-02" in study_json([_study_row()])

    def test_json_deterministic(self):
        assert study_json([_study_row()]) == study_json([_study_row()])

    def test_histogram(self):
        data = histogram_csv([(Method.PARETO, [(1.25, 2), (1.75, 1)])])
        assert data == b"method,bin_center,count\npareto,1.25,2\npareto,1.75,1\n"
