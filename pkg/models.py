"""Pydantic models for the tail-index averaging pipeline."""

from __future__ import annotations

import enum
import hashlib

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import NonPositiveParameter


# --- Enums ---

class Method(str, enum.Enum):
    PARETO = "pareto"
    REGRESSION = "regression"
    GPD = "gpd"


class Family(str, enum.Enum):
    STABLE = "stable"
    STUDENT_T = "student_t"
    GPD = "gpd"


class InputFormat(str, enum.Enum):
    PLAIN = "plain"
    DELIMITED = "delimited"


class PlotKind(str, enum.Enum):
    SURVIVAL_FIT = "survival_fit"
    QQ = "qq"


# --- Samples ---

class Sample(BaseModel):
    """Ascending, strictly positive observations. Build through ``make_sample``."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    abs_applied: bool = False
    source: str = ""

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def order_stat(self, k: int) -> float:
        """The k-th smallest observation x_(k), 1-based."""
        return float(self.values[k - 1])

    def top(self, m: int) -> np.ndarray:
        """The m largest observations, ascending."""
        return self.values[self.n - m:]

    def scaled(self, c: float) -> Sample:
        if not c > 0:
            raise NonPositiveParameter(f"scale factor must be positive, got {c!r}")
        values = self.values * c
        values.setflags(write=False)
        return Sample(values=values, abs_applied=self.abs_applied, source=self.source)

    def digest(self) -> str:
        """SHA-256 over the 17-significant-digit rendering of the values."""
        text = "\n".join(format(float(v), ".17g") for v in self.values)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


# --- Per-candidate fits ---

class CandidateFit(BaseModel):
    m: int
    threshold: float
    alpha_hat: float
    avg_loglik: float
    criterion: float


class GpdFit(BaseModel):
    xi_hat: float
    sigma_hat: float
    threshold: float
    k: int
    avg_loglik: float
    criterion: float


class RegressionFit(BaseModel):
    m: int
    threshold: float
    slope: float
    intercept: float
    alpha_hat: float
    sigma_hat: float
    avg_loglik_proxy: float
    criterion: float


# --- Averaging ---

class ThresholdGrid(BaseModel):
    k_min: int
    k_max: int
    stride: int = 1

    def candidates(self) -> list[int]:
        return list(range(self.k_min, self.k_max + 1, self.stride))


class WeightEntry(BaseModel):
    m: int
    criterion: float
    weight: float


class SkippedCandidate(BaseModel):
    m: int
    reason: str


class WeightTable(BaseModel):
    entries: list[WeightEntry] = Field(default_factory=list)
    skipped: list[SkippedCandidate] = Field(default_factory=list)

    def weights_by_m(self) -> dict[int, float]:
        return {e.m: e.weight for e in self.entries}


class WeightedEstimate(BaseModel):
    alpha_bar: float
    xi_bar: float
    threshold_bar: float
    m_eff: int
    method: Method


# --- Simulation ---

def _g(x: float | None) -> str:
    return "?" if x is None else format(x, "g")


class DistributionSpec(BaseModel):
    family: Family
    alpha: float | None = None
    beta: float = 0.0
    nu: float | None = None
    xi: float | None = None
    mu: float = 0.0
    sigma: float = 1.0

    @property
    def alpha_true(self) -> float:
        """Tail index the estimators should recover."""
        if self.family is Family.STABLE:
            return float(self.alpha)
        if self.family is Family.STUDENT_T:
            return float(self.nu)
        return 1.0 / float(self.xi)

    def label(self) -> str:
        if self.family is Family.STABLE:
            shape = f"alpha={_g(self.alpha)};beta={self.beta:g}"
        elif self.family is Family.STUDENT_T:
            shape = f"nu={_g(self.nu)}"
        else:
            shape = f"xi={_g(self.xi)}"
        return f"{shape};mu={self.mu:g};sigma={self.sigma:g}"


class SeededStream(BaseModel):
    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))


class StudyConfig(BaseModel):
    spec: DistributionSpec
    n: int
    replicates: int
    grid: ThresholdGrid
    method: Method = Method.PARETO
    master_seed: int = 0
    take_abs: bool | None = None

    @model_validator(mode="after")
    def _default_abs(self) -> StudyConfig:
        symmetric = self.spec.family in (Family.STABLE, Family.STUDENT_T)
        if self.take_abs is None:
            self.take_abs = symmetric
        elif self.take_abs != symmetric:
            raise ValueError(
                f"take_abs must be {symmetric} for family {self.spec.family.value}"
            )
        return self


class StudyResult(BaseModel):
    alpha_true: float
    mean_alpha: float
    bias: float
    mse: float
    mean_threshold: float
    per_replicate_alphas: list[float]
    per_replicate_thresholds: list[float] = Field(default_factory=list)
    failures: int = 0

    @property
    def variance(self) -> float:
        return float(np.var(np.asarray(self.per_replicate_alphas)))


# --- Report models ---

class WeightedSummary(BaseModel):
    alpha: float
    xi: float
    threshold: float
    m_eff: int


class CandidateRow(BaseModel):
    m: int
    threshold: float
    alpha: float
    criterion: float
    weight: float


class ReportMetadata(BaseModel):
    seed: int | None = None
    generator: str | None = None
    input_digest: str
    version: str
    n: int
    abs_applied: bool = False
    source: str = ""


class Report(BaseModel):
    method: Method
    grid: ThresholdGrid
    weighted: WeightedSummary
    candidates: list[CandidateRow]
    skipped: list[SkippedCandidate] = Field(default_factory=list)
    metadata: ReportMetadata


class PlotSeries(BaseModel):
    kind: PlotKind
    rows: list[tuple[float, float, float]]
