"""Per-candidate tail estimators and their average log-likelihood criteria.

Three ways to fit the m largest observations of a sample:

* Pareto MLE with the threshold at the order statistic x_(n-m),
* a generalized Pareto fit of the excesses over that threshold,
* least squares on the log-log empirical survival curve.

Each yields a criterion ``avg_loglik - PENALTY_DIM / m`` so that candidates
using different numbers of observations can be compared.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from errors import (
    BadExceedanceCount, BadPointCount, ConvergenceFailure, DegenerateExcesses,
    DegeneratePoints, DegenerateTail, EmptyInput, NonFiniteValue,
    NonPositiveIndex, NonPositiveParameter, NonPositiveValue,
)
from models import CandidateFit, GpdFit, Method, RegressionFit, Sample

logger = logging.getLogger(__name__)

PENALTY_DIM = 2
SIGMA_FLOOR = 1e-12
XI_BOUNDS = (-0.5, 5.0)

# Coarse profile grid used to bracket the GPD optimum before refinement
_GPD_NEG_POINTS = 40
_GPD_POS_POINTS = 80
_GPD_POS_SPAN = 1e-8
_TINY_TAU = 1e-12


# ---------------------------------------------------------------------------
# Samples
# ---------------------------------------------------------------------------

def make_sample(raw: Sequence[float] | np.ndarray, take_abs: bool = False, source: str = "") -> Sample:
    """Validate raw observations into an ascending, strictly positive sample."""
    arr = np.array(raw, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyInput("no observations")

    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise NonFiniteValue(int(bad[0]), float(arr[bad[0]]))

    if take_abs:
        arr = np.abs(arr)

    bad = np.flatnonzero(arr <= 0)
    if bad.size:
        raise NonPositiveValue(int(bad[0]), float(arr[bad[0]]))

    if arr.size < 2:
        raise EmptyInput("at least two observations are required")

    arr.sort(kind="stable")
    arr.setflags(write=False)
    return Sample(values=arr, abs_applied=take_abs, source=source)


def _check_count(s: Sample, m: int, minimum: int, error: type[Exception]) -> None:
    if not minimum <= m < s.n:
        raise error(f"count {m} outside [{minimum}, {s.n - 1}] for n={s.n}")


def _threshold(s: Sample, m: int) -> float:
    # x_(n-m): the order statistic just below the m largest
    return s.order_stat(s.n - m)


# ---------------------------------------------------------------------------
# Pareto likelihood
# ---------------------------------------------------------------------------

def pareto_avg_loglik(alpha: float, threshold: float) -> float:
    """Maximized Pareto log-likelihood per observation."""
    if not (alpha > 0 and threshold > 0 and math.isfinite(alpha) and math.isfinite(threshold)):
        raise NonPositiveParameter(f"alpha={alpha!r}, threshold={threshold!r}")
    return math.log(alpha) - math.log(threshold) - (alpha + 1.0) / alpha


def pareto_full_fit(s: Sample) -> tuple[float, float, float]:
    """Whole-sample Pareto MLE. Returns (alpha, beta, avg_loglik) with beta = x_(1)."""
    beta = s.order_stat(1)
    total = float(np.log(s.values / beta).sum())
    if total <= 0:
        raise DegenerateTail("all observations equal the minimum")
    alpha = s.n / total
    return alpha, beta, pareto_avg_loglik(alpha, beta)


def pareto_mle(s: Sample, m: int) -> CandidateFit:
    """Pareto fit of the m largest observations over the threshold x_(n-m)."""
    _check_count(s, m, 2, BadExceedanceCount)
    threshold = _threshold(s, m)
    total = float(np.log(s.top(m) / threshold).sum())
    if total <= 0:
        raise DegenerateTail(f"the {m} largest values all equal the threshold {threshold!r}")

    alpha = m / total
    avg = pareto_avg_loglik(alpha, threshold)
    return CandidateFit(
        m=m, threshold=threshold, alpha_hat=alpha,
        avg_loglik=avg, criterion=avg - PENALTY_DIM / m,
    )


def hill_estimator(s: Sample, m: int) -> float:
    _check_count(s, m, 2, BadExceedanceCount)
    gap = float(np.mean(np.log(s.top(m)))) - math.log(_threshold(s, m))
    if gap <= 0:
        raise DegenerateTail(f"the {m} largest values all equal the threshold")
    return 1.0 / gap


# ---------------------------------------------------------------------------
# Generalized Pareto excesses
# ---------------------------------------------------------------------------

def gpd_loglik(excesses: np.ndarray, xi: float, sigma: float) -> float:
    """GPD log-likelihood of non-negative excesses; -inf outside the support."""
    y = np.asarray(excesses, dtype=float)
    if not sigma > 0:
        return -math.inf
    ty = (xi / sigma) * y
    if np.any(ty <= -1.0):
        return -math.inf
    k = y.size
    if abs(xi) < _TINY_TAU:
        return -k * math.log(sigma) - float(y.sum()) / sigma
    return -k * math.log(sigma) - (1.0 / xi + 1.0) * float(np.log1p(ty).sum())


def _profile_xi(t: np.ndarray | float, z: np.ndarray) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.log1p(np.outer(t, z)).mean(axis=1)


def _profile(t: np.ndarray | float, z: np.ndarray) -> np.ndarray:
    """Profile log-likelihood per excess in the rescaled shape-to-scale ratio t.

    Excesses are scaled to unit mean, so sigma = mean(y) * xi / t and the
    constant -log(mean(y)) is dropped.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    xi = _profile_xi(t, z)
    small = np.abs(t) < _TINY_TAU
    ratio = np.where(small, 1.0, xi / np.where(small, 1.0, t))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = -np.log(ratio) - 1.0 - xi
    return np.where(np.isfinite(out), out, -np.inf)


def _tau_bounds(z: np.ndarray) -> tuple[float, float]:
    lo_xi, hi_xi = XI_BOUNDS
    support = -1.0 / float(z.max())
    edge = support * (1.0 - 1e-9)
    if _profile_xi(edge, z)[0] < lo_xi:
        t_lo = brentq(lambda t: _profile_xi(t, z)[0] - lo_xi, edge, 0.0)
    else:
        t_lo = edge

    hi = 1.0
    while _profile_xi(hi, z)[0] < hi_xi:
        hi *= 2.0
        if hi > 1e300:
            raise ConvergenceFailure("could not bracket the upper shape bound")
    t_hi = brentq(lambda t: _profile_xi(t, z)[0] - hi_xi, 0.0, hi)
    return t_lo, t_hi


def gpd_excess_mle(s: Sample, k: int) -> GpdFit:
    """GPD fit of the k excesses over u = x_(n-k) via the 1-D profile likelihood."""
    _check_count(s, k, 2, BadExceedanceCount)
    u = _threshold(s, k)
    y = s.top(k) - u
    if np.ptp(y) == 0:
        raise DegenerateExcesses(f"the {k} excesses over {u!r} are all equal")

    ybar = float(y.mean())
    z = y / ybar

    t_lo, t_hi = _tau_bounds(z)
    grid = np.concatenate([
        np.linspace(t_lo, 0.0, _GPD_NEG_POINTS + 1),
        np.geomspace(t_hi * _GPD_POS_SPAN, t_hi, _GPD_POS_POINTS),
    ])
    values = _profile(grid, z)
    i = int(np.argmax(values))
    if not np.isfinite(values[i]) or i == 0 or i == grid.size - 1:
        logger.debug("GPD profile optimum on search boundary (k=%d)", k)
        raise ConvergenceFailure(f"profile optimum on search boundary for k={k}")

    lo, hi = float(grid[i - 1]), float(grid[i + 1])
    res = minimize_scalar(
        lambda t: -_profile(t, z)[0],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-10 * (hi - lo) + 1e-15, "maxiter": 500},
    )
    if not res.success or not math.isfinite(res.fun):
        raise ConvergenceFailure(f"bounded search failed for k={k}: {res.message}")

    t = float(res.x) if -res.fun >= values[i] else float(grid[i])
    xi = float(_profile_xi(t, z)[0])
    sigma = ybar * (xi / t if abs(t) >= _TINY_TAU else 1.0)
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ConvergenceFailure(f"non-positive scale for k={k}")

    ll = gpd_loglik(y, xi, sigma)
    if not math.isfinite(ll):
        raise ConvergenceFailure(f"fit violates the support constraint for k={k}")

    avg = ll / k
    return GpdFit(
        xi_hat=xi, sigma_hat=sigma, threshold=u, k=k,
        avg_loglik=avg, criterion=avg - PENALTY_DIM / k,
    )


# ---------------------------------------------------------------------------
# Power-tail regression
# ---------------------------------------------------------------------------

def ols_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line y = intercept + slope * x.

    Returns (slope, intercept, sigma) where sigma is the residual RMS with the
    1/m normalization.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0:
        raise DegeneratePoints("no variance in the regressor")
    slope = float(dx @ (y - y.mean())) / sxx
    intercept = float(y.mean()) - slope * float(x.mean())
    resid = y - (intercept + slope * x)
    sigma = math.sqrt(float(resid @ resid) / x.size)
    return slope, intercept, sigma


def survival_regression(s: Sample, m: int) -> RegressionFit:
    """Regress log empirical survival on log x over the m largest observations.

    The j-th largest observation gets the Hazen survival (j - 0.5) / n.
    """
    _check_count(s, m, 3, BadPointCount)
    top = s.top(m)[::-1]
    log_x = np.log(top)
    if np.ptp(log_x) == 0:
        raise DegeneratePoints(f"the {m} largest values are identical")

    j = np.arange(1, m + 1, dtype=float)
    log_s = np.log((j - 0.5) / s.n)
    slope, intercept, sigma = ols_line(log_x, log_s)

    proxy = -math.log(max(sigma, SIGMA_FLOOR))
    return RegressionFit(
        m=m, threshold=_threshold(s, m), slope=slope, intercept=intercept,
        alpha_hat=-slope, sigma_hat=sigma, avg_loglik_proxy=proxy,
        criterion=proxy - PENALTY_DIM / m,
    )


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def candidate_from_gpd(fit: GpdFit) -> CandidateFit:
    if not fit.xi_hat > 0:
        raise NonPositiveIndex(f"shape {fit.xi_hat!r} has no positive tail index")
    return CandidateFit(
        m=fit.k, threshold=fit.threshold, alpha_hat=1.0 / fit.xi_hat,
        avg_loglik=fit.avg_loglik, criterion=fit.criterion,
    )


def candidate_from_regression(fit: RegressionFit) -> CandidateFit:
    if not fit.alpha_hat > 0:
        raise NonPositiveIndex(f"slope {fit.slope!r} is not negative")
    return CandidateFit(
        m=fit.m, threshold=fit.threshold, alpha_hat=fit.alpha_hat,
        avg_loglik=fit.avg_loglik_proxy, criterion=fit.criterion,
    )


def fit_candidate(s: Sample, m: int, method: Method) -> CandidateFit:
    fitters = {
        Method.PARETO: pareto_mle,
        Method.REGRESSION: lambda s, m: candidate_from_regression(survival_regression(s, m)),
        Method.GPD: lambda s, m: candidate_from_gpd(gpd_excess_mle(s, m)),
    }
    return fitters[Method(method)](s, m)
