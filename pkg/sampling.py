"""Seeded variate generation for the simulated families.

Streams are PCG64 generators keyed by (master_seed, stream_id) through
``numpy.random.SeedSequence`` spawn keys, so replicate r always sees the same
numbers regardless of which worker draws it.
"""

from __future__ import annotations

import math

import numpy as np

from errors import BadSpec
from models import DistributionSpec, Family, SeededStream

GENERATOR_NAME = "PCG64"
STABLE_PARAMETERIZATION = "Chambers-Mallows-Stuck standard scale, symmetric (beta=0)"


def _check_common(spec: DistributionSpec, family: Family, n: int) -> None:
    if spec.family is not family:
        raise BadSpec(f"expected family {family.value}, got {spec.family.value}")
    if not (spec.sigma > 0 and math.isfinite(spec.sigma)):
        raise BadSpec(f"sigma must be positive, got {spec.sigma!r}")
    if not math.isfinite(spec.mu):
        raise BadSpec(f"mu must be finite, got {spec.mu!r}")
    if n < 0:
        raise BadSpec(f"sample size must be non-negative, got {n}")


def sample_stable(spec: DistributionSpec, n: int, stream: SeededStream) -> np.ndarray:
    """Symmetric alpha-stable variates by the Chambers-Mallows-Stuck transform."""
    _check_common(spec, Family.STABLE, n)
    alpha = spec.alpha
    if alpha is None or not 0 < alpha <= 2:
        raise BadSpec(f"stable index must lie in (0, 2], got {alpha!r}")
    if spec.beta != 0:
        raise BadSpec("only the symmetric stable family (beta=0) is supported")

    rng = stream.generator()
    u = rng.uniform(-math.pi / 2, math.pi / 2, size=n)
    e = rng.standard_exponential(size=n)

    if alpha == 1:
        x = np.tan(u)
    else:
        x = (
            np.sin(alpha * u) / np.cos(u) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha)
        )
    return spec.mu + spec.sigma * x


def sample_student_t(spec: DistributionSpec, n: int, stream: SeededStream) -> np.ndarray:
    """mu + sigma * Z / sqrt(chi2_nu / nu)."""
    _check_common(spec, Family.STUDENT_T, n)
    nu = spec.nu
    if nu is None or not (nu > 0 and math.isfinite(nu)):
        raise BadSpec(f"degrees of freedom must be positive, got {nu!r}")

    rng = stream.generator()
    z = rng.standard_normal(size=n)
    chi2 = rng.chisquare(nu, size=n)
    return spec.mu + spec.sigma * z / np.sqrt(chi2 / nu)


def gpd_quantile(spec: DistributionSpec, u: float | np.ndarray) -> float | np.ndarray:
    """Inverse GPD distribution function mu + sigma * ((1 - u)^-xi - 1) / xi."""
    xi = spec.xi
    if xi is None or not (xi > 0 and math.isfinite(xi)):
        raise BadSpec(f"GPD shape must be positive, got {xi!r}")
    return spec.mu + spec.sigma * ((1.0 - np.asarray(u)) ** (-xi) - 1.0) / xi


def sample_gpd(spec: DistributionSpec, n: int, stream: SeededStream) -> np.ndarray:
    _check_common(spec, Family.GPD, n)
    u = stream.generator().uniform(size=n)
    return np.asarray(gpd_quantile(spec, u), dtype=float)


def draw(spec: DistributionSpec, n: int, stream: SeededStream) -> np.ndarray:
    samplers = {
        Family.STABLE: sample_stable,
        Family.STUDENT_T: sample_student_t,
        Family.GPD: sample_gpd,
    }
    return samplers[spec.family](spec, n, stream)
