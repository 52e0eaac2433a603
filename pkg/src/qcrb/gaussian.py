"""Gaussian shift family: closed-form bound, squeezed outcome law, sampling.

Estimating the two-component displacement of a thermal state with mean
photon number ``nbar`` admits a closed-form optimal risk
``(nbar + 1/2) tr G + sqrt(det G)``, attained by a squeezed-state
measurement whose outcome is exactly bivariate normal with covariance
``(nbar + 1/2) I + Ghat/2``, ``Ghat = sqrt(det G) G^-1``.  Because the
outcome law is classical, the Monte Carlo here samples that normal
directly; the truncated Fock representation at the bottom supports the
spin-to-Gaussian limit diagnostics.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bounds import validate_weight
from .errors import SingularityError, ValidationError
from .report import SimReport

DEFAULT_FOCK_CUTOFF = 60

_CHUNK = 1 << 16


def gaussian_rld_bound(nbar: float, weight) -> float:
    """(nbar + 1/2) tr G + sqrt(det G), the optimal per-copy weighted risk."""
    if nbar < 0:
        raise ValidationError(f"mean photon number must be >= 0, got {nbar}")
    g = validate_weight(weight)
    if g.shape != (2, 2):
        raise ValidationError(f"Gaussian weight must be 2x2, got {g.shape}")
    det = max(float(np.linalg.det(g)), 0.0)
    return (nbar + 0.5) * float(np.trace(g)) + float(np.sqrt(det))


@dataclass(frozen=True)
class SqueezedMeasurement:
    """Determinant-one squeezing matrix and the resulting outcome covariance."""

    ghat: np.ndarray
    outcome_cov: np.ndarray


def squeezed_params(weight, nbar: float) -> SqueezedMeasurement:
    """Squeezing matrix Ghat = sqrt(det G) G^-1 and outcome covariance.

    tr(G @ outcome_cov) reproduces ``gaussian_rld_bound(nbar, G)`` exactly.
    """
    if nbar < 0:
        raise ValidationError(f"mean photon number must be >= 0, got {nbar}")
    g = validate_weight(weight)
    if g.shape != (2, 2):
        raise ValidationError(f"Gaussian weight must be 2x2, got {g.shape}")
    det = float(np.linalg.det(g))
    if det <= 0:
        raise SingularityError("squeezed measurement needs a strictly positive weight")
    ghat = np.sqrt(det) * np.linalg.inv(g)
    ghat = (ghat + ghat.T) / 2
    cov = (nbar + 0.5) * np.eye(2) + ghat / 2
    return SqueezedMeasurement(ghat=ghat, outcome_cov=cov)


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    # counter-based per-chunk seeding: reproducible regardless of chunk order
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def standard_normal_pairs(rng: np.random.Generator, count: int) -> np.ndarray:
    """(count, 2) standard normals via the Box-Muller transform of uniforms."""
    u1 = rng.random(count)
    u2 = rng.random(count)
    radius = np.sqrt(-2.0 * np.log1p(-u1))  # 1 - u1 in (0, 1], log is finite
    angle = 2.0 * np.pi * u2
    return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)


def simulate_gaussian(
    nbar: float,
    theta,
    weight,
    copies: int,
    trials: int,
    seed: int,
    *,
    chunk: int = _CHUNK,
) -> SimReport:
    """Monte Carlo risk of the squeezed measurement averaged over ``copies``.

    Each trial draws ``copies`` outcomes from the bivariate normal with mean
    ``theta`` and the squeezed outcome covariance, averages them, and scores
    the weighted squared error.  The analytic prediction is the closed-form
    bound divided by ``copies``.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if copies < 1:
        raise ValidationError(f"copies must be >= 1, got {copies}")
    t = np.asarray(theta, dtype=float)
    if t.shape != (2,):
        raise ValidationError(f"shift parameter must have 2 components, got {t.shape}")
    g = validate_weight(weight)
    meas = squeezed_params(g, nbar)
    chol = np.linalg.cholesky(meas.outcome_cov)
    bound = gaussian_rld_bound(nbar, g)

    sums = []
    sqsums = []
    done = 0
    index = 0
    while done < trials:
        size = min(chunk, trials - done)
        rng = _chunk_rng(seed, index)
        z = standard_normal_pairs(rng, size * copies)
        outcomes = t + z @ chol.T
        dev = outcomes.reshape(size, copies, 2).mean(axis=1) - t
        risk = np.einsum("ij,jk,ik->i", dev, g, dev)
        sums.append(float(risk.sum()))
        sqsums.append(float(np.square(risk).sum()))
        done += size
        index += 1
    total = float(np.sum(sums))
    total_sq = float(np.sum(sqsums))
    mean = total / trials
    if trials >= 2:
        var = max(total_sq - trials * mean * mean, 0.0) / (trials - 1)
        std_error = float(np.sqrt(var / trials))
    else:
        std_error = float("nan")
    return SimReport(
        risk_estimate=mean,
        std_error=std_error,
        trials=trials,
        seed=seed,
        prediction=bound / copies,
        prediction_source="gaussian_rld_bound",
        n=copies,
        risk_kind="weighted",
    )


def ladder(dim: int) -> np.ndarray:
    """Annihilation operator on a ``dim``-dimensional truncated Fock space."""
    a = np.zeros((dim, dim))
    ns = np.arange(1, dim)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def quadratures(dim: int):
    """Position and momentum quadratures Q = (a + a*)/sqrt(2), P = (a - a*)/(i sqrt(2))."""
    a = ladder(dim)
    q = (a + a.T) / np.sqrt(2.0)
    p = (a - a.T) / (1j * np.sqrt(2.0))
    return q, p


class TruncatedGaussian(NamedTuple):
    """Thermal state and quadratures on a truncated Fock space, plus tail mass."""

    rho: np.ndarray
    q: np.ndarray
    p: np.ndarray
    tail: float


def gaussian_truncated(nbar: float, cutoff: int = DEFAULT_FOCK_CUTOFF) -> TruncatedGaussian:
    """Thermal state of mean photon number ``nbar`` truncated to ``cutoff`` levels.

    The diagonal weights ``(nbar/(nbar+1))^n / (nbar+1)`` are renormalized
    over the kept levels; ``tail`` reports the discarded geometric mass
    ``(nbar/(nbar+1))^cutoff``.
    """
    if cutoff < 2:
        raise ValidationError(f"cutoff must be >= 2, got {cutoff}")
    if nbar < 0:
        raise ValidationError(f"mean photon number must be >= 0, got {nbar}")
    ratio = nbar / (nbar + 1.0)
    weights = ratio ** np.arange(cutoff) / (nbar + 1.0)
    tail = float(ratio**cutoff)
    weights = weights / weights.sum()
    q, p = quadratures(cutoff)
    return TruncatedGaussian(rho=np.diag(weights).astype(complex), q=q, p=p, tail=tail)
