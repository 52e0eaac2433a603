"""Collective covariant estimation on n qubit copies.

The projective measurement onto total-spin blocks yields an outcome j with
the exactly computable distribution ``p_nr``; conditioned on j, the
covariant angular measurement produces (phi, psi).  The estimator maps
``(j, phi, psi)`` to the Bloch vector ``(2j/n) (cos psi sin phi,
sin psi sin phi, cos phi)`` with the reference axis aligned to the true
direction.  Risks are accumulated through the exact radial/angular
decomposition, with exact support sums available as oracles, alongside the
general-weight covariance prediction, closed-form asymptotics, and a
classical Fisher-information decomposition utility.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.special import gammaln

from .errors import SingularityError, ValidationError
from .linalg import require_real_symmetric
from .qubit import BOUNDARY_EPS, bloch_rotation, check_radius
from .report import SimReport
from .spin import f_closed, inverse_cdf_cos_phi, moment_matrices

_CHUNK = 1 << 16

# Distribution weights this many orders of magnitude below the mode are
# dropped from semi-analytic sums over the support; far below fp resolution.
_WEIGHT_CUTOFF = 1e-16

# Closed-form score switches to the smooth sum form near the origin, where
# the -1/r term of the product form cancels catastrophically.
_SCORE_SWITCH = 1e-2


def _support(n: int):
    """Total-spin support j = n/2, n/2 - 1, ..., (0 or 1/2) and k = n/2 - j."""
    ks = np.arange(0, n // 2 + 1)
    return n / 2 - ks, ks


def _log_multiplicity(n: int, ks) -> np.ndarray:
    """log of C(n, k) - C(n, k-1), the total-spin block multiplicity.

    The binomial is accumulated through the stepwise ratio recurrence rather
    than a log-gamma difference, and the subtraction uses the exact ratio
    C(n, k-1)/C(n, k) = k/(n - k + 1).  Extended precision keeps the
    exponent rounding well below the 1e-12 normalization budget at n ~ 1e4.
    """
    ks = np.asarray(ks)
    kmax = int(ks.max()) if ks.size else 0
    idx = np.arange(1, kmax + 1, dtype=np.longdouble)
    steps = np.log((n - idx + 1.0) / idx)
    log_binom = np.concatenate([np.zeros(1, dtype=np.longdouble), np.cumsum(steps)])[ks]
    return log_binom + np.log1p(-np.asarray(ks, dtype=np.longdouble) / (n - ks + 1.0))


@dataclass(frozen=True)
class SpinDistribution:
    """Exact distribution of the total-spin outcome on n copies at radius r."""

    n: int
    r: float
    support: np.ndarray
    probs: np.ndarray
    normalization_drift: float

    def draw(self, seed: int, count: int) -> np.ndarray:
        """Sample ``count`` outcomes by inverted cumulative table."""
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
        return self.draw_with(rng, count)

    def draw_with(self, rng: np.random.Generator, count: int) -> np.ndarray:
        cdf = np.cumsum(self.probs)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, rng.random(count), side="right")
        return self.support[idx]


def p_nr(n: int, r: float) -> SpinDistribution:
    """Total-spin outcome distribution, computed stably in log space.

    At the origin the weights are ``2^-n (C(n,k) - C(n,k-1)) (2j+1)``; for
    r > 0 the geometric sum over magnetic levels collapses to the product
    form ``(1/r) (C(n,k) - C(n,k-1)) q^(n/2-j) (1-q)^(n/2+j+1)
    (1 - s^(2j+1))`` with ``q = (1-r)/2`` and ``s = (1-r)/(1+r)``.
    """
    if n < 1:
        raise ValidationError(f"copy count must be >= 1, got {n}")
    check_radius(r)
    js, ks = _support(n)
    logc = _log_multiplicity(n, ks)
    jsl = np.asarray(js, dtype=np.longdouble)
    if r == 0.0:
        logp = logc - n * np.log(np.longdouble(2.0)) + np.log(2 * jsl + 1)
    else:
        q = (np.longdouble(1.0) - np.longdouble(r)) / 2
        s = (np.longdouble(1.0) - np.longdouble(r)) / (np.longdouble(1.0) + np.longdouble(r))
        logp = (
            logc
            - np.log(np.longdouble(r))
            + (n / 2 - jsl) * np.log(q)
            + (n / 2 + jsl + 1) * np.log1p(-q)
            + np.log1p(-(s ** (2 * jsl + 1)))
        )
    probs = np.exp(logp)
    total = probs.sum()
    drift = float(abs(total - 1.0))
    return SpinDistribution(
        n=n,
        r=r,
        support=js,
        probs=(probs / total).astype(float),
        normalization_drift=drift,
    )


def telescoping_pnr(n: int, r: float) -> np.ndarray:
    """Independent oracle for ``p_nr``: direct sum over magnetic levels.

    Quadratic in n; intended for cross-checks at small n.
    """
    if n < 1:
        raise ValidationError(f"copy count must be >= 1, got {n}")
    check_radius(r)
    js, ks = _support(n)
    q = (1.0 - r) / 2
    mult = np.exp(_log_multiplicity(n, ks))
    probs = np.empty_like(js)
    for idx, j in enumerate(js):
        i = np.arange(0, int(round(2 * j)) + 1)
        probs[idx] = mult[idx] * np.sum(q ** (n / 2 - j + i) * (1 - q) ** (n / 2 + j - i))
    return probs


def score_pnr(n: int, r: float) -> np.ndarray:
    """d log P / dr over the support.

    For r away from zero the derivative of the log product form is used;
    near the origin the smooth sum form avoids the cancelling -1/r term.
    The score is identically zero at r = 0.
    """
    if n < 1:
        raise ValidationError(f"copy count must be >= 1, got {n}")
    check_radius(r)
    js, ks = _support(n)
    if r == 0.0:
        return np.zeros_like(js)  # all block probabilities are stationary
    if r >= _SCORE_SWITCH:
        s = (1.0 - r) / (1.0 + r)
        two_j = 2 * js
        tail = s ** (two_j + 1)
        return (
            -1.0 / r
            - (n / 2 - js) / (1.0 - r)
            + (n / 2 + js + 1) / (1.0 + r)
            + 2.0 * (two_j + 1) * (s**two_j) / ((1.0 + r) ** 2 * (1.0 - tail))
        )
    q = (1.0 - r) / 2
    scores = np.empty_like(js)
    for idx, j in enumerate(js):
        i = np.arange(0, int(round(2 * j)) + 1)
        a = n / 2 - j + i
        b = n / 2 + j - i
        logt = a * np.log(q) + b * np.log1p(-q)
        t = np.exp(logt - logt.max())
        # d/dr of q^a (1-q)^b with q'(r) = -1/2
        scores[idx] = -0.5 * np.sum(t * (a / q - b / (1 - q))) / np.sum(t)
    return scores


def fisher_pnr(n: int, r: float) -> float:
    """Fisher information of the total-spin outcome about the radial coordinate.

    Zero for n = 1 (single-point support) and at r = 0 (stationary scores);
    for n >= 2 and r > 0 the inverse behaves like
    ``(1-r^2)/n + (1-r^2)/(r^2 n^2)``.
    """
    dist = p_nr(n, r)
    if len(dist.support) == 1:
        return 0.0
    scores = score_pnr(n, r)
    return float(np.sum(dist.probs * scores**2))


def theta3_hat(n: int, r0: float, j) -> Union[float, np.ndarray]:
    """Score-based locally unbiased radial estimate for outcome(s) j.

    ``score(j)/J + r0``; its exact mean over the outcome distribution is r0
    and its exact variance is 1/J.
    """
    info = fisher_pnr(n, r0)
    if info <= 0:
        raise SingularityError(
            f"radial information is degenerate at (n={n}, r={r0}); no estimator exists"
        )
    dist = p_nr(n, r0)
    scores = score_pnr(n, r0)
    j_arr = np.asarray(j, dtype=float)
    idx = np.searchsorted(-dist.support, -j_arr)  # support is descending
    if np.any(idx >= len(dist.support)) or np.any(
        np.abs(dist.support[np.minimum(idx, len(dist.support) - 1)] - j_arr) > 1e-9
    ):
        raise ValidationError(f"outcome {j} not in the total-spin support for n={n}")
    out = scores[idx] / info + r0
    return float(out) if np.isscalar(j) else out


def _f_table(n: int, r: float) -> np.ndarray:
    """Mean of 1 - cos(phi) for every block in the support.

    The j = 0 block and the origin (where the block state is maximally
    mixed) are uniform on the sphere, with mean exactly 1.
    """
    js, _ = _support(n)
    if r == 0.0:
        return np.ones_like(js)
    p = (1.0 - r) / (1.0 + r)
    out = np.empty_like(js)
    for idx, j in enumerate(js):
        out[idx] = 1.0 if j == 0 else f_closed(j, p)
    return out


def exact_euclidean_risk(n: int, r: float) -> float:
    """Exact expected squared Euclidean error of the covariant estimator.

    Support sum of ``(2j/n - r)^2 + 2 r (2j/n) F(j, p(r))``; serves as the
    oracle for the Monte Carlo path.
    """
    dist = p_nr(n, r)
    jhat = 2 * dist.support / n
    f = _f_table(n, r)
    return float(np.sum(dist.probs * ((jhat - r) ** 2 + 2 * r * jhat * f)))


def exact_bures_risk(n: int, r: float) -> float:
    """Exact expected squared Bures distance of the covariant estimator."""
    dist = p_nr(n, r)
    jhat = 2 * dist.support / n
    f = _f_table(n, r)
    root = np.sqrt(np.clip(1 - jhat**2, 0.0, None))
    vals = 0.5 * (1 - np.sqrt(1 - r * r) * root - jhat * r + jhat * r * f)
    return float(np.sum(dist.probs * vals))


def euclidean_prediction(n: int, r: float) -> float:
    """Second-order analytic prediction of the expected squared Euclidean error.

    For r > 0 this is ``(3 + 2r - r^2)/n - (2(1-r)/r + 4/(1+r))/n^2``; at
    the origin the expansion ``3/n - 4 sqrt(2)/(sqrt(pi) n^1.5) + 2/n^2``.
    """
    if r == 0.0:
        return origin_approx(n)
    return (3 + 2 * r - r * r) / n - (2 * (1 - r) / r + 4 / (1 + r)) / n**2


def bures_prediction(n: int, r: float) -> float:
    """Leading-order prediction (3/4 + r/2)/n of the expected squared Bures distance."""
    return (0.75 + r / 2) / n


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def simulate_covariant(
    n: int,
    theta,
    risk: str,
    trials: int,
    seed: int,
    *,
    full_vector: bool = False,
    chunk: int = _CHUNK,
) -> SimReport:
    """Monte Carlo risk of the collective covariant estimator on n copies.

    Per trial: draw j from the total-spin distribution, then (phi, psi)
    from the covariant outcome law of the j block.  By default the risk is
    accumulated through the exact decomposition (radial term plus
    ``2 r (2j/n)(1 - cos phi)`` for Euclidean; the fidelity expression for
    Bures), which is rotation invariant.  ``full_vector=True`` instead
    reconstructs the 3-vector estimate, with the reference axis rotated
    onto theta (z axis at the origin), and scores it directly.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if risk not in ("euclidean", "bures"):
        raise ValidationError(f"risk must be 'euclidean' or 'bures', got {risk!r}")
    t = np.asarray(theta, dtype=float)
    if t.shape != (3,):
        raise ValidationError(f"Bloch vector must have 3 components, got {t.shape}")
    r = float(np.linalg.norm(t))
    check_radius(r)
    dist = p_nr(n, r)
    p = (1.0 - r) / (1.0 + r)
    rot, _ = bloch_rotation(t)
    sqrt1mr2 = np.sqrt(1 - r * r)

    sums = []
    sqsums = []
    done = 0
    index = 0
    while done < trials:
        size = min(chunk, trials - done)
        rng = _chunk_rng(seed, index)
        j = dist.draw_with(rng, size)
        x = inverse_cdf_cos_phi(2 * j, p, rng.random(size))  # cos(phi)
        psi = 2 * np.pi * rng.random(size)
        jhat = 2 * j / n
        if full_vector:
            sinphi = np.sqrt(np.clip(1 - x * x, 0.0, None))
            est = np.stack(
                [jhat * np.cos(psi) * sinphi, jhat * np.sin(psi) * sinphi, jhat * x],
                axis=1,
            ) @ rot.T
            if risk == "euclidean":
                vals = np.sum((est - t) ** 2, axis=1)
            else:
                vals = 0.5 * (
                    1
                    - sqrt1mr2 * np.sqrt(np.clip(1 - jhat**2, 0.0, None))
                    - est @ t
                )
        else:
            if risk == "euclidean":
                vals = (jhat - r) ** 2 + 2 * r * jhat * (1 - x)
            else:
                vals = 0.5 * (
                    1
                    - sqrt1mr2 * np.sqrt(np.clip(1 - jhat**2, 0.0, None))
                    - jhat * r * x
                )
        sums.append(float(vals.sum()))
        sqsums.append(float(np.square(vals).sum()))
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
    if risk == "euclidean":
        prediction = euclidean_prediction(n, r)
        source = "euclidean_second_order" if r > 0 else "origin_second_order"
    else:
        prediction = bures_prediction(n, r)
        source = "bures_asymptote"
    return SimReport(
        risk_estimate=mean,
        std_error=std_error,
        trials=trials,
        seed=seed,
        prediction=prediction,
        prediction_source=source,
        n=n,
        risk_kind=risk,
    )


def predict_general_cov(n: int, r: float, gtilde) -> np.ndarray:
    """Semi-analytic covariance prediction of the general-weight estimator.

    Block diagonal: the transverse 2x2 block averages
    ``B(j)^-1 V(j) B(j)^-T`` over the total-spin distribution (the j = 0
    block carries no transverse information and is excluded; its weight is
    exponentially small for r > 0), and the radial entry is the inverse
    Fisher information of the total-spin outcome.  ``n * prediction``
    approaches ``diag(I + r sqrt(det Gt) Gt^-1, 1 - r^2)``.
    """
    if n < 2:
        raise ValidationError(f"copy count must be >= 2, got {n}")
    if r <= 0.0:
        raise SingularityError("general-weight prediction needs r > 0")
    gt = require_real_symmetric(gtilde, name="2x2 weight")
    dist = p_nr(n, r)
    keep = (dist.support > 0) & (dist.probs > _WEIGHT_CUTOFF * dist.probs.max())
    block = np.zeros((2, 2))
    for j, prob in zip(dist.support[keep], dist.probs[keep]):
        bmat, vmat = moment_matrices(j, r, gt)
        binv = np.linalg.inv(bmat)
        block += prob * (binv @ vmat @ binv.T)
    radial_var = 1.0 / fisher_pnr(n, r)
    out = np.zeros((3, 3))
    out[:2, :2] = (block + block.T) / 2
    out[2, 2] = radial_var
    return out


def origin_exact(n: int) -> float:
    """Exact second moment of the estimate magnitude at the origin."""
    dist = p_nr(n, 0.0)
    return float(np.sum(dist.probs * (2 * dist.support / n) ** 2))


def origin_approx(n: int) -> float:
    """Expansion 3/n - 4 sqrt(2)/(sqrt(pi) n^1.5) + 2/n^2 of ``origin_exact``."""
    return 3.0 / n - 4 * np.sqrt(2.0) / (np.sqrt(np.pi) * n**1.5) + 2.0 / n**2


@dataclass(frozen=True)
class AsymptoticPredictions:
    """Closed-form expansions paired with their exact support-sum counterparts.

    Radial and information fields are None at the origin, where the origin
    expansion applies instead.
    """

    n: int
    r: float
    radial_mse_exact: Optional[float]
    radial_mse_approx: Optional[float]
    jnr_inv_exact: Optional[float]
    jnr_inv_approx: Optional[float]
    origin_exact: float
    origin_approx: float

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "radial_mse_exact": self.radial_mse_exact,
            "radial_mse_approx": self.radial_mse_approx,
            "jnr_inv_exact": self.jnr_inv_exact,
            "jnr_inv_approx": self.jnr_inv_approx,
            "origin_exact": self.origin_exact,
            "origin_approx": self.origin_approx,
        }


def asymptotic_predictions(n: int, r: float) -> AsymptoticPredictions:
    """Evaluate the closed-form expansions at (n, r) next to exact sums."""
    if n < 2:
        raise ValidationError(f"copy count must be >= 2, got {n}")
    check_radius(r)
    if r > 0.0:
        dist = p_nr(n, r)
        jhat = 2 * dist.support / n
        radial_exact = float(np.sum(dist.probs * (jhat - r) ** 2))
        radial_approx = (1 - r * r) / n - 2 * (1 - r) / (r * n * n)
        jnr_exact = 1.0 / fisher_pnr(n, r)
        jnr_approx = (1 - r * r) / n + (1 - r * r) / (r * r * n * n)
    else:
        radial_exact = radial_approx = jnr_exact = jnr_approx = None
    return AsymptoticPredictions(
        n=n,
        r=r,
        radial_mse_exact=radial_exact,
        radial_mse_approx=radial_approx,
        jnr_inv_exact=jnr_exact,
        jnr_inv_approx=jnr_approx,
        origin_exact=origin_exact(n),
        origin_approx=origin_approx(n),
    )


def origin_fisher_deficit(n: int) -> float:
    """Exact information deficit sum of the covariant measurement at the origin."""
    dist = p_nr(n, 0.0)
    return float(np.sum(dist.probs * (4.0 / 3.0) * dist.support))


def origin_fisher_deficit_approx(n: int) -> float:
    """Expansion ``4 sqrt(2)/(3 sqrt(pi)) sqrt(n) + 2/3`` of the deficit sum."""
    return 4 * np.sqrt(2.0) / (3 * np.sqrt(np.pi)) * np.sqrt(n) + 2.0 / 3.0


def origin_cov_fisher(n: int) -> float:
    """Exact per-axis Fisher information of the covariant measurement at the origin.

    ``n`` minus the deficit sum; the ratio to n approaches 1 with deficit
    of order 1/sqrt(n).
    """
    if n < 1:
        raise ValidationError(f"copy count must be >= 1, got {n}")
    return float(n) - origin_fisher_deficit(n)


@dataclass(frozen=True)
class FisherDecomposition:
    """Chain-rule split of scalar Fisher information over a two-stage outcome."""

    j_total: float
    j_marginal: float
    loss_by_omega1: np.ndarray


def fisher_decomposition(
    joint: Callable[[float], Sequence[np.ndarray]],
    theta0: float,
    step: Optional[float] = None,
) -> FisherDecomposition:
    """Decompose the Fisher information of a finite joint family p(w1, w2).

    ``joint(theta)`` must return the joint probabilities as a 2D array or a
    ragged list of per-w1 rows, strictly positive and of fixed shape near
    ``theta0``.  Scores are central differences of the log probabilities
    with the given step (default ``1e-5 * (1 + |theta0|)``), so the
    identity ``j_total = j_marginal + sum(loss_by_omega1)`` holds to the
    square of the step.  Each loss entry is ``p(w1)`` times the conditional
    score variance, hence nonnegative.
    """
    h = step if step is not None else 1e-5 * (1.0 + abs(theta0))
    if h <= 0:
        raise ValidationError(f"step must be positive, got {h}")

    def rows_at(theta):
        raw = joint(theta)
        if isinstance(raw, np.ndarray) and raw.ndim == 2:
            rows = [np.asarray(row, dtype=float) for row in raw]
        else:
            rows = [np.asarray(row, dtype=float) for row in raw]
        for row in rows:
            if row.size == 0 or np.any(row <= 0.0):
                raise ValidationError(
                    "joint distribution must be strictly positive on its support"
                )
        return rows

    rows0 = rows_at(theta0)
    rows_plus = rows_at(theta0 + h)
    rows_minus = rows_at(theta0 - h)
    if not (len(rows0) == len(rows_plus) == len(rows_minus)):
        raise ValidationError("support must not change across the difference stencil")

    total = sum(float(row.sum()) for row in rows0)
    j_total = 0.0
    j_marginal = 0.0
    losses = np.zeros(len(rows0))
    for idx, (row0, rowp, rowm) in enumerate(zip(rows0, rows_plus, rows_minus)):
        if row0.shape != rowp.shape or row0.shape != rowm.shape:
            raise ValidationError("support must not change across the difference stencil")
        row0 = row0 / total
        score = (np.log(rowp) - np.log(rowm)) / (2 * h)
        p1 = float(row0.sum())
        s1 = (np.log(rowp.sum()) - np.log(rowm.sum())) / (2 * h)
        cond = row0 / p1
        j_total += float(np.sum(row0 * score**2))
        j_marginal += p1 * s1 * s1
        mean_cond = float(np.sum(cond * score))
        losses[idx] = p1 * max(float(np.sum(cond * score**2)) - mean_cond**2, 0.0)
    return FisherDecomposition(
        j_total=j_total, j_marginal=j_marginal, loss_by_omega1=losses
    )
