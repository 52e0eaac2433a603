"""Spin-j representation machinery and its Gaussian limit diagnostics.

Basis convention: level index ``n = j - m`` (highest weight first), so the
isometric embedding into the truncated Fock space is the identity on
indices and the quadratures are the standard ladder constructions.  The
state ``rho(j, p)`` has geometric diagonal weights ``p^n``, and the
covariant angular measurement on it has the exactly invertible outcome law
implemented in ``sample_angles``.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import gammaln

from .errors import SingularityError, ValidationError
from .gaussian import ladder, quadratures
from .linalg import require_real_symmetric
from .qubit import BOUNDARY_EPS


def _check_spin(j) -> int:
    """Validate a half-integer spin and return 2j as an int."""
    two_j = int(round(2 * float(j)))
    if abs(2 * float(j) - two_j) > 1e-12 or two_j < 1:
        raise ValidationError(f"spin must be a half-integer >= 1/2, got {j}")
    return two_j


def _check_p(p: float) -> float:
    if not 0.0 <= p < 1.0:
        raise ValidationError(f"thermal parameter must lie in [0, 1), got {p}")
    return float(p)


class SpinOperators(NamedTuple):
    j1: np.ndarray
    j2: np.ndarray
    j3: np.ndarray
    plus: np.ndarray
    minus: np.ndarray


def spin_ops(j) -> SpinOperators:
    """Generators of the spin-j representation, dimension 2j + 1.

    In the level basis ``J+ |n> = sqrt(n (2j - n + 1)) |n - 1>`` and ``J3``
    is diagonal with entries ``j, j-1, ..., -j``; the su(2) commutation
    relations ``[J1, J2] = i J3`` (and cyclic) hold.
    """
    two_j = _check_spin(j)
    dim = two_j + 1
    ns = np.arange(1, dim)
    plus = np.zeros((dim, dim), dtype=complex)
    plus[ns - 1, ns] = np.sqrt(ns * (two_j - ns + 1))
    minus = plus.conj().T
    j1 = (plus + minus) / 2
    j2 = (plus - minus) / 2j
    j3 = np.diag(two_j / 2 - np.arange(dim)).astype(complex)
    return SpinOperators(j1=j1, j2=j2, j3=j3, plus=plus, minus=minus)


def coherent_vec(j, z: complex) -> np.ndarray:
    """Spin coherent vector with amplitude ``z``, |z| < 1, unit norm.

    Component at level n is ``sqrt(C(2j, n)) z^n (1 - |z|^2)^((2j - n)/2)``.
    """
    two_j = _check_spin(j)
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValidationError(f"coherent amplitude must satisfy |z| < 1, got |z| = {abs(z)}")
    dim = two_j + 1
    if z == 0:
        vec = np.zeros(dim, dtype=complex)
        vec[0] = 1.0
        return vec
    ns = np.arange(dim)
    log_binom = gammaln(two_j + 1) - gammaln(ns + 1) - gammaln(two_j - ns + 1)
    log_mag = 0.5 * log_binom + ns * np.log(abs(z)) + 0.5 * (two_j - ns) * np.log1p(-abs(z) ** 2)
    phase = (z / abs(z)) ** ns
    return np.exp(log_mag) * phase


def rho_jp_weights(j, p: float) -> np.ndarray:
    """Diagonal weights (1 - p) p^n / (1 - p^(2j+1)) of the thermal-like spin state."""
    two_j = _check_spin(j)
    _check_p(p)
    ns = np.arange(two_j + 1)
    if p == 0:
        w = np.zeros(two_j + 1)
        w[0] = 1.0
        return w
    return (1.0 - p) * p**ns / (1.0 - p ** (two_j + 1))


def rho_jp(j, p: float) -> np.ndarray:
    """The state rho(j, p) as a diagonal (2j+1)-dimensional matrix."""
    return np.diag(rho_jp_weights(j, p)).astype(complex)


def angular_density(j, p: float, phi) -> np.ndarray:
    """Joint outcome density of the covariant measurement in (phi, psi).

    ``(2j+1) (1-p)/(1-p^(2j+1)) (1 - (1-p) sin^2(phi/2))^(2j) sin(phi)/(4 pi)``
    with respect to d(phi) d(psi) on [0, pi] x [0, 2 pi); integrates to 1.
    """
    two_j = _check_spin(j)
    _check_p(p)
    phi = np.asarray(phi, dtype=float)
    norm = (two_j + 1) * (1.0 - p) / (1.0 - p ** (two_j + 1)) if p > 0 else (two_j + 1)
    kernel = (1.0 - (1.0 - p) * np.sin(phi / 2) ** 2) ** two_j
    return norm * kernel * np.sin(phi) / (4 * np.pi)


def cdf_cos_phi(j, p: float, x) -> np.ndarray:
    """CDF of cos(phi) under the covariant outcome law (analytic closed form)."""
    two_j = _check_spin(j)
    _check_p(p)
    x = np.asarray(x, dtype=float)
    c = (1.0 + p) / 2 + (1.0 - p) * x / 2
    top = p ** (two_j + 1)
    return (c ** (two_j + 1) - top) / (1.0 - top)


def inverse_cdf_cos_phi(two_j, p, u) -> np.ndarray:
    """Inverse of ``cdf_cos_phi`` in closed form; vectorized over ``two_j`` and ``u``.

    At p = 1 (maximally mixed block state) the law is uniform on the sphere.
    """
    two_j = np.asarray(two_j, dtype=float)
    u = np.asarray(u, dtype=float)
    if p == 1.0:
        return 2.0 * u - 1.0
    expo = two_j + 1.0
    top = np.asarray(p, dtype=float) ** expo
    c = (top + u * (1.0 - top)) ** (1.0 / expo)
    x = (2.0 * c - 1.0 - p) / (1.0 - p)
    return np.clip(x, -1.0, 1.0)


@dataclass(frozen=True)
class AngularSamples:
    """Covariant-measurement outcomes: polar angles, azimuths and density values."""

    phi: np.ndarray
    psi: np.ndarray
    weight: np.ndarray


def sample_angles(j, p: float, count: int, seed: int) -> AngularSamples:
    """Draw exact samples of the covariant outcome law by inverse transform.

    The azimuth is uniform; the polar angle comes from the closed-form
    inverse of the cos(phi) CDF, so the stream is exact and reproducible.
    """
    two_j = _check_spin(j)
    _check_p(p)
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    x = inverse_cdf_cos_phi(two_j, p, rng.random(count))
    phi = np.arccos(x)
    psi = 2 * np.pi * rng.random(count)
    return AngularSamples(phi=phi, psi=psi, weight=angular_density(j, p, phi))


def f_closed(j, p: float) -> float:
    """Mean of 1 - cos(phi) under the covariant outcome law, in closed form.

    Behaves like ``1 / ((1 - p)(j + 1))`` for large j at fixed p < 1.
    """
    two_j = _check_spin(j)
    _check_p(p)
    if p == 0:
        return 2.0 / (two_j + 2)
    num = 2.0 * (1.0 + (two_j + 1) * p ** (two_j + 2) - (two_j + 2) * p ** (two_j + 1))
    den = (two_j + 2) * (1.0 - p) * (1.0 - p ** (two_j + 1))
    return float(num / den)


def _embed(block: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    out[: block.shape[0], : block.shape[1]] = block
    return out


def _sym(a, b):
    return (a @ b + b @ a) / 2


@dataclass(frozen=True)
class LimitReport:
    """Residuals of the spin-to-Gaussian limit at one (j, p), with proof bounds.

    Thirteen residuals cover the state (trace norm), the coherent vector at
    a probe amplitude, the two ladder mismatches, the two quadrature
    mismatches, the three second-moment gaps and the four mixed cross
    terms.  ``*_bound`` fields carry the explicit upper bounds the limit
    argument provides; sum bounds constrain the sum of the paired
    residuals.  ``b_gap``/``v_gap`` (present when a 2x2 weight was given)
    measure the distance of the measurement moment matrices from their
    large-j targets.
    """

    j: float
    p: float
    z_probe: complex
    state_trace_gap: float
    state_trace_gap_bound: float
    coherent_vec_gap: float
    annihilator_gap: float
    annihilator_gap_bound: float
    creator_gap: float
    creator_gap_bound: float
    q_quadrature_gap: float
    p_quadrature_gap: float
    quadrature_sum_bound: float
    q_moment_gap: float
    p_moment_gap: float
    qp_moment_gap: float
    moment_sum_bound: float
    cross_qq: float
    cross_qp: float
    cross_pq: float
    cross_pp: float
    cross_qq_bound: float
    cross_qp_bound: float
    cross_pq_bound: float
    cross_pp_bound: float
    b_gap: Optional[float] = None
    v_gap: Optional[float] = None

    RESIDUAL_FIELDS = (
        "state_trace_gap",
        "coherent_vec_gap",
        "annihilator_gap",
        "creator_gap",
        "q_quadrature_gap",
        "p_quadrature_gap",
        "q_moment_gap",
        "p_moment_gap",
        "qp_moment_gap",
        "cross_qq",
        "cross_qp",
        "cross_pq",
        "cross_pp",
    )

    def residuals(self) -> dict:
        return {name: getattr(self, name) for name in self.RESIDUAL_FIELDS}

    def bound_pairs(self) -> list:
        """(name, residual, bound) triples for every residual with a stated bound."""
        pairs = [
            ("state_trace_gap", self.state_trace_gap, self.state_trace_gap_bound),
            ("annihilator_gap", self.annihilator_gap, self.annihilator_gap_bound),
            ("creator_gap", self.creator_gap, self.creator_gap_bound),
            (
                "quadrature_sum",
                self.q_quadrature_gap + self.p_quadrature_gap,
                self.quadrature_sum_bound,
            ),
            (
                "moment_sum",
                self.q_moment_gap + self.p_moment_gap,
                self.moment_sum_bound,
            ),
            ("cross_qq", self.cross_qq, self.cross_qq_bound),
            ("cross_qp", self.cross_qp, self.cross_qp_bound),
            ("cross_pq", self.cross_pq, self.cross_pq_bound),
            ("cross_pp", self.cross_pp, self.cross_pp_bound),
        ]
        return pairs

    def as_dict(self) -> dict:
        out = {"j": self.j, "p": self.p, "z_probe": str(self.z_probe)}
        for name in self.RESIDUAL_FIELDS:
            out[name] = getattr(self, name)
        for name in (
            "state_trace_gap_bound",
            "annihilator_gap_bound",
            "creator_gap_bound",
            "quadrature_sum_bound",
            "moment_sum_bound",
            "cross_qq_bound",
            "cross_qp_bound",
            "cross_pq_bound",
            "cross_pp_bound",
        ):
            out[name] = getattr(self, name)
        out["b_gap"] = self.b_gap
        out["v_gap"] = self.v_gap
        return out


def limit_report(j, p: float, z_probe: complex = 0.5 + 0.25j, gtilde=None) -> LimitReport:
    """Evaluate every spin-to-Gaussian residual at (j, p).

    All quantities are exact finite sums: the spin operators are embedded
    into a Fock space a few levels taller than 2j, which the one- and
    two-step operators involved never leave, and geometric tails are summed
    in closed form.
    """
    two_j = _check_spin(j)
    p = _check_p(p)
    if p == 0.0:
        raise ValidationError("limit residuals need p in (0, 1); several divide by p")
    jj = two_j / 2
    dim = two_j + 6
    nbar = p / (1.0 - p)

    w_spin = rho_jp_weights(j, p)
    rho = np.zeros(dim)
    rho[: two_j + 1] = w_spin

    ops = spin_ops(j)
    jplus = _embed(ops.plus, dim)
    jminus = _embed(ops.minus, dim)
    jx = _embed(ops.j1, dim)
    jy = _embed(ops.j2, dim)
    a = ladder(dim).astype(complex)
    q, pq = quadratures(dim)

    def trace_rho(mat) -> float:
        val = np.sum(rho * np.diag(mat))
        return float(np.real(val))

    # state trace-norm gap: both states are diagonal with geometric weights
    top = p ** (two_j + 1)
    w_gauss = (1.0 - p) * p ** np.arange(two_j + 1)
    state_gap = float(np.sum(np.abs(w_spin - w_gauss))) + top  # + exact geometric tail

    # coherent-vector gap at the probe amplitude z / sqrt(2j)
    alpha = z_probe / np.sqrt(two_j)
    spin_coeff = coherent_vec(j, alpha)
    ns = np.arange(two_j + 1)
    if z_probe == 0:
        glauber = np.zeros(two_j + 1, dtype=complex)
        glauber[0] = 1.0
    else:
        log_g = -abs(z_probe) ** 2 / 2 + ns * np.log(abs(z_probe)) - 0.5 * gammaln(ns + 1)
        glauber = np.exp(log_g) * (z_probe / abs(z_probe)) ** ns
    glauber_tail = max(1.0 - float(np.sum(np.abs(glauber) ** 2)), 0.0)
    coherent_gap = float(np.sqrt(np.sum(np.abs(spin_coeff - glauber) ** 2) + glauber_tail))

    x_ann = a - jplus / np.sqrt(two_j)
    x_cre = a.conj().T - jminus / np.sqrt(two_j)
    annihilator_gap = trace_rho(x_ann.conj().T @ x_ann)
    creator_gap = trace_rho(x_cre.conj().T @ x_cre)

    dq = q - jx / np.sqrt(jj)
    dp = pq - jy / np.sqrt(jj)
    q_quadrature_gap = trace_rho(dq @ dq)
    p_quadrature_gap = trace_rho(dp @ dp)

    m2q = float(np.sum(w_spin * (ns + 0.5)))
    m2_target = nbar + 0.5
    q_moment_gap = abs(m2q - m2_target)
    p_moment_gap = q_moment_gap  # P^2 has the same diagonal as Q^2
    qp_moment_gap = abs(trace_rho(_sym(q, pq)))  # exactly 0: diagonal state

    cross_qq = abs(trace_rho(_sym(dq, q)))
    cross_qp = abs(trace_rho(_sym(dq, pq)))
    cross_pq = abs(trace_rho(_sym(dp, q)))
    cross_pp = abs(trace_rho(_sym(dp, pq)))

    # proof-stage bounds; the 1/(1 - p^(2j+1)) normalization is kept explicit
    norm_corr = 1.0 / (1.0 - top)
    ann_bound = (1.0 - p) / two_j * (p * (1.0 + p) / (1.0 - p) ** 3) * norm_corr
    cre_bound = (1.0 - p) / two_j * ((1.0 + p) / (1.0 - p) ** 3) * norm_corr + (
        1.0 - p
    ) * (two_j + 1) ** 2 * p**two_j * norm_corr
    state_bound = top * norm_corr + top
    tail_moment = 2.0 * top * ((two_j + 1) / (1.0 - p) + p / (1.0 - p) ** 2) + top / (1.0 - p)
    moment_bound = top * (1.0 - p) * (1.0 / (1.0 - p) + 2.0 * p / (1.0 - p) ** 2) + (
        1.0 - p
    ) * tail_moment

    m2p = m2q
    cross_bounds = (
        np.sqrt(q_quadrature_gap * m2q),
        np.sqrt(q_quadrature_gap * m2p),
        np.sqrt(p_quadrature_gap * m2q),
        np.sqrt(p_quadrature_gap * m2p),
    )

    b_gap = None
    v_gap = None
    if gtilde is not None:
        gt = require_real_symmetric(gtilde, name="2x2 weight")
        r = (1.0 - p) / (1.0 + p)
        bmat, vmat = moment_matrices(j, r, gt)
        b_target = np.eye(2) / r
        v_target = np.eye(2) / (2 * r) + np.sqrt(np.linalg.det(gt)) / 2 * np.linalg.inv(gt)
        b_gap = float(np.linalg.norm(bmat / np.sqrt(jj) - b_target))
        v_gap = float(np.linalg.norm(vmat - v_target))

    return LimitReport(
        j=jj,
        p=p,
        z_probe=z_probe,
        state_trace_gap=state_gap,
        state_trace_gap_bound=float(state_bound),
        coherent_vec_gap=coherent_gap,
        annihilator_gap=annihilator_gap,
        annihilator_gap_bound=float(ann_bound),
        creator_gap=creator_gap,
        creator_gap_bound=float(cre_bound),
        q_quadrature_gap=q_quadrature_gap,
        p_quadrature_gap=p_quadrature_gap,
        quadrature_sum_bound=float(ann_bound + cre_bound),
        q_moment_gap=q_moment_gap,
        p_moment_gap=p_moment_gap,
        qp_moment_gap=qp_moment_gap,
        moment_sum_bound=float(moment_bound),
        cross_qq=cross_qq,
        cross_qp=cross_qp,
        cross_pq=cross_pq,
        cross_pp=cross_pp,
        cross_qq_bound=float(cross_bounds[0]),
        cross_qp_bound=float(cross_bounds[1]),
        cross_pq_bound=float(cross_bounds[2]),
        cross_pp_bound=float(cross_bounds[3]),
        b_gap=b_gap,
        v_gap=v_gap,
    )


def moment_matrices(j, r: float, gtilde):
    """Response and covariance moment matrices of the squeezed POVM at spin j.

    ``B`` pairs the symmetrized generators ``2 J_1, 2 J_2`` with the
    truncated quadratures; ``V`` adds the squeezing floor
    ``sqrt(det Gt)/2 Gt^-1`` to the diagonal second moments of the state.
    As j grows, ``B/sqrt(j) -> I/r`` and
    ``V -> I/(2r) + sqrt(det Gt)/2 Gt^-1``.
    """
    two_j = _check_spin(j)
    if not 0.0 < r <= 1.0 - BOUNDARY_EPS:
        raise SingularityError(
            f"moment matrices need r in (0, 1 - {BOUNDARY_EPS}], got {r}; "
            "the response matrix degenerates at the origin"
        )
    gt = require_real_symmetric(gtilde, name="2x2 weight")
    if gt.shape != (2, 2):
        raise ValidationError(f"weight must be 2x2, got {gt.shape}")
    det = float(np.linalg.det(gt))
    if det <= 0:
        raise SingularityError("moment matrices need a strictly positive 2x2 weight")

    p = (1.0 - r) / (1.0 + r)
    dim = two_j + 1
    weights = rho_jp_weights(j, p)
    rho = np.diag(weights).astype(complex)
    ops = spin_ops(j)
    q, pq = quadratures(dim)  # truncated quadratures on the spin block

    bmat = np.empty((2, 2))
    for col, gen in enumerate((ops.j1, ops.j2)):
        sym_gen = _sym(rho, 2 * gen)
        for row, quad in enumerate((q, pq)):
            val = np.trace(sym_gen @ quad)
            bmat[row, col] = float(np.real(val))

    ns = np.arange(dim)
    m2 = float(np.sum(weights * (ns + 0.5)))
    vmat = np.diag([m2, m2]) + np.sqrt(det) / 2 * np.linalg.inv(gt)
    return bmat, (vmat + vmat.T) / 2
