"""The four estimation-error bounds and the numerical Holevo minimizer.

For a weight matrix G and MSE matrix V the scalar risk is tr(G V).  The
bounds computed here, in increasing order, are:

* ``sld_bound``      -- tr(J^-1 G) from the SLD Fisher matrix J,
* ``rld_bound``      -- tr(sqrt(G) Re(Jt^-1) sqrt(G)) + ||sqrt(G) Im(Jt^-1) sqrt(G)||_1
  from the inverse RLD Fisher matrix,
* the Holevo bound   -- closed forms for the full qubit model and its
  two-parameter subfamilies, and a derivative-free minimizer
  (``holevo_numeric``) for the general constrained trace-norm program,
* ``quasi_cr_qubit`` -- (tr sqrt(sqrt(G) J^-1 sqrt(G)))^2, the best risk
  achievable without collective measurements on a qubit model.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import (
    ConvergenceError,
    InfeasibilityError,
    SingularityError,
    ValidationError,
)
from .linalg import (
    abs_and_trace_norm,
    hermitian_imag_part,
    psd_sqrt,
    require_hermitian,
    require_real_symmetric,
)
from .qubit import check_radius, fisher_pair

# Minimum eigenvalue below which a weight matrix no longer counts as
# strictly positive definite (required by the MSE/Fisher target formulas).
PD_TOL = 1e-10


def validate_weight(weight, *, require_pd=False, name="weight matrix") -> np.ndarray:
    """Validate a weight matrix: real symmetric PSD, optionally strictly PD."""
    g = require_real_symmetric(weight, name=name)
    w = np.linalg.eigvalsh(g)
    scale = max(1.0, float(np.max(np.abs(w))))
    if float(w.min()) < -PD_TOL * scale:
        raise ValidationError(f"{name} is not positive semidefinite (min eig {w.min():.3e})")
    if require_pd and float(w.min()) <= PD_TOL:
        raise SingularityError(f"{name} must be strictly positive definite (min eig {w.min():.3e})")
    return g


def weight_blocks(weight):
    """Split a 3x3 weight matrix into its 2x2 block, coupling vector and scalar."""
    g = validate_weight(weight)
    if g.shape != (3, 3):
        raise ValidationError(f"block decomposition needs a 3x3 matrix, got {g.shape}")
    return g[:2, :2], g[:2, 2], float(g[2, 2])


def _require_invertible_sym(j, name="matrix"):
    a = require_real_symmetric(j, name=name)
    w = np.linalg.eigvalsh(a)
    if float(w.min()) <= PD_TOL * max(1.0, float(np.max(np.abs(w)))):
        raise SingularityError(f"{name} is singular or not positive definite")
    return a


def sld_bound(j_sld, weight) -> float:
    """tr(J^-1 G) for a positive-definite SLD Fisher matrix J."""
    j = _require_invertible_sym(j_sld, name="SLD Fisher matrix")
    g = validate_weight(weight)
    if g.shape != j.shape:
        raise ValidationError(f"dimension mismatch: J {j.shape} vs G {g.shape}")
    return float(np.trace(np.linalg.solve(j, g)))


def rld_bound(jtilde_inv, weight) -> float:
    """RLD bound from the inverse RLD Fisher matrix.

    Equals ``tr(sqrt(G) Re(Z) sqrt(G)) + ||sqrt(G) (iIm Z) sqrt(G)||_1``
    where Z is Hermitian and iIm Z denotes the Hermitian matrix (Z - Z^T)/2.
    """
    z = require_hermitian(jtilde_inv, name="inverse RLD Fisher matrix")
    g = validate_weight(weight)
    if g.shape != z.shape:
        raise ValidationError(f"dimension mismatch: Jtilde^-1 {z.shape} vs G {g.shape}")
    root = psd_sqrt(g)
    real_term = float(np.real(np.trace(root @ z.real @ root)))
    _, tn = abs_and_trace_norm(root @ hermitian_imag_part(z) @ root)
    return real_term + tn


def quasi_cr_qubit(j_sld, weight) -> float:
    """(tr sqrt(sqrt(G) J^-1 sqrt(G)))^2: the separable-measurement bound."""
    j = _require_invertible_sym(j_sld, name="SLD Fisher matrix")
    g = validate_weight(weight)
    if g.shape != j.shape:
        raise ValidationError(f"dimension mismatch: J {j.shape} vs G {g.shape}")
    root = psd_sqrt(g)
    inner = root @ np.linalg.inv(j) @ root
    w = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.sum(np.sqrt(w)) ** 2)


def optimal_mse_fisher(z, weight):
    """Optimal MSE matrix and optimal Fisher matrix for a Hermitian matrix Z.

    For strictly positive G the risk-optimal covariance compatible with Z is
    ``Re Z + sqrt(G)^-1 |sqrt(G) (iIm Z) sqrt(G)| sqrt(G)^-1`` and the Fisher
    matrix of the attaining measurement is
    ``sqrt(G) (sqrt(G) Re Z sqrt(G) + |sqrt(G) (iIm Z) sqrt(G)|)^-1 sqrt(G)``.
    """
    zh = require_hermitian(z, name="Z matrix")
    g = validate_weight(weight, require_pd=True)
    if g.shape != zh.shape:
        raise ValidationError(f"dimension mismatch: Z {zh.shape} vs G {g.shape}")
    root = psd_sqrt(g)
    root_inv = np.linalg.inv(root)
    abs_imag, _ = abs_and_trace_norm(root @ hermitian_imag_part(zh) @ root)
    mse = zh.real + (root_inv @ abs_imag @ root_inv).real
    inner = root @ zh.real @ root + abs_imag
    w = np.linalg.eigvalsh(inner)
    if float(w.min().real) <= PD_TOL * max(1.0, float(np.max(np.abs(w)))):
        raise SingularityError("optimal Fisher matrix undefined: inner matrix is singular")
    fisher = (root @ np.linalg.inv(inner) @ root).real
    return (mse + mse.T) / 2, (fisher + fisher.T) / 2


def holevo_full_qubit(r: float, weight):
    """Closed-form Holevo bound of the full qubit model at (0, 0, r).

    With the weight split into blocks ``[[Gt, g], [g^T, s]]`` the value is
    ``tr G - r^2 s + 2 r sqrt(det Gt)``; the model is D-invariant so this
    coincides with the RLD bound.  Also returns the optimal MSE and Fisher
    targets built from the inverse RLD Fisher matrix.
    """
    check_radius(r)
    g = validate_weight(weight, require_pd=True)
    gt, _, s = weight_blocks(g)
    value = float(np.trace(g)) - r * r * s + 2.0 * r * float(np.sqrt(np.linalg.det(gt)))
    z = fisher_pair(r).jtilde_inv
    mse, fisher = optimal_mse_fisher(z, g)
    return value, mse, fisher


def submodel_threshold(r: float, phi: float) -> float:
    """Regime threshold cos(phi) / (r sin^2(phi)); +inf when the denominator vanishes."""
    den = r * np.sin(phi) ** 2
    if den == 0.0:
        return np.inf
    return float(np.cos(phi) / den)


@dataclass(frozen=True)
class HolevoSubmodel:
    """Holevo bound of a two-parameter subfamily with its attaining covariance."""

    value: float
    mse_target: np.ndarray
    regime: int
    diagonal_family: Callable[[float], np.ndarray]


def holevo_submodel(r: float, phi: float, weight) -> HolevoSubmodel:
    """Holevo bound for the subfamily with tangent angle ``phi`` at radius ``r``.

    Regime 1 applies when ``g1 / sqrt(det G) <= cos(phi) / (r sin^2(phi))``
    (ties included; the two closed forms agree on the boundary):

        value = tr G + 2 r cos(phi) sqrt(det G) - r^2 sin^2(phi) g1

    otherwise regime 2:

        value = tr G + (det G / g1) (cos(phi) / sin(phi))^2.

    ``diagonal_family(t)`` returns the optimal covariance for the
    determinant-one weight diag(t, 1/t), valid for 0 < t <= threshold.
    """
    if not 0.0 <= phi <= np.pi / 2:
        raise ValidationError(f"phi must lie in [0, pi/2], got {phi}")
    check_radius(r)
    g = validate_weight(weight, require_pd=True)
    if g.shape != (2, 2):
        raise ValidationError(f"submodel weight must be 2x2, got {g.shape}")
    g1, g2, g3 = float(g[0, 0]), float(g[0, 1]), float(g[1, 1])
    det = float(np.linalg.det(g))
    rootdet = float(np.sqrt(det))
    trace = g1 + g3
    threshold = submodel_threshold(r, phi)
    sin2 = float(np.sin(phi) ** 2)
    cosphi = float(np.cos(phi))

    if g1 / rootdet <= threshold:
        regime = 1
        value = trace + 2.0 * r * cosphi * rootdet - r * r * sin2 * g1
        mse = (
            np.eye(2)
            + r * cosphi * rootdet * np.linalg.inv(g)
            - np.diag([r * r * sin2, 0.0])
        )
    else:
        regime = 2
        cot2 = (cosphi / np.sin(phi)) ** 2
        value = trace + det / g1 * cot2
        mse = np.eye(2) + cot2 * np.array(
            [[(g2 / g1) ** 2, -g2 / g1], [-g2 / g1, 1.0]]
        )

    def diagonal_family(t: float) -> np.ndarray:
        if not 0.0 < t <= threshold:
            raise ValidationError(
                f"diagonal family parameter must lie in (0, {threshold}], got {t}"
            )
        return np.eye(2) + np.diag(
            [r * cosphi / t - r * r * sin2, r * t * cosphi]
        )

    return HolevoSubmodel(
        value=float(value),
        mse_target=(mse + mse.T) / 2,
        regime=regime,
        diagonal_family=diagonal_family,
    )


def submodel_optimal_z(r: float, phi: float, weight) -> np.ndarray:
    """The Hermitian matrix attaining the submodel Holevo bound.

    In the elimination variables (t, s) the feasible matrices are
    ``Z = [[1+t^2, ts - i r c], [ts + i r c, 1+s^2]]`` with
    ``c = cos(phi) - s sin(phi)``; the minimizer has ``t = -(g2/g1) s`` and
    ``s = r g1 sin(phi)/sqrt(det G)`` in regime 1, ``s = cot(phi)`` in
    regime 2.
    """
    g = validate_weight(weight, require_pd=True)
    g1, g2 = float(g[0, 0]), float(g[0, 1])
    rootdet = float(np.sqrt(np.linalg.det(g)))
    threshold = submodel_threshold(r, phi)
    if g1 / rootdet <= threshold:
        s = r * g1 * np.sin(phi) / rootdet
    else:
        s = np.cos(phi) / np.sin(phi)
    t = -(g2 / g1) * s
    c = np.cos(phi) - s * np.sin(phi)
    return np.array(
        [
            [1.0 + t * t, t * s - 1j * r * c],
            [t * s + 1j * r * c, 1.0 + s * s],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class HolevoProgram:
    """Data of the constrained trace-norm minimization for the Holevo bound.

    ``j_ext`` is the inverse RLD Fisher matrix of a D-invariant extension in
    an SLD-orthonormal basis (so its real part is the identity), the rows of
    ``d_vectors`` expand the model derivatives in that basis, and ``weight``
    is the weight matrix of the risk.
    """

    j_ext: np.ndarray
    d_vectors: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        j = require_hermitian(self.j_ext, name="extension matrix")
        if np.max(np.abs(j.real - np.eye(j.shape[0]))) > 1e-10:
            raise ValidationError("Re(j_ext) must be the identity (SLD-orthonormal basis)")
        d = np.atleast_2d(np.asarray(self.d_vectors, dtype=float))
        if d.shape[1] != j.shape[0]:
            raise ValidationError(
                f"d-vectors of length {d.shape[1]} incompatible with extension dim {j.shape[0]}"
            )
        g = validate_weight(self.weight)
        if g.shape != (d.shape[0], d.shape[0]):
            raise ValidationError(
                f"weight must be {d.shape[0]}x{d.shape[0]}, got {g.shape}"
            )
        object.__setattr__(self, "j_ext", j)
        object.__setattr__(self, "d_vectors", d)
        object.__setattr__(self, "weight", g)


def full_qubit_program(r: float, weight) -> HolevoProgram:
    """Holevo program of the full qubit model at (0, 0, r)."""
    check_radius(r)
    j_ext = np.array(
        [[1.0, -1j * r, 0.0], [1j * r, 1.0, 0.0], [0.0, 0.0, 1.0]], dtype=complex
    )
    d = np.diag([1.0, 1.0, 1.0 / np.sqrt(1.0 - r * r)])
    return HolevoProgram(j_ext=j_ext, d_vectors=d, weight=weight)


def submodel_program(r: float, phi: float, weight) -> HolevoProgram:
    """Holevo program of the two-parameter subfamily at angle ``phi``."""
    check_radius(r)
    if not 0.0 <= phi <= np.pi / 2:
        raise ValidationError(f"phi must lie in [0, pi/2], got {phi}")
    j_ext = np.array(
        [[1.0, -1j * r, 0.0], [1j * r, 1.0, 0.0], [0.0, 0.0, 1.0]], dtype=complex
    )
    d = np.array([[1.0, 0.0, 0.0], [0.0, np.cos(phi), np.sin(phi)]])
    return HolevoProgram(j_ext=j_ext, d_vectors=d, weight=weight)


def holevo_objective(program: HolevoProgram, vectors) -> float:
    """Risk functional tr(sqrt(G) Re Z sqrt(G)) + ||sqrt(G) (iIm Z) sqrt(G)||_1.

    ``Z_kj = <v_k| J |v_j>`` for the real vectors stacked as rows of
    ``vectors``.
    """
    v = np.asarray(vectors, dtype=float)
    z = v @ program.j_ext @ v.T
    root = psd_sqrt(program.weight)
    real_term = float(np.real(np.trace(root @ z.real @ root)))
    _, tn = abs_and_trace_norm(root @ hermitian_imag_part(z) @ root)
    return real_term + tn


def holevo_numeric(
    program: HolevoProgram,
    *,
    restarts: int = 8,
    seed: int = 1234,
    fatol: float = 1e-12,
    xatol: float = 1e-10,
):
    """Numerically minimize the Holevo program.

    The affine constraints ``d_k . v_j = delta_kj`` (real vectors, identity
    real part of J) are eliminated analytically: every feasible family is
    ``v_j = v0_j + N w_j`` with N a null-space basis of the d-vector matrix.
    The reduced problem -- at most d*(m-d) free scalars, nonsmooth through
    the trace norm -- is handled by Nelder-Mead restarted from ``restarts``
    seeded random points plus the particular solution.

    Returns
    -------
    value : float
        Minimal risk functional found.
    argmin : (d, m) ndarray
        Feasible vectors attaining it (rows).
    """
    d_mat = program.d_vectors
    d, m = d_mat.shape
    u, sing, vt = np.linalg.svd(d_mat)
    rank = int(np.sum(sing > 1e-12 * max(1.0, sing[0] if sing.size else 0.0)))
    if rank < d:
        raise InfeasibilityError(
            f"constraint matrix has rank {rank} < {d}: duplicate or dependent derivatives"
        )
    v0 = np.linalg.pinv(d_mat) @ np.eye(d)  # columns: particular solutions
    nullbasis = vt[rank:].T  # (m, m-d), orthonormal columns
    nfree = nullbasis.shape[1]

    if nfree == 0:
        vectors = v0.T
        return holevo_objective(program, vectors), vectors

    def assemble(wflat):
        w = wflat.reshape(nfree, d)
        return (v0 + nullbasis @ w).T

    def objective(wflat):
        return holevo_objective(program, assemble(wflat))

    rng = np.random.default_rng(seed)
    starts = [np.zeros(nfree * d)]
    starts += [rng.standard_normal(nfree * d) for _ in range(max(restarts - 1, 0))]

    best = None
    converged = False
    options = {"fatol": fatol, "xatol": xatol, "maxiter": 4000 * nfree * d}
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead", options=options)
        if best is None or res.fun < best.fun:
            best = res
        converged = converged or bool(res.success)
    # one polishing pass from the incumbent; NM restarts escape degenerate simplexes
    res = minimize(objective, best.x, method="Nelder-Mead", options=options)
    if res.fun < best.fun:
        best = res
    converged = converged or bool(res.success)
    if not converged:
        raise ConvergenceError(
            f"Nelder-Mead failed to converge after {len(starts) + 1} starts",
            best_value=float(best.fun),
        )
    return float(best.fun), assemble(best.x)


@dataclass(frozen=True)
class BoundsReport:
    """All four bounds plus attainment targets for one (model, point, weight)."""

    c_sld: float
    c_rld: float
    c_holevo: float
    c_quasi: float
    mse_target: np.ndarray
    fisher_target: np.ndarray
    regime: str
    model: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        # Universally valid ordering.  The stronger total order
        # c_sld <= c_rld holds only for D-invariant models (full, gaussian)
        # and is asserted there by the tests; submodels can legitimately
        # have c_rld below c_sld.
        slack = 1e-9
        if (
            self.c_sld > self.c_holevo + slack
            or self.c_rld > self.c_holevo + slack
            or self.c_holevo > self.c_quasi + slack
        ):
            raise ValidationError(
                "bound ordering violated: "
                f"({self.c_sld}, {self.c_rld}, {self.c_holevo}, {self.c_quasi})"
            )

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": self.params,
            "c_sld": self.c_sld,
            "c_rld": self.c_rld,
            "c_holevo": self.c_holevo,
            "c_quasi": self.c_quasi,
            "mse_target": np.asarray(self.mse_target).tolist(),
            "fisher_target": np.asarray(self.fisher_target).tolist(),
            "regime": self.regime,
        }


def full_model_report(r: float, weight) -> BoundsReport:
    """Bounds report for the full qubit model at (0, 0, r)."""
    g = validate_weight(weight, require_pd=True)
    pair = fisher_pair(r)
    value, mse, fisher = holevo_full_qubit(r, g)
    return BoundsReport(
        c_sld=sld_bound(pair.j_sld, g),
        c_rld=rld_bound(pair.jtilde_inv, g),
        c_holevo=value,
        c_quasi=quasi_cr_qubit(pair.j_sld, g),
        mse_target=mse,
        fisher_target=fisher,
        regime="full",
        model="full",
        params={"r": r},
    )


def submodel_rld_fisher_inv(r: float, phi: float) -> np.ndarray:
    """Inverse RLD Fisher matrix of the subfamily, from its tangent operators."""
    from .qubit import bloch_state, submodel_tangent

    tan = submodel_tangent(phi, r)
    rho = bloch_state((0.0, 0.0, r))
    rho_inv = np.linalg.inv(rho)
    tangents = (tan.d1, tan.d2)
    jt = np.empty((2, 2), dtype=complex)
    for jdx in range(2):
        for kdx in range(2):
            jt[jdx, kdx] = np.trace(tangents[kdx] @ tangents[jdx] @ rho_inv)
    return np.linalg.inv(require_hermitian(jt, name="submodel RLD Fisher matrix"))


def submodel_report(r: float, phi: float, weight) -> BoundsReport:
    """Bounds report for the two-parameter subfamily at angle ``phi``."""
    g = validate_weight(weight, require_pd=True)
    sub = holevo_submodel(r, phi, g)
    z_opt = submodel_optimal_z(r, phi, g)
    _, fisher = optimal_mse_fisher(z_opt, g)
    eye = np.eye(2)
    return BoundsReport(
        c_sld=sld_bound(eye, g),
        c_rld=rld_bound(submodel_rld_fisher_inv(r, phi), g),
        c_holevo=sub.value,
        c_quasi=quasi_cr_qubit(eye, g),
        mse_target=sub.mse_target,
        fisher_target=fisher,
        regime=f"submodel-{sub.regime}",
        model="submodel",
        params={"r": r, "phi": phi},
    )


def gaussian_report(nbar: float, weight) -> BoundsReport:
    """Bounds report for the Gaussian shift model with mean photon number ``nbar``."""
    from .gaussian import gaussian_rld_bound

    g = validate_weight(weight, require_pd=True)
    if g.shape != (2, 2):
        raise ValidationError(f"Gaussian weight must be 2x2, got {g.shape}")
    if nbar < 0:
        raise ValidationError(f"mean photon number must be >= 0, got {nbar}")
    j_sld = np.eye(2) / (nbar + 0.5)
    jtilde_inv = np.array(
        [[nbar + 0.5, 0.5j], [-0.5j, nbar + 0.5]], dtype=complex
    )
    value = gaussian_rld_bound(nbar, g)
    mse, fisher = optimal_mse_fisher(jtilde_inv, g)
    return BoundsReport(
        c_sld=sld_bound(j_sld, g),
        c_rld=value,
        c_holevo=value,
        c_quasi=value,
        mse_target=mse,
        fisher_target=fisher,
        regime="full",
        model="gaussian",
        params={"nbar": nbar},
    )
