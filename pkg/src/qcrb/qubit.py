"""Qubit state family in Bloch coordinates.

The density matrix is ``rho(theta) = I/2 + sum_k theta^k S_k`` with ``S_k``
the spin-1/2 operators (half Pauli matrices), so the eigenvalues are
``(1 +/- |theta|)/2`` and mixed states fill the open unit ball.  Closed
forms for the SLD operators and Fisher-type matrices are taken at the
reference point ``(0, 0, r)`` and transported to general ``theta`` by the
SU(2) rotation carrying the z axis onto ``theta``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BoundaryError, ValidationError

# Distance kept from the pure-state boundary |theta| = 1, where the third
# SLD and J_33 diverge.
BOUNDARY_EPS = 1e-6

# Spin-1/2 operators: half the Pauli matrices.
SIGMA = np.array(
    [
        [[0.0, 0.5], [0.5, 0.0]],
        [[0.0, -0.5j], [0.5j, 0.0]],
        [[0.5, 0.0], [0.0, -0.5]],
    ],
    dtype=complex,
)

PAULI = 2 * SIGMA


def radial(theta) -> float:
    """Euclidean norm of a Bloch vector, validated against the boundary."""
    t = np.asarray(theta, dtype=float)
    if t.shape != (3,):
        raise ValidationError(f"Bloch vector must have 3 components, got shape {t.shape}")
    r = float(np.linalg.norm(t))
    check_radius(r)
    return r


def check_radius(r: float) -> float:
    if not 0.0 <= r <= 1.0 - BOUNDARY_EPS:
        raise BoundaryError(f"radial coordinate {r} outside [0, 1 - {BOUNDARY_EPS}]")
    return r


def bloch_state(theta) -> np.ndarray:
    """Density matrix I/2 + theta . S for a Bloch vector inside the unit ball."""
    t = np.asarray(theta, dtype=float)
    radial(t)
    return np.eye(2, dtype=complex) / 2 + np.tensordot(t, SIGMA, axes=1)


def bloch_rotation(theta):
    """Rotation carrying the z axis onto the direction of ``theta``.

    Returns
    -------
    rot : (3, 3) ndarray
        SO(3) matrix with ``rot @ (0,0,1) = theta/|theta|``.
    u : (2, 2) ndarray
        Corresponding SU(2) element: ``u @ (n.S) @ u^dag = (rot n).S``.

    For ``theta`` along +z (or zero) the identity pair is returned; for
    ``theta`` along -z the rotation is by pi about the x axis.
    """
    t = np.asarray(theta, dtype=float)
    r = float(np.linalg.norm(t))
    if r == 0.0:
        return np.eye(3), np.eye(2, dtype=complex)
    nhat = t / r
    cosang = float(np.clip(nhat[2], -1.0, 1.0))
    axis = np.array([-nhat[1], nhat[0], 0.0])
    axis_norm = np.linalg.norm(axis)
    if axis_norm < 1e-15:
        if cosang > 0:
            return np.eye(3), np.eye(2, dtype=complex)
        axis = np.array([1.0, 0.0, 0.0])
    else:
        axis = axis / axis_norm
    angle = float(np.arccos(cosang))
    # Rodrigues for SO(3)
    kmat = np.array(
        [[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]]
    )
    rot = np.eye(3) + np.sin(angle) * kmat + (1 - np.cos(angle)) * (kmat @ kmat)
    pauli_axis = np.tensordot(axis, PAULI, axes=1)
    u = np.cos(angle / 2) * np.eye(2, dtype=complex) - 1j * np.sin(angle / 2) * pauli_axis
    return rot, u


def sld_canonical(r: float) -> np.ndarray:
    """The three SLD operators at the reference point (0, 0, r).

    ``L_1 = 2 S_1``, ``L_2 = 2 S_2`` and ``L_3 = diag(1/(1+r), -1/(1-r))``;
    each satisfies ``S_k = rho o L_k`` with ``o`` the symmetrized product.
    """
    check_radius(r)
    l3 = np.diag([1.0 / (1.0 + r), -1.0 / (1.0 - r)]).astype(complex)
    return np.array([2 * SIGMA[0], 2 * SIGMA[1], l3])


def sld_set(theta) -> np.ndarray:
    """SLD operators at a general Bloch point, shape (3, 2, 2).

    Obtained by conjugating the closed forms at (0, 0, |theta|) with the
    rotation carrying z onto theta; the defining equations
    ``d rho / d theta^k = rho o L_k = S_k`` then hold at theta.
    """
    t = np.asarray(theta, dtype=float)
    r = radial(t)
    base = sld_canonical(r)
    if r == 0.0:
        return base
    rot, u = bloch_rotation(t)
    rotated = np.einsum("ab,bij->aij", rot, u[None] @ base @ u.conj().T[None])
    return rotated


class FisherPair(NamedTuple):
    """SLD Fisher matrix, inverse RLD Fisher matrix and commutator matrix."""

    j_sld: np.ndarray
    jtilde_inv: np.ndarray
    d_matrix: np.ndarray


def fisher_pair(r: float) -> FisherPair:
    """Fisher-type matrices of the full model at the point (0, 0, r).

    ``j_sld = diag(1, 1, 1/(1-r^2))`` and
    ``jtilde_inv = [[1, -ir, 0], [ir, 1, 0], [0, 0, 1-r^2]]`` are closed
    forms; ``d_matrix`` is computed independently from the commutator traces
    ``D_kj = i Tr rho [L_k, L_j]`` so the two routes can be cross-checked
    via ``jtilde_inv = J^-1 + (i/2) J^-1 D J^-1``.
    """
    check_radius(r)
    j_sld = np.diag([1.0, 1.0, 1.0 / (1.0 - r * r)])
    jtilde_inv = np.array(
        [[1.0, -1j * r, 0.0], [1j * r, 1.0, 0.0], [0.0, 0.0, 1.0 - r * r]],
        dtype=complex,
    )
    rho = np.diag([(1.0 + r) / 2, (1.0 - r) / 2]).astype(complex)
    slds = sld_canonical(r)
    d_matrix = np.zeros((3, 3))
    for k in range(3):
        for j in range(3):
            comm = slds[k] @ slds[j] - slds[j] @ slds[k]
            d_matrix[k, j] = float(np.real(1j * np.trace(rho @ comm)))
    return FisherPair(j_sld, jtilde_inv, d_matrix)


def fisher_at(theta) -> FisherPair:
    """Fisher-type matrices at a general Bloch point via rotational covariance."""
    t = np.asarray(theta, dtype=float)
    r = radial(t)
    base = fisher_pair(r)
    rot, _ = bloch_rotation(t)
    return FisherPair(
        rot @ base.j_sld @ rot.T,
        rot @ base.jtilde_inv @ rot.T,
        rot @ base.d_matrix @ rot.T,
    )


@dataclass(frozen=True)
class SubmodelTangent:
    """Normal form of a two-parameter subfamily through (0, 0, r).

    The derivative operators are ``d1 = S_1`` and
    ``d2 = cos(phi) S_2 + sin(phi) sqrt(1-r^2) S_3``; the associated SLD
    Gram matrix is the 2x2 identity.
    """

    phi: float
    r: float
    d1: np.ndarray
    d2: np.ndarray


def submodel_tangent(phi: float, r: float) -> SubmodelTangent:
    """Tangent pair of the two-parameter subfamily at angle ``phi`` in [0, pi/2]."""
    if not 0.0 <= phi <= np.pi / 2:
        raise ValidationError(f"phi must lie in [0, pi/2], got {phi}")
    check_radius(r)
    d1 = SIGMA[0].copy()
    d2 = np.cos(phi) * SIGMA[1] + np.sin(phi) * np.sqrt(1.0 - r * r) * SIGMA[2]
    return SubmodelTangent(phi=phi, r=r, d1=d1, d2=d2)
