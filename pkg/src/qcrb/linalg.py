"""Dense Hermitian and real-symmetric matrix primitives.

Everything downstream (bound formulas, moment matrices, limit diagnostics)
is built on three operations: eigendecomposition, PSD square root, and the
matrix absolute value with its trace norm.  Matrices are plain ``ndarray``
values; the helpers below validate the structural requirements instead of
wrapping arrays in classes.
"""

import numpy as np

from .errors import NotPositiveSemidefiniteError, ValidationError

# Absolute tolerance for accepting a matrix as Hermitian, scaled by the
# largest entry so that operator products with large norms are not rejected
# on roundoff alone.
HERMITIAN_ATOL = 1e-12

# Eigenvalues of a nominally PSD matrix more negative than this fraction of
# the spectral radius are treated as genuine violations; anything smaller is
# roundoff from products like sqrt(G) @ M @ sqrt(G) and is clipped to zero.
PSD_CLIP_TOL = 1e-10


def require_hermitian(mat, *, atol=None, name="matrix") -> np.ndarray:
    """Return ``mat`` as a complex array, raising if it is not Hermitian.

    Parameters
    ----------
    mat : array_like
        Square matrix to validate.
    atol : float, optional
        Absolute asymmetry tolerance; defaults to ``HERMITIAN_ATOL`` scaled
        by ``max(1, |mat|_max)``.
    name : str
        Label used in error messages.
    """
    a = np.asarray(mat, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValidationError(f"{name} must have dimension >= 1")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    tol = HERMITIAN_ATOL * scale if atol is None else atol
    asym = float(np.max(np.abs(a - a.conj().T)))
    if asym > tol:
        raise ValidationError(f"{name} is not Hermitian: asymmetry {asym:.3e} > {tol:.3e}")
    return (a + a.conj().T) / 2


def require_real_symmetric(mat, *, atol=None, name="matrix") -> np.ndarray:
    """Return ``mat`` as a real array, raising if it is not real symmetric."""
    a = np.asarray(mat)
    if np.iscomplexobj(a):
        if a.size and float(np.max(np.abs(a.imag))) > HERMITIAN_ATOL * max(1.0, float(np.max(np.abs(a)))):
            raise ValidationError(f"{name} must be real")
        a = a.real
    a = np.asarray(a, dtype=float)
    h = require_hermitian(a, atol=atol, name=name)
    return h.real


def hermitian_eig(h):
    """Eigendecomposition of a Hermitian matrix.

    Returns eigenvalues in ascending order and the unitary matrix of
    eigenvectors (columns), so that ``h = u @ diag(w) @ u.conj().T``.
    """
    a = require_hermitian(h)
    w, u = np.linalg.eigh(a)
    return w, u


def psd_sqrt(s, *, clip_tol=PSD_CLIP_TOL) -> np.ndarray:
    """PSD square root of a positive-semidefinite Hermitian matrix.

    Eigenvalues in [-clip_tol * max|lambda|, 0) are treated as roundoff and
    clipped to zero; anything more negative raises
    ``NotPositiveSemidefiniteError``.
    """
    w, u = hermitian_eig(s)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and float(w.min()) < -clip_tol * scale:
        raise NotPositiveSemidefiniteError(
            f"matrix is not PSD: min eigenvalue {w.min():.3e} (scale {scale:.3e})"
        )
    root = (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T
    return (root + root.conj().T) / 2


def abs_and_trace_norm(h):
    """Matrix absolute value ``U diag(|lambda|) U*`` and trace norm of a Hermitian matrix.

    Returns
    -------
    abs_part : ndarray
        Hermitian PSD matrix with the same eigenvectors and absolute eigenvalues.
    trace_norm : float
        Sum of absolute eigenvalues.
    """
    w, u = hermitian_eig(h)
    abs_part = (u * np.abs(w)) @ u.conj().T
    abs_part = (abs_part + abs_part.conj().T) / 2
    return abs_part, float(np.sum(np.abs(w)))


def hermitian_imag_part(z) -> np.ndarray:
    """The Hermitian matrix (Z - Z^T)/2 carrying the imaginary part of Z.

    For Hermitian ``Z = S + iA`` (S real symmetric, A real antisymmetric)
    this returns ``iA``, whose trace norm is the quantity appearing in the
    bound formulas.
    """
    z = np.asarray(z, dtype=complex)
    return (z - z.T) / 2
