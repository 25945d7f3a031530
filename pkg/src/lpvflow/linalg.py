"""Dense linear-algebra kernels shared by the rest of the toolkit.

Solves and symmetric eigendecompositions are backed by LAPACK (through
scipy/numpy); the characteristic polynomial is computed by the
Faddeev-LeVerrier recursion so the same algorithm can be reused verbatim on
polynomial-valued matrices elsewhere.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .errors import DimensionMismatch, NotSymmetric, SingularMatrix

# Alias used in signatures throughout the package; everything is a plain
# float64 ndarray.
Mat = np.ndarray

_PIVOT_REL_TOL = 1e-12
_SYM_REL_TOL = 1e-9


def _as_square(a: Mat, name: str = "matrix") -> Mat:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    return a


def solve_linear(a: Mat, b: Mat) -> Mat:
    """Solve ``a @ x = b`` by LU with partial pivoting.

    Raises SingularMatrix when any pivot is smaller than 1e-12 times the
    largest absolute entry of ``a``, rather than returning garbage.
    """
    a = _as_square(a, "a")
    b = np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(
            f"rhs has {b.shape[0]} rows, matrix has {a.shape[0]}"
        )
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        raise SingularMatrix("coefficient matrix is zero")
    with warnings.catch_warnings():
        # scipy warns on exactly-zero pivots; the pivot check below turns
        # that case into a typed SingularMatrix instead.
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(a, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) < _PIVOT_REL_TOL * scale:
        raise SingularMatrix(
            f"pivot {np.min(pivots):.3e} below threshold "
            f"{_PIVOT_REL_TOL * scale:.3e}"
        )
    return lu_solve((lu, piv), b)


def det(a: Mat) -> float:
    """Determinant via LU; 0.0 is a legitimate return value."""
    a = _as_square(a, "a")
    return float(np.linalg.det(a))


def char_poly(a: Mat) -> np.ndarray:
    """Coefficients of det(sI - a), highest degree first, leading 1.

    Faddeev-LeVerrier recursion: M_1 = I, c_k = -tr(a M_k)/k,
    M_{k+1} = a M_k + c_k I.  Returns an array of length n+1.
    """
    a = _as_square(a, "a")
    n = a.shape[0]
    coeffs = np.empty(n + 1)
    coeffs[0] = 1.0
    m = np.eye(n)
    for k in range(1, n + 1):
        am = a @ m
        c = -np.trace(am) / k
        coeffs[k] = c
        m = am + c * np.eye(n)
    return coeffs


def sym_eig(s: Mat) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, ascending.

    Rejects inputs whose asymmetry exceeds 1e-9 relative to the matrix norm;
    the symmetric part is what actually gets decomposed.
    """
    _check_sym(s)
    return np.linalg.eigvalsh(_sym_part(s))


def _sym_part(s: Mat) -> Mat:
    s = _as_square(s, "s")
    return 0.5 * (s + s.T)


def _check_sym(s: Mat) -> bool:
    s = _as_square(s, "s")
    norm = np.linalg.norm(s)
    asym = np.linalg.norm(s - s.T)
    if norm > 0 and asym > _SYM_REL_TOL * norm:
        raise NotSymmetric(
            f"asymmetry {asym:.3e} exceeds {_SYM_REL_TOL:.0e} * norm {norm:.3e}"
        )
    return True


def require_symmetric(s: Mat) -> Mat:
    """Validate symmetry (relative 1e-9 band) and return the symmetric part."""
    _check_sym(s)
    return _sym_part(s)


def sym_eig_decomp(s: Mat) -> tuple[np.ndarray, Mat]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric s."""
    _check_sym(s)
    w, v = np.linalg.eigh(_sym_part(s))
    return w, v


def kron(a: Mat, b: Mat) -> Mat:
    """Kronecker product."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def vec(a: Mat) -> np.ndarray:
    """Column-stacking vectorization (column-major)."""
    return np.asarray(a, dtype=float).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> Mat:
    """Inverse of :func:`vec` for a rows-by-cols matrix."""
    v = np.asarray(v, dtype=float)
    if v.size != rows * cols:
        raise DimensionMismatch(
            f"vector of length {v.size} cannot fill {rows}x{cols}"
        )
    return v.reshape(rows, cols, order="F")


def lyap_kernel(a: Mat, w: Mat) -> Mat:
    """Solve A'P + PA + W = 0 by Kronecker vectorization.

    No stability or symmetry checks here; callers gate the input. SingularMatrix
    propagates when A has eigenvalue pairs summing to zero.
    """
    a = _as_square(a, "a")
    w = _as_square(w, "w")
    if w.shape != a.shape:
        raise DimensionMismatch(f"w has shape {w.shape}, expected {a.shape}")
    n = a.shape[0]
    eye = np.eye(n)
    lhs = kron(eye, a.T) + kron(a.T, eye)
    return unvec(solve_linear(lhs, -vec(w)), n, n)


def is_pd(s: Mat, tol: float = 0.0) -> bool:
    """True when symmetric s has all eigenvalues > tol."""
    return bool(np.min(sym_eig(s)) > tol)


def is_psd(s: Mat, tol: float = 1e-10) -> bool:
    """True when symmetric s has all eigenvalues >= -tol * scale."""
    w = sym_eig(s)
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    return bool(np.min(w) >= -tol * scale)
