"""Dense complex matrices and the semidefinite-order primitives.

Every inequality check in the package goes through :func:`is_psd` /
:func:`loewner_leq`, so the tolerance policy lives here: a matrix is accepted
as positive semidefinite when its smallest eigenvalue is no lower than
``-psd_slack * max(1, ||m||_op)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

ComplexMatrix = npt.NDArray[np.complex128]

DEFAULT_PSD_SLACK = 1e-9
DEFAULT_EQUALITY_BAND = 1e-7


class ShapeError(ValueError):
    """Raised for non-square inputs or mismatched dimensions."""


class HermiticityError(ValueError):
    """Raised when a matrix that should be Hermitian is not, beyond the band."""


@dataclass(frozen=True)
class Tolerance:
    psd_slack: float = DEFAULT_PSD_SLACK
    equality_band: float = DEFAULT_EQUALITY_BAND

    def __post_init__(self):
        if not (self.psd_slack >= 0 and self.equality_band >= 0):
            raise ValueError("tolerances must be non-negative")


DEFAULT_TOLERANCE = Tolerance()


@dataclass(frozen=True)
class LoewnerVerdict:
    """Outcome of a semidefinite comparison.

    ``min_gap_eigenvalue`` is the smallest eigenvalue of the gap matrix
    (``b - a`` for ``a <= b``), ``scale`` the operator norm used to make the
    tolerance relative, and ``tolerance_used = psd_slack * scale``.
    """

    holds: bool
    min_gap_eigenvalue: float
    scale: float
    tolerance_used: float
    tight: bool = False

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "min_gap_eigenvalue": self.min_gap_eigenvalue,
            "scale": self.scale,
            "tolerance_used": self.tolerance_used,
            "tight": self.tight,
        }


def as_matrix(m) -> ComplexMatrix:
    """Coerce ``m`` to a finite 2-D complex128 array (a copy, never a view)."""
    arr = np.array(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def _require_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def hermitize(m) -> ComplexMatrix:
    """Return ``(m + m^dagger) / 2``.

    The result is exactly Hermitian: entry ``(i, j)`` and ``(j, i)`` are
    computed from the same two floating point operands.
    """
    m = as_matrix(m)
    _require_square(m)
    h = (m + dagger(m)) / 2
    # fold the upper triangle onto the lower one so h == h^dagger bitwise
    iu = np.triu_indices(h.shape[0], 1)
    h[(iu[1], iu[0])] = h[iu].conj()
    h[np.diag_indices(h.shape[0])] = h.diagonal().real
    return h


def op_norm(m) -> float:
    """Largest singular value."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def hermiticity_deviation(m) -> float:
    m = np.asarray(m)
    return op_norm(m - dagger(m))


def check_hermitian(m, tol: Tolerance = DEFAULT_TOLERANCE) -> ComplexMatrix:
    """Hermitize ``m`` after asserting it is Hermitian up to the equality band.

    Raises
    ------
    HermiticityError
        If ``||m - m^dagger||_op > equality_band * ||m||_op``. This signals a
        caller bug rather than round-off.
    """
    m = as_matrix(m)
    _require_square(m)
    dev = hermiticity_deviation(m)
    if dev > tol.equality_band * op_norm(m):
        raise HermiticityError(f"matrix is not Hermitian (deviation {dev:.3e})")
    return hermitize(m)


def is_psd(m, tol: Tolerance = DEFAULT_TOLERANCE) -> LoewnerVerdict:
    """Positive semidefiniteness with a relative eigenvalue floor.

    Examples
    --------
    >>> is_psd([[1, 0], [0, -1]]).holds
    False
    """
    h = check_hermitian(m, tol)
    eigs = np.linalg.eigvalsh(h)
    lam_min = float(eigs[0])
    scale = max(1.0, float(np.max(np.abs(eigs))))
    allowed = tol.psd_slack * scale
    return LoewnerVerdict(
        holds=lam_min >= -allowed,
        min_gap_eigenvalue=lam_min,
        scale=scale,
        tolerance_used=allowed,
        tight=abs(lam_min) <= tol.equality_band * scale,
    )


def loewner_leq(a, b, tol: Tolerance = DEFAULT_TOLERANCE) -> LoewnerVerdict:
    """Test ``a <= b`` in the Loewner order, i.e. ``b - a`` is PSD."""
    a = as_matrix(a)
    b = as_matrix(b)
    _require_square(a)
    _require_square(b)
    if a.shape != b.shape:
        raise ShapeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return is_psd(check_hermitian(b, tol) - check_hermitian(a, tol), tol)


def trace_norm(m) -> float:
    """Sum of singular values."""
    m = as_matrix(m)
    _require_square(m)
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def all_ones(n: int) -> ComplexMatrix:
    if n < 1:
        raise ValueError("all_ones needs n >= 1")
    return np.ones((n, n), dtype=np.complex128)


def projector_onto(vectors) -> ComplexMatrix:
    """Orthogonal projector onto the span of the orthonormal columns given."""
    v = np.asarray(vectors, dtype=np.complex128)
    return v @ dagger(v)
