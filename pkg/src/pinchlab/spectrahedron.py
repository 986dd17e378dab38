"""Membership in the weight spectrahedra.

``A_n`` holds the weight vectors ``alpha`` with ``diag(alpha) >= J`` and
``B_n`` the vectors ``beta`` with ``diag(beta) <= J``, where ``J`` is the
all-ones matrix. Membership in ``A_n`` is decided three ways: a direct
eigenvalue test, the Schur-complement recursion over prefixes, and (for
``n = 3``) the explicit polynomial inequalities.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .matrix_core import DEFAULT_TOLERANCE, Tolerance, all_ones, is_psd


@dataclass(frozen=True)
class MembershipVerdict:
    """Result of a membership query.

    For the direct tests ``certificate`` is the smallest eigenvalue of
    ``diag(alpha) - J`` (or ``J - diag(beta)``). For the recursive test it is
    the deciding Schur-complement pivot, and for the n = 3 closed form the
    slack of the deciding polynomial inequality. ``indeterminate`` is set
    when the recursion refused to invert a near-singular block.
    """

    member: bool
    on_boundary: bool
    certificate: float
    indeterminate: bool = False

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "on_boundary": self.on_boundary,
            "certificate": self.certificate,
            "indeterminate": self.indeterminate,
        }


class SignStructure(enum.Enum):
    ALL_NONPOSITIVE = "AllNonpositive"
    ONE_POSITIVE = "OnePositive"
    VIOLATING = "Violating"


class NotInteriorError(ValueError):
    """A boundary sampler was handed a prefix outside the open spectrahedron."""


def weight_vector(values, min_arity: int = 2) -> np.ndarray:
    w = np.array(values, dtype=float).ravel()
    if w.size < min_arity:
        raise ValueError(f"weight vector needs arity >= {min_arity}, got {w.size}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weight vector entries must be finite")
    return w


def _verdict_from_psd(m, tol: Tolerance) -> MembershipVerdict:
    v = is_psd(m, tol)
    return MembershipVerdict(
        member=v.holds,
        on_boundary=v.holds and v.tight,
        certificate=v.min_gap_eigenvalue,
    )


def in_A_direct(alpha, tol: Tolerance = DEFAULT_TOLERANCE) -> MembershipVerdict:
    alpha = weight_vector(alpha)
    return _verdict_from_psd(np.diag(alpha) - all_ones(alpha.size), tol)


def in_B_direct(beta, tol: Tolerance = DEFAULT_TOLERANCE) -> MembershipVerdict:
    beta = weight_vector(beta)
    return _verdict_from_psd(all_ones(beta.size) - np.diag(beta), tol)


def schur_threshold(prefix) -> float:
    """Smallest last weight that keeps ``prefix + (x,)`` inside ``A_n``.

    Equals ``1 + 1^T (diag(prefix) - J)^{-1} 1``; the prefix must lie in the
    interior of ``A_{n-1}``. The inverse is applied through a linear solve.
    """
    prefix = weight_vector(prefix, min_arity=1)
    k = prefix.size
    block = np.diag(prefix) - np.ones((k, k))
    ones = np.ones(k)
    return float(1.0 + ones @ np.linalg.solve(block, ones))


def in_A_recursive(alpha, tol: Tolerance = DEFAULT_TOLERANCE) -> MembershipVerdict:
    """Schur-complement recursion.

    ``n = 2`` uses ``alpha_1 > 1 and (alpha_1 - 1)(alpha_2 - 1) >= 1``. For
    larger ``n`` the prefix must be strictly interior to ``A_{n-1}`` (its own
    recursive certificate above the equality band), after which ``alpha_n``
    is compared with :func:`schur_threshold`. A prefix inside the band gives
    an indeterminate verdict; use :func:`in_A_direct` there.
    """
    alpha = weight_vector(alpha)
    if alpha.size == 2:
        a1, a2 = alpha[0] - 1.0, alpha[1] - 1.0
        product = a1 * a2
        scale = max(1.0, abs(product))
        # the min() keeps the certificate negative whenever alpha_1 <= 1
        cert = float(min(a1, a2, product - 1.0))
        member = bool(a1 > 0 and product - 1.0 >= -tol.psd_slack * scale)
        return MembershipVerdict(
            member=member,
            on_boundary=member and bool(abs(product - 1.0) <= tol.equality_band * scale),
            certificate=cert,
        )

    prefix = in_A_recursive(alpha[:-1], tol)
    if prefix.indeterminate or (prefix.member and prefix.on_boundary):
        return MembershipVerdict(False, False, prefix.certificate, indeterminate=True)
    if not prefix.member:
        return prefix

    threshold = schur_threshold(alpha[:-1])
    pivot = float(alpha[-1] - threshold)
    scale = max(1.0, abs(alpha[-1]), abs(threshold))
    member = bool(pivot >= -tol.psd_slack * scale)
    return MembershipVerdict(
        member=member,
        on_boundary=member and bool(abs(pivot) <= tol.equality_band * scale),
        certificate=pivot,
    )


def in_A3_closed_form(alpha, tol: Tolerance = DEFAULT_TOLERANCE) -> MembershipVerdict:
    """The three explicit inequalities for ``A_3``, evaluated literally:

    ``alpha_1 > 1``, ``alpha_2 > 1 + 1/(alpha_1 - 1)`` and
    ``[(a1-1)(a2-1) - 1][(a1-1)(a3-1) - 1] >= a1**2``.
    """
    alpha = weight_vector(alpha)
    if alpha.size != 3:
        raise ValueError(f"closed form needs arity 3, got {alpha.size}")
    a1, a2, a3 = alpha
    if not a1 > 1:
        return MembershipVerdict(False, False, float(a1 - 1.0))
    if not a2 > 1 + 1 / (a1 - 1):
        return MembershipVerdict(False, False, float((a1 - 1) * (a2 - 1) - 1))
    lhs = ((a1 - 1) * (a2 - 1) - 1) * ((a1 - 1) * (a3 - 1) - 1)
    slack = float(lhs - a1**2)
    scale = max(1.0, float(a1) ** 2)
    member = bool(slack >= -tol.psd_slack * scale)
    return MembershipVerdict(
        member=member,
        on_boundary=member and bool(abs(slack) <= tol.equality_band * scale),
        certificate=slack,
    )


def b_sign_structure(beta) -> SignStructure:
    """Sign pattern of ``beta``: every member of ``B_n`` is either all
    non-positive or has exactly one positive entry with the rest negative."""
    beta = weight_vector(beta)
    positive = beta > 0
    if not positive.any():
        return SignStructure.ALL_NONPOSITIVE
    if positive.sum() == 1 and np.all(beta[~positive] < 0):
        return SignStructure.ONE_POSITIVE
    return SignStructure.VIOLATING


def _is_interior_prefix(prefix: np.ndarray, tol: Tolerance, margin: float = 0.0) -> bool:
    if prefix.size == 1:
        return prefix[0] - 1.0 > max(margin, tol.equality_band)
    v = is_psd(np.diag(prefix) - all_ones(prefix.size), tol)
    return v.min_gap_eigenvalue > max(margin, tol.equality_band * v.scale)


def sample_A_boundary(
    n: int,
    interior_point=None,
    rng_seed=None,
    tol: Tolerance = DEFAULT_TOLERANCE,
    margin: float = 1e-3,
    box_high: float | None = None,
) -> np.ndarray:
    """A point on the boundary of ``A_n``.

    The first ``n - 1`` weights are ``interior_point`` when given, otherwise
    drawn uniformly from ``[1, box_high]^(n-1)`` (default ``box_high = 2n``)
    and rejected until their smallest eigenvalue exceeds ``margin``. The last
    weight is set to :func:`schur_threshold` of the prefix.

    Raises
    ------
    NotInteriorError
        If ``interior_point`` is not strictly inside ``A_{n-1}``.
    """
    if n < 2:
        raise ValueError("boundary sampling needs n >= 2")
    if interior_point is not None:
        prefix = weight_vector(interior_point, min_arity=1)
        if prefix.size != n - 1:
            raise ValueError(f"prefix must have {n - 1} entries, got {prefix.size}")
        if not _is_interior_prefix(prefix, tol):
            raise NotInteriorError(f"prefix {prefix.tolist()} is not interior")
    else:
        rng = np.random.default_rng(rng_seed)
        high = 2.0 * n if box_high is None else box_high
        while True:
            prefix = rng.uniform(1.0, high, size=n - 1)
            if _is_interior_prefix(prefix, tol, margin):
                break
    return np.append(prefix, schur_threshold(prefix))


def sample_B2_boundary(t: float) -> np.ndarray:
    """``(1 - t, 1 - 1/t)``, a boundary point of ``B_2``."""
    if not t > 0:
        raise ValueError("t must be positive")
    return np.array([1.0 - t, 1.0 - 1.0 / t])
