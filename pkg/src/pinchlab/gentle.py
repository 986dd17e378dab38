"""Two-outcome bounds and the ordered gentle-measurement lemma.

For ``0 < t <= 1`` and any two operators::

    (1-t) M1 rho M1^+ - (1/t - 1) M2 rho M2^+
        <= (M1 + M2) rho (M1 + M2)^+
        <= (1+t) M1 rho M1^+ + (1 + 1/t) M2 rho M2^+

Putting ``M1 = P``, ``M2 = 1 - P`` and ``t = sqrt(eps)`` gives operator
bounds on a state whose outcome ``P`` has probability at least ``1 - eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .matrix_core import (
    DEFAULT_TOLERANCE,
    LoewnerVerdict,
    ShapeError,
    Tolerance,
    as_matrix,
    dagger,
    hermitize,
    is_psd,
    loewner_leq,
    op_norm,
    trace_norm,
)
from .serialization import SchemaError, matrix_from_json, matrix_to_json


class InvalidInstanceError(ValueError):
    pass


def _check_t(t: float) -> float:
    t = float(t)
    if not t > 0 or not math.isfinite(t):
        raise ValueError(f"t must be positive, got {t}")
    return t


def _operands(rho, M1, M2):
    rho, M1, M2 = as_matrix(rho), as_matrix(M1), as_matrix(M2)
    if M1.shape != M2.shape:
        raise ShapeError(f"M1 {M1.shape} and M2 {M2.shape} differ in shape")
    if rho.shape != (M1.shape[1], M1.shape[1]):
        raise ShapeError(f"rho has shape {rho.shape}, operators act on dimension {M1.shape[1]}")
    return rho, M1, M2


def _conj(m, rho):
    return m @ rho @ dagger(m)


def binary_upper(rho, M1, M2, t: float) -> np.ndarray:
    """``(1+t) M1 rho M1^+ + (1+1/t) M2 rho M2^+``."""
    t = _check_t(t)
    rho, M1, M2 = _operands(rho, M1, M2)
    return hermitize((1 + t) * _conj(M1, rho) + (1 + 1 / t) * _conj(M2, rho))


def binary_lower(rho, M1, M2, t: float) -> np.ndarray:
    """``(1-t) M1 rho M1^+ - (1/t - 1) M2 rho M2^+``."""
    t = _check_t(t)
    rho, M1, M2 = _operands(rho, M1, M2)
    return hermitize((1 - t) * _conj(M1, rho) - (1 / t - 1) * _conj(M2, rho))


def upper_identity_residual(rho, M1, M2, t: float) -> np.ndarray:
    """``upper - S rho S^+ - K rho K^+`` with ``K = sqrt(t) M1 - M2/sqrt(t)``.

    Vanishes identically; the mixed terms cancel on expansion.
    """
    t = _check_t(t)
    rho, M1, M2 = _operands(rho, M1, M2)
    s = M1 + M2
    k = math.sqrt(t) * M1 - M2 / math.sqrt(t)
    upper = (1 + t) * _conj(M1, rho) + (1 + 1 / t) * _conj(M2, rho)
    return upper - _conj(s, rho) - _conj(k, rho)


def lower_identity_residual(rho, M1, M2, t: float) -> np.ndarray:
    """``S rho S^+ - L rho L^+ - lower`` with ``L = sqrt(t) M1 + M2/sqrt(t)``."""
    t = _check_t(t)
    rho, M1, M2 = _operands(rho, M1, M2)
    s = M1 + M2
    k = math.sqrt(t) * M1 + M2 / math.sqrt(t)
    lower = (1 - t) * _conj(M1, rho) - (1 / t - 1) * _conj(M2, rho)
    return _conj(s, rho) - _conj(k, rho) - lower


@dataclass(frozen=True)
class GentleInstance:
    """A state ``rho`` (trace at most one), a projector ``P`` and an ``eps``
    with ``Tr(rho P) >= 1 - eps``."""

    rho: np.ndarray
    P: np.ndarray
    epsilon: float
    tol: Tolerance = DEFAULT_TOLERANCE

    def __post_init__(self):
        rho, P = as_matrix(self.rho), as_matrix(self.P)
        band = self.tol.equality_band
        if rho.shape != P.shape or rho.shape[0] != rho.shape[1]:
            raise ShapeError(f"rho {rho.shape} and P {P.shape} must be square and equal")
        if not is_psd(rho, self.tol).holds:
            raise InvalidInstanceError("rho is not positive semidefinite")
        if np.trace(rho).real > 1 + band:
            raise InvalidInstanceError("rho has trace above one")
        if op_norm(P - dagger(P)) > band or op_norm(P @ P - P) > band:
            raise InvalidInstanceError("P is not an orthogonal projector")
        eps = float(self.epsilon)
        if not 0 <= eps <= 1:
            raise InvalidInstanceError(f"epsilon must lie in [0, 1], got {eps}")
        if 1 - np.trace(rho @ P).real > eps + band:
            raise InvalidInstanceError("Tr(rho P) < 1 - epsilon")
        rho, P = hermitize(rho), hermitize(P)
        rho.flags.writeable = False
        P.flags.writeable = False
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "epsilon", eps)

    @classmethod
    def tight(cls, rho, P, tol: Tolerance = DEFAULT_TOLERANCE) -> "GentleInstance":
        """Use the smallest admissible ``eps = 1 - Tr(rho P)``."""
        rho, P = as_matrix(rho), as_matrix(P)
        eps = min(1.0, max(0.0, 1.0 - float(np.trace(rho @ P).real)))
        return cls(rho, P, eps, tol)

    @property
    def P_perp(self) -> np.ndarray:
        return np.eye(self.P.shape[0]) - self.P

    def on_support(self) -> np.ndarray:
        """``P rho P``."""
        return hermitize(self.P @ self.rho @ self.P)

    def off_support(self) -> np.ndarray:
        """``P_perp rho P_perp``."""
        q = self.P_perp
        return hermitize(q @ self.rho @ q)

    def rho_perp(self) -> np.ndarray:
        """The subnormalised ``(1/eps) P_perp rho P_perp``; not renormalised."""
        if self.epsilon == 0:
            raise ZeroDivisionError("rho_perp is undefined for epsilon = 0")
        return self.off_support() / self.epsilon

    def to_json(self) -> dict:
        return {"rho": matrix_to_json(self.rho), "P": matrix_to_json(self.P), "epsilon": self.epsilon}

    @classmethod
    def from_json(cls, doc, tol: Tolerance = DEFAULT_TOLERANCE) -> "GentleInstance":
        if not isinstance(doc, dict):
            raise SchemaError("instance", "expected an object with rho, P, epsilon")
        for key in ("rho", "P"):
            if key not in doc:
                raise SchemaError(key, "missing")
        rho = matrix_from_json(doc["rho"], "rho")
        P = matrix_from_json(doc["P"], "P")
        eps = doc.get("epsilon")
        if eps is None:
            return cls.tight(rho, P, tol)
        if not isinstance(eps, (int, float)) or isinstance(eps, bool):
            raise SchemaError("epsilon", "expected a number")
        return cls(rho, P, eps, tol)


def _degenerate(inst: GentleInstance) -> np.ndarray:
    """For ``eps = 0`` the only consistent case is ``rho = P rho P``."""
    off = inst.off_support()
    if op_norm(off) > inst.tol.equality_band:
        raise InvalidInstanceError("epsilon = 0 but P_perp rho P_perp is nonzero")
    return inst.on_support()


def gentle_bounds(inst: GentleInstance, form: str = "corollary") -> tuple[np.ndarray, np.ndarray]:
    """Operator bounds ``(upper, lower)`` on ``rho`` with ``t = sqrt(eps)``.

    ``form="corollary"`` uses the coefficient ``1 - sqrt(eps)`` on ``P rho P``
    in the upper bound, as the lemma is usually quoted; ``form="proposition"``
    substitutes ``t = sqrt(eps)`` into :func:`binary_upper` and so carries
    ``1 + sqrt(eps)``. The lower bound is the same in both forms. Whether the
    sandwich holds is left to :func:`sandwich_report`.
    """
    if form not in ("corollary", "proposition"):
        raise ValueError(f"unknown form {form!r}")
    if inst.epsilon == 0:
        exact = _degenerate(inst)
        return exact, exact
    r = math.sqrt(inst.epsilon)
    on, off = inst.on_support(), inst.off_support()
    upper_on = 1 - r if form == "corollary" else 1 + r
    upper = upper_on * on + (1 + 1 / r) * off
    lower = (1 - r) * on + (1 - 1 / r) * off
    return upper, lower


def gentle_difference_bounds(inst: GentleInstance) -> tuple[np.ndarray, np.ndarray]:
    """``(lower, upper)`` bracketing ``rho - P rho P``:

    ``-sqrt(eps) P rho P - sqrt(eps) rho_perp`` and
    ``sqrt(eps) P rho P + (eps + sqrt(eps)) rho_perp``.
    """
    if inst.epsilon == 0:
        _degenerate(inst)
        zero = np.zeros_like(inst.rho)
        return zero, zero
    r = math.sqrt(inst.epsilon)
    on, perp = inst.on_support(), inst.rho_perp()
    return -r * on - r * perp, r * on + (inst.epsilon + r) * perp


class TraceNormReport(NamedTuple):
    half_t1: float
    bound_new: float
    bound_original: float
    bound_improved: float
    within_bound: bool

    def to_json(self) -> dict:
        return self._asdict()


def trace_norm_report(inst: GentleInstance) -> TraceNormReport:
    """Half the trace distance between ``rho`` and ``P rho P`` next to
    ``sqrt(eps) + eps`` and the comparison constants ``2 sqrt(eps)`` and
    ``sqrt(eps)``."""
    r = math.sqrt(inst.epsilon)
    half = 0.5 * trace_norm(inst.rho - inst.on_support())
    bound = r + inst.epsilon
    return TraceNormReport(
        half_t1=half,
        bound_new=bound,
        bound_original=2 * r,
        bound_improved=r,
        within_bound=half <= bound + inst.tol.equality_band,
    )


@dataclass(frozen=True)
class SandwichReport:
    """Loewner verdicts for every bound on one instance.

    ``corollary_upper`` is reported but not part of :attr:`all_hold`; see
    :func:`gentle_bounds`.
    """

    lower: LoewnerVerdict
    proposition_upper: LoewnerVerdict
    corollary_upper: LoewnerVerdict
    difference_lower: LoewnerVerdict
    difference_upper: LoewnerVerdict

    @property
    def all_hold(self) -> bool:
        return (
            self.lower.holds
            and self.proposition_upper.holds
            and self.difference_lower.holds
            and self.difference_upper.holds
        )

    def to_json(self) -> dict:
        return {
            "lower": self.lower.to_json(),
            "proposition_upper": self.proposition_upper.to_json(),
            "corollary_upper": self.corollary_upper.to_json(),
            "difference_lower": self.difference_lower.to_json(),
            "difference_upper": self.difference_upper.to_json(),
            "all_hold": self.all_hold,
        }


def sandwich_report(inst: GentleInstance) -> SandwichReport:
    tol = inst.tol
    rho = inst.rho
    cor_upper, lower = gentle_bounds(inst, "corollary")
    prop_upper, _ = gentle_bounds(inst, "proposition")
    d_lower, d_upper = gentle_difference_bounds(inst)
    diff = rho - inst.on_support()
    return SandwichReport(
        lower=loewner_leq(lower, rho, tol),
        proposition_upper=loewner_leq(rho, prop_upper, tol),
        corollary_upper=loewner_leq(rho, cor_upper, tol),
        difference_lower=loewner_leq(d_lower, diff, tol),
        difference_upper=loewner_leq(diff, d_upper, tol),
    )
