"""Pinching maps and the weighted pinching inequalities.

For operators ``M_1..M_n`` with ``S = sum_i M_i`` the generalised inequality
reads ``S rho S^dagger <= sum_i alpha_i M_i rho M_i^dagger`` for every
``alpha`` in ``A_n``; the reverse one flips the order for ``beta`` in ``B_n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix_core import (
    DEFAULT_TOLERANCE,
    ShapeError,
    Tolerance,
    as_matrix,
    dagger,
    LoewnerVerdict,
    hermitize,
    is_psd,
    loewner_leq,
    op_norm,
)
from .serialization import SchemaError, matrix_from_json, matrix_to_json
from .spectrahedron import weight_vector


class InvalidPOVMError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


def _frozen(m) -> np.ndarray:
    m = as_matrix(m)
    m.flags.writeable = False
    return m


@dataclass(frozen=True)
class ProjectivePOVM:
    """Orthogonal projectors summing to the identity.

    Validation happens at construction; invalid inputs raise
    :class:`InvalidPOVMError` and are never repaired.
    """

    projectors: tuple
    tol: Tolerance = DEFAULT_TOLERANCE

    def __post_init__(self):
        projs = tuple(_frozen(p) for p in self.projectors)
        object.__setattr__(self, "projectors", projs)
        if len(projs) < 2:
            raise InvalidPOVMError("a projective POVM needs n >= 2 projectors")
        d = projs[0].shape[0]
        band = self.tol.equality_band
        total = np.zeros((d, d), dtype=np.complex128)
        for i, p in enumerate(projs):
            if p.shape != (d, d):
                raise InvalidPOVMError(f"projector {i} has shape {p.shape}, expected {(d, d)}")
            if op_norm(p - dagger(p)) > band:
                raise InvalidPOVMError(f"projector {i} is not Hermitian")
            if op_norm(p @ p - p) > band:
                raise InvalidPOVMError(f"projector {i} is not idempotent")
            total += p
        if op_norm(total - np.eye(d)) > band:
            raise InvalidPOVMError("projectors do not sum to the identity")

    @property
    def dimension(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.projectors)

    @property
    def ranks(self) -> list[int]:
        return [int(round(np.trace(p).real)) for p in self.projectors]

    def is_nontrivial(self) -> bool:
        return all(r > 0 for r in self.ranks)

    def as_family(self) -> "OperatorFamily":
        return OperatorFamily(self.projectors)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "projectors": [matrix_to_json(p) for p in self.projectors],
        }

    @classmethod
    def from_json(cls, doc, tol: Tolerance = DEFAULT_TOLERANCE, field: str = "povm"):
        if not isinstance(doc, dict) or "projectors" not in doc:
            raise SchemaError(f"{field}.projectors", "missing")
        if not isinstance(doc["projectors"], list):
            raise SchemaError(f"{field}.projectors", "expected a list of matrices")
        projs = [
            matrix_from_json(p, f"{field}.projectors[{i}]")
            for i, p in enumerate(doc["projectors"])
        ]
        povm = cls(tuple(projs), tol)
        if "dimension" in doc and doc["dimension"] != povm.dimension:
            raise SchemaError(f"{field}.dimension", "does not match the projector size")
        return povm


@dataclass(frozen=True)
class OperatorFamily:
    """``n >= 2`` operators of identical shape ``(out_dim, in_dim)``."""

    operators: tuple

    def __post_init__(self):
        ops = tuple(_frozen(m) for m in self.operators)
        object.__setattr__(self, "operators", ops)
        if len(ops) < 2:
            raise ShapeError("an operator family needs n >= 2 members")
        shape = ops[0].shape
        for i, m in enumerate(ops):
            if m.shape != shape:
                raise ShapeError(f"operator {i} has shape {m.shape}, expected {shape}")

    @property
    def n(self) -> int:
        return len(self.operators)

    @property
    def in_dim(self) -> int:
        return self.operators[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.operators[0].shape[0]

    def to_json(self) -> dict:
        return {
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
            "operators": [matrix_to_json(m) for m in self.operators],
        }

    @classmethod
    def from_json(cls, doc, field: str = "family"):
        if not isinstance(doc, dict) or "operators" not in doc:
            raise SchemaError(f"{field}.operators", "missing")
        if not isinstance(doc["operators"], list):
            raise SchemaError(f"{field}.operators", "expected a list of matrices")
        ops = [
            matrix_from_json(m, f"{field}.operators[{i}]")
            for i, m in enumerate(doc["operators"])
        ]
        try:
            fam = cls(tuple(ops))
        except ShapeError as exc:
            raise SchemaError(f"{field}.operators", str(exc)) from None
        for key, value in (("in_dim", fam.in_dim), ("out_dim", fam.out_dim)):
            if key in doc and doc[key] != value:
                raise SchemaError(f"{field}.{key}", "does not match the operator shapes")
        return fam


def _as_family(fam) -> OperatorFamily:
    if isinstance(fam, OperatorFamily):
        return fam
    if isinstance(fam, ProjectivePOVM):
        return fam.as_family()
    return OperatorFamily(tuple(fam))


def _check_rho(rho, in_dim: int, tol: Tolerance) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape != (in_dim, in_dim):
        raise ShapeError(f"rho has shape {rho.shape}, operators act on dimension {in_dim}")
    if not is_psd(rho, tol).holds:
        raise NotPSDError("rho is not positive semidefinite")
    return rho


def pinch(rho, povm: ProjectivePOVM) -> np.ndarray:
    """``sum_i P_i rho P_i``."""
    rho = as_matrix(rho)
    if rho.shape != (povm.dimension, povm.dimension):
        raise ShapeError(f"rho has shape {rho.shape}, POVM dimension is {povm.dimension}")
    return hermitize(sum(p @ rho @ p for p in povm.projectors))


def weighted_conjugation(rho, fam, w) -> np.ndarray:
    fam = _as_family(fam)
    w = weight_vector(w)
    if w.size != fam.n:
        raise ShapeError(f"{w.size} weights for a family of {fam.n} operators")
    rho = as_matrix(rho)
    if rho.shape != (fam.in_dim, fam.in_dim):
        raise ShapeError(f"rho has shape {rho.shape}, operators act on dimension {fam.in_dim}")
    return hermitize(sum(wi * (m @ rho @ dagger(m)) for wi, m in zip(w, fam.operators)))


def sum_conjugation(rho, fam) -> np.ndarray:
    fam = _as_family(fam)
    rho = as_matrix(rho)
    if rho.shape != (fam.in_dim, fam.in_dim):
        raise ShapeError(f"rho has shape {rho.shape}, operators act on dimension {fam.in_dim}")
    s = sum(fam.operators)
    return hermitize(s @ rho @ dagger(s))


def verify_generalized(fam, alpha, rho, tol: Tolerance = DEFAULT_TOLERANCE) -> LoewnerVerdict:
    """Check ``S rho S^dagger <= sum_i alpha_i M_i rho M_i^dagger``."""
    fam = _as_family(fam)
    rho = _check_rho(rho, fam.in_dim, tol)
    return loewner_leq(sum_conjugation(rho, fam), weighted_conjugation(rho, fam, alpha), tol)


def verify_reverse(fam, beta, rho, tol: Tolerance = DEFAULT_TOLERANCE) -> LoewnerVerdict:
    """Check ``sum_i beta_i M_i rho M_i^dagger <= S rho S^dagger``."""
    fam = _as_family(fam)
    rho = _check_rho(rho, fam.in_dim, tol)
    return loewner_leq(weighted_conjugation(rho, fam, beta), sum_conjugation(rho, fam), tol)


def verify_hayashi(povm: ProjectivePOVM, rho, tol: Tolerance = DEFAULT_TOLERANCE) -> LoewnerVerdict:
    """``rho <= n * pinch(rho)``."""
    rho = _check_rho(rho, povm.dimension, tol)
    return loewner_leq(rho, povm.n * pinch(rho, povm), tol)


def fixed_point_vectors(povm: ProjectivePOVM, rng_seed=None) -> list[np.ndarray]:
    """One unit vector ``e_i`` with ``P_i e_i = e_i`` per projector.

    Without a seed this is the top eigenvector of ``P_i``; with a seed, a
    normalised ``P_i g`` for complex Gaussian ``g`` whenever ``rank P_i > 1``.
    """
    rng = None if rng_seed is None else np.random.default_rng(rng_seed)
    vectors = []
    for i, p in enumerate(povm.projectors):
        evals, evecs = np.linalg.eigh(hermitize(p))
        if evals[-1] < 0.5:
            raise InvalidPOVMError(f"projector {i} is zero; no fixed point exists")
        e = evecs[:, -1]
        rank = int(np.sum(evals > 0.5))
        if rng is not None and rank > 1:
            g = rng.standard_normal(p.shape[0]) + 1j * rng.standard_normal(p.shape[0])
            v = p @ g
            e = v / np.linalg.norm(v)
        # fix the global phase: largest-magnitude component real and positive
        k = int(np.argmax(np.abs(e)))
        vectors.append(e * (abs(e[k]) / e[k]))
    return vectors


def converse_witness(povm: ProjectivePOVM, rng_seed=None) -> np.ndarray:
    """``rho = sum_ij |e_i><e_j| = |s><s|`` with ``s = sum_i e_i``."""
    s = sum(fixed_point_vectors(povm, rng_seed))
    return np.outer(s, s.conj())


def converse_check(
    povm: ProjectivePOVM, alpha, tol: Tolerance = DEFAULT_TOLERANCE, rng_seed=None
) -> bool:
    """Whether the weighted pinching inequality holds on the witness state.

    For a nontrivial projective POVM this decides ``alpha in A_n``.
    """
    alpha = weight_vector(alpha)
    if alpha.size != povm.n:
        raise ShapeError(f"{alpha.size} weights for a POVM with {povm.n} outcomes")
    rho = converse_witness(povm, rng_seed)
    return verify_generalized(povm, alpha, rho, tol).holds
