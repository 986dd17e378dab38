"""Seeded random instances and verification campaigns.

Every trial draws from its own generator seeded by :func:`trial_seed`, a
counter-based split of the master seed, so trials can run in any order or in
parallel and any single one can be replayed from its seed alone.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from . import gentle, pinching, spectrahedron
from .matrix_core import DEFAULT_TOLERANCE, Tolerance, all_ones, dagger, is_psd

MODES = (
    "generalized",
    "reverse",
    "converse",
    "gentle",
    "membership",
    "hayashi",
    "tightness",
    "identity",
)

IDENTITY_TOLERANCE = 1e-10
CPTP_TOLERANCE = 1e-10
MAX_RECORDED_FAILURES = 20

_DEFAULT_DIMS = {
    "generalized": (1, 2, 3, 4, 5, 6),
    "reverse": (1, 2, 3, 4, 5, 6),
    "identity": (1, 2, 3, 4, 5, 6),
    "converse": (2, 3, 4, 5, 6, 7, 8),
    "hayashi": (2, 3, 4, 5, 6, 7, 8),
    "gentle": (2, 3, 4, 5, 6, 7, 8),
    "membership": (),
    "tightness": (),
}
_DEFAULT_ARITIES = {
    "generalized": (2, 3, 4),
    "reverse": (2, 3, 4),
    "identity": (2,),
    "converse": (2, 3, 4),
    "hayashi": (2, 3, 4, 5, 6, 7, 8),
    "gentle": (2,),
    "membership": (2, 3, 4, 5),
    "tightness": (2, 3, 4, 5),
}


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def trial_seed(master_seed: int, index: int) -> int:
    """Seed of trial ``index``; depends only on the pair, not on run order."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def _ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2)


def random_psd(d: int, rng_seed=None, normalize: bool = False) -> np.ndarray:
    """``G G^dagger`` for a complex Gaussian ``d x d`` matrix ``G``."""
    if d < 1:
        raise ValueError("d must be positive")
    g = _ginibre(d, d, _rng(rng_seed))
    rho = g @ dagger(g)
    rho = (rho + dagger(rho)) / 2
    if normalize:
        rho = rho / np.trace(rho).real
    return rho


def haar_unitary(d: int, rng_seed=None) -> np.ndarray:
    """QR of a Ginibre matrix with the diagonal phases of ``R`` divided out."""
    q, r = np.linalg.qr(_ginibre(d, d, _rng(rng_seed)))
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_composition(d: int, n: int, rng_seed=None) -> list[int]:
    """Uniform composition of ``d`` into ``n`` positive parts."""
    if not 1 <= n <= d:
        raise ValueError(f"cannot split {d} into {n} positive parts")
    cuts = np.sort(_rng(rng_seed).choice(np.arange(1, d), size=n - 1, replace=False))
    edges = np.concatenate(([0], cuts, [d]))
    return [int(x) for x in np.diff(edges)]


def random_projective_povm(d: int, n: int, rng_seed=None, sizes=None) -> pinching.ProjectivePOVM:
    """Projectors onto consecutive column groups of a Haar-style unitary."""
    if n < 2 or n > d:
        raise ValueError(f"need 2 <= n <= d, got n={n}, d={d}")
    rng = _rng(rng_seed)
    u = haar_unitary(d, rng)
    sizes = random_composition(d, n, rng) if sizes is None else list(sizes)
    if len(sizes) != n or sum(sizes) != d or min(sizes) < 1:
        raise ValueError(f"invalid group sizes {sizes} for d={d}, n={n}")
    projs, start = [], 0
    for k in sizes:
        cols = u[:, start : start + k]
        projs.append(cols @ dagger(cols))
        start += k
    return pinching.ProjectivePOVM(tuple(projs))


def random_projector(d: int, rank: int, rng_seed=None) -> np.ndarray:
    cols = haar_unitary(d, rng_seed)[:, :rank]
    return cols @ dagger(cols)


def random_family(d_A: int, d_B: int, n: int, rng_seed=None) -> pinching.OperatorFamily:
    """``n`` independent complex Gaussian ``d_B x d_A`` matrices."""
    rng = _rng(rng_seed)
    return pinching.OperatorFamily(tuple(_ginibre(d_B, d_A, rng) for _ in range(n)))


def sample_A_member(n: int, rng_seed=None, boundary: bool = False) -> np.ndarray:
    """A random point of ``A_n``: a permuted boundary point, pushed inward
    by exponential increments unless ``boundary`` is set."""
    rng = _rng(rng_seed)
    alpha = spectrahedron.sample_A_boundary(n, rng_seed=rng)
    if not boundary:
        alpha = alpha + rng.exponential(1.0, size=n)
    return rng.permutation(alpha)


def sample_B_member(n: int, rng_seed=None) -> tuple[str, np.ndarray]:
    """A random point of ``B_n`` together with the way it was drawn."""
    rng = _rng(rng_seed)
    kinds = ["zero", "nonpositive", "one_positive"] + (["b2_boundary"] if n == 2 else [])
    kind = kinds[rng.integers(len(kinds))]
    if kind == "zero":
        beta = np.zeros(n)
    elif kind == "b2_boundary":
        beta = spectrahedron.sample_B2_boundary(10 ** rng.uniform(-2, 2))
    elif kind == "nonpositive":
        beta = -rng.exponential(2.0, size=n)
        beta[rng.random(n) < 0.2] = 0.0
    else:
        for _ in range(100):
            beta = np.concatenate(([rng.uniform(0, 1)], -rng.exponential(2.0, size=n - 1)))
            if spectrahedron.in_B_direct(beta).member:
                break
        else:
            kind, beta = "nonpositive", -rng.exponential(2.0, size=n)
    beta = rng.permutation(beta)
    if not spectrahedron.in_B_direct(beta).member:
        raise AssertionError(f"sampled beta {beta} is not in B_{n}")
    return kind, beta


@dataclass(frozen=True)
class CampaignConfig:
    master_seed: int
    trials: int
    mode: str = "generalized"
    dims: tuple = ()
    arities: tuple = ()
    alpha_scale: float = 1.0
    tolerance: Tolerance = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ValueError("trials must be a positive integer")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit non-negative integer")
        dims = tuple(int(d) for d in self.dims) or _DEFAULT_DIMS[self.mode]
        arities = tuple(int(n) for n in self.arities) or _DEFAULT_ARITIES[self.mode]
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "arities", arities)
        if any(n < 2 for n in arities):
            raise ValueError("arities must be >= 2")
        if any(d < 1 for d in dims):
            raise ValueError("dims must be >= 1")
        if self.mode in ("converse", "hayashi") and not _pairs(dims, arities):
            raise ValueError("no (dimension, arity) pair with 2 <= n <= d")
        if self.mode == "gentle" and not any(d >= 2 for d in dims):
            raise ValueError("gentle mode needs a dimension >= 2")

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["dims"] = list(self.dims)
        doc["arities"] = list(self.arities)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "CampaignConfig":
        doc = dict(doc)
        if "tolerance" in doc:
            doc["tolerance"] = Tolerance(**doc["tolerance"])
        doc["dims"] = tuple(doc.get("dims", ()))
        doc["arities"] = tuple(doc.get("arities", ()))
        return cls(**doc)


def _pairs(dims, arities) -> list[tuple[int, int]]:
    return [(d, n) for d in dims for n in arities if 2 <= n <= d]


class TrialOutcome(NamedTuple):
    """``value`` is the signed check slack: the smallest gap eigenvalue for
    inequality checks, negative exactly when the check is violated."""

    index: int
    seed: int
    status: str
    value: float
    extras: dict


def _pick(rng, values):
    return values[rng.integers(len(values))]


def _trial_generalized(cfg, rng):
    n = _pick(rng, cfg.arities)
    boundary = bool(rng.random() < 0.5)
    alpha = sample_A_member(n, rng, boundary=boundary) * cfg.alpha_scale
    d_a, d_b = _pick(rng, cfg.dims), _pick(rng, cfg.dims)
    fam = random_family(d_a, d_b, n, rng)
    rho = random_psd(d_a, rng, normalize=True)
    v = pinching.verify_generalized(fam, alpha, rho, cfg.tolerance)
    extras = {
        "boundary_trials": int(boundary),
        "rectangular_trials": int(d_a != d_b),
        "min_relative_gap": v.min_gap_eigenvalue / v.scale,
    }
    return ("pass" if v.holds else "fail"), v.min_gap_eigenvalue, extras


def _trial_reverse(cfg, rng):
    n = _pick(rng, cfg.arities)
    kind, beta = sample_B_member(n, rng)
    d_a, d_b = _pick(rng, cfg.dims), _pick(rng, cfg.dims)
    fam = random_family(d_a, d_b, n, rng)
    rho = random_psd(d_a, rng, normalize=True)
    v = pinching.verify_reverse(fam, beta, rho, cfg.tolerance)
    extras = {f"beta_{kind}": 1, "min_relative_gap": v.min_gap_eigenvalue / v.scale}
    return ("pass" if v.holds else "fail"), v.min_gap_eigenvalue, extras


def _trial_hayashi(cfg, rng):
    d, n = _pick(rng, _pairs(cfg.dims, cfg.arities))
    povm = random_projective_povm(d, n, rng)
    rho = random_psd(d, rng, normalize=True)
    pinched = pinching.pinch(rho, povm)
    trace_err = abs(np.trace(pinched).real - np.trace(rho).real)
    cptp_ok = trace_err <= CPTP_TOLERANCE * np.trace(rho).real and is_psd(pinched, cfg.tolerance).holds
    v = pinching.verify_hayashi(povm, rho, cfg.tolerance)
    extras = {"max_trace_error": float(trace_err), "min_relative_gap": v.min_gap_eigenvalue / v.scale}
    ok = v.holds and cptp_ok
    value = v.min_gap_eigenvalue if cptp_ok else min(v.min_gap_eigenvalue, -float(trace_err))
    return ("pass" if ok else "fail"), value, extras


def _direct_certificate(alpha, tol: Tolerance) -> tuple[bool, float, bool]:
    v = is_psd(np.diag(alpha) - all_ones(alpha.size), tol)
    return v.holds, v.min_gap_eigenvalue, abs(v.min_gap_eigenvalue) <= tol.equality_band


def _trial_converse(cfg, rng):
    d, n = _pick(rng, _pairs(cfg.dims, cfg.arities))
    povm = random_projective_povm(d, n, rng)
    alpha = rng.uniform(1.0, 1.0 + 2 * n, size=n)
    witness_seed = int(rng.integers(2**63)) if rng.random() < 0.5 else None
    got = pinching.converse_check(povm, alpha, cfg.tolerance, rng_seed=witness_seed)
    member, cert, in_band = _direct_certificate(alpha, cfg.tolerance)
    extras = {"members": int(member), "random_witness": int(witness_seed is not None)}
    if in_band:
        return "indeterminate", abs(cert), extras
    return ("pass", abs(cert), extras) if got == member else ("fail", -abs(cert), extras)


def _trial_tightness(cfg, rng):
    n = _pick(rng, cfg.arities)
    alpha = spectrahedron.sample_A_boundary(n, rng_seed=rng)
    povm = random_projective_povm(n, n, rng)
    rho = pinching.converse_witness(povm)
    v = pinching.verify_generalized(povm, alpha, rho, cfg.tolerance)
    band = cfg.tolerance.equality_band
    gap = abs(v.min_gap_eigenvalue)
    extras = {"max_abs_gap": gap}
    return ("pass" if gap <= band else "fail"), band - gap, extras


def _trial_identity(cfg, rng):
    d_a, d_b = _pick(rng, cfg.dims), _pick(rng, cfg.dims)
    m1, m2 = _ginibre(d_b, d_a, rng), _ginibre(d_b, d_a, rng)
    rho = random_psd(d_a, rng, normalize=True)
    t = float(rng.uniform(0.01, 1.0))
    res = max(
        float(np.max(np.abs(gentle.upper_identity_residual(rho, m1, m2, t)))),
        float(np.max(np.abs(gentle.lower_identity_residual(rho, m1, m2, t)))),
    )
    value = IDENTITY_TOLERANCE - res
    return ("pass" if value >= 0 else "fail"), value, {"max_residual": res}


def _trial_gentle(cfg, rng):
    d = _pick(rng, [x for x in cfg.dims if x >= 2])
    rank = int(rng.integers(1, d))
    p = random_projector(d, rank, rng)
    # mixing weight spreads eps over several decades
    delta = 10 ** rng.uniform(-4, 0)
    rho = p @ random_psd(d, rng) @ p + delta * random_psd(d, rng)
    rho = rho / np.trace(rho).real
    inst = gentle.GentleInstance.tight(rho, p, cfg.tolerance)
    if inst.epsilon == 0:
        return "indeterminate", 0.0, {"zero_epsilon": 1}
    sw = gentle.sandwich_report(inst)
    tn = gentle.trace_norm_report(inst)
    value = min(
        sw.lower.min_gap_eigenvalue,
        sw.proposition_upper.min_gap_eigenvalue,
        sw.difference_lower.min_gap_eigenvalue,
        sw.difference_upper.min_gap_eigenvalue,
        tn.bound_new + cfg.tolerance.equality_band - tn.half_t1,
    )
    extras = {
        "corollary_upper_violations": int(not sw.corollary_upper.holds),
        "half_t1_le_sqrt_eps": int(tn.half_t1 <= tn.bound_improved),
        "half_t1_le_2sqrt_eps": int(tn.half_t1 <= tn.bound_original),
        "max_half_t1_over_bound_new": tn.half_t1 / tn.bound_new,
        "min_trace_norm_slack": tn.bound_new - tn.half_t1,
        "min_epsilon": inst.epsilon,
        "max_epsilon": inst.epsilon,
    }
    ok = sw.all_hold and tn.within_bound
    return ("pass" if ok else "fail"), value, extras


def _trial_membership(cfg, rng):
    n = _pick(rng, cfg.arities)
    alpha = rng.uniform(0.5, 2.0 * n, size=n)
    member, cert, in_band = _direct_certificate(alpha, cfg.tolerance)
    rec = spectrahedron.in_A_recursive(alpha, cfg.tolerance)
    extras = {"members": int(member), "recursive_indeterminate": int(rec.indeterminate)}
    agree = not rec.indeterminate and rec.member == member
    extras["recursive_disagreements"] = int(not agree and not in_band)
    if n == 3:
        closed = spectrahedron.in_A3_closed_form(alpha, cfg.tolerance)
        extras["closed_form_checked"] = 1
        extras["closed_form_disagreements"] = int(closed.member != member and not in_band)
        agree = agree and closed.member == member
    if in_band:
        return "indeterminate", abs(cert), extras
    return ("pass", abs(cert), extras) if agree else ("fail", -abs(cert), extras)


_TRIALS = {
    "generalized": _trial_generalized,
    "reverse": _trial_reverse,
    "hayashi": _trial_hayashi,
    "converse": _trial_converse,
    "tightness": _trial_tightness,
    "identity": _trial_identity,
    "gentle": _trial_gentle,
    "membership": _trial_membership,
}


def replay_trial(cfg: CampaignConfig, seed: int, index: int = -1) -> TrialOutcome:
    """Run one trial from its seed."""
    status, value, extras = _TRIALS[cfg.mode](cfg, np.random.default_rng(seed))
    return TrialOutcome(index, seed, status, float(value), extras)


def run_trial(cfg: CampaignConfig, index: int) -> TrialOutcome:
    return replay_trial(cfg, trial_seed(cfg.master_seed, index), index)


def _run_chunk(cfg: CampaignConfig, indices) -> list[TrialOutcome]:
    return [run_trial(cfg, i) for i in indices]


def _merge_extras(total: dict, extras: dict) -> None:
    for key, value in extras.items():
        if key not in total:
            total[key] = value
        elif key.startswith("min_"):
            total[key] = min(total[key], value)
        elif key.startswith("max_"):
            total[key] = max(total[key], value)
        else:
            total[key] += value


@dataclass
class CampaignReport:
    config: CampaignConfig
    pass_count: int = 0
    fail_count: int = 0
    indeterminate_count: int = 0
    worst_violation: float = math.inf
    worst_instance_seed: int | None = None
    failing_seeds: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def trials(self) -> int:
        return self.pass_count + self.fail_count + self.indeterminate_count

    def add(self, outcome: TrialOutcome) -> None:
        if outcome.status == "pass":
            self.pass_count += 1
        elif outcome.status == "fail":
            self.fail_count += 1
            if len(self.failing_seeds) < MAX_RECORDED_FAILURES:
                self.failing_seeds.append(outcome.seed)
        else:
            self.indeterminate_count += 1
        if outcome.value < self.worst_violation:
            self.worst_violation = outcome.value
            self.worst_instance_seed = outcome.seed
        _merge_extras(self.extras, outcome.extras)

    def to_json(self, include_time: bool = True) -> dict:
        doc = {
            "config": self.config.to_json(),
            "pass_count": self.pass_count,
            "fail_count": self.fail_count,
            "indeterminate_count": self.indeterminate_count,
            "worst_violation": self.worst_violation,
            "worst_instance_seed": self.worst_instance_seed,
            "failing_seeds": list(self.failing_seeds),
            "extras": dict(sorted(self.extras.items())),
        }
        if include_time:
            doc["wall_time"] = self.wall_time
        return doc

    def summary_row(self) -> dict:
        return {
            "mode": self.config.mode,
            "master_seed": self.config.master_seed,
            "trials": self.trials,
            "pass_count": self.pass_count,
            "fail_count": self.fail_count,
            "indeterminate_count": self.indeterminate_count,
            "worst_violation": self.worst_violation,
            "worst_instance_seed": self.worst_instance_seed,
            "wall_time": self.wall_time,
        }


def default_workers() -> int:
    raw = os.environ.get("PINCHLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_campaign(cfg: CampaignConfig, workers: int | None = None, log_path=None) -> CampaignReport:
    """Run ``cfg.trials`` seeded trials and aggregate them in index order.

    ``workers`` defaults to ``$PINCHLAB_THREADS`` (or 1). The report does not
    depend on the worker count apart from ``wall_time``.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    start = time.perf_counter()
    report = CampaignReport(cfg)
    indices = range(cfg.trials)
    if workers == 1 or cfg.trials < 2 * workers:
        outcomes = _run_chunk(cfg, indices)
    else:
        chunks = [indices[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [cfg] * workers, chunks))
        outcomes = sorted((o for part in parts for o in part), key=lambda o: o.index)
    for outcome in outcomes:
        report.add(outcome)
    report.wall_time = time.perf_counter() - start
    if log_path is not None:
        with open(log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(report.to_json()) + "\n")
    return report
