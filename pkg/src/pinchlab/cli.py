"""Command-line entry point.

Exit status: 0 when every check passed, 1 when an inequality was found
violated, 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import gentle, harness, pinching, spectrahedron
from .matrix_core import DEFAULT_EQUALITY_BAND, DEFAULT_PSD_SLACK, ShapeError, Tolerance
from .serialization import SchemaError, matrix_from_json, vector_from_json, vector_to_json

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(arg, field):
    """Inline JSON text, or a path to a JSON file."""
    if arg is None:
        return None
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = arg
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(field, f"invalid JSON ({exc.msg})") from None


def _doc(args) -> dict:
    doc = _load(args.input, "in") if args.input else {}
    if not isinstance(doc, dict):
        raise SchemaError("in", "expected a JSON object")
    return doc


def _pick(args, doc, attr, key):
    value = _load(getattr(args, attr), key)
    return doc.get(key) if value is None else value


def _tolerance(args) -> Tolerance:
    return Tolerance(psd_slack=args.psd_slack, equality_band=args.band)


def _require_seed(args, what):
    if args.seed is None:
        raise UsageError(f"--seed is required to {what}")
    return args.seed


def cmd_membership(args):
    tol = _tolerance(args)
    doc = _doc(args)
    raw = _pick(args, doc, "vector", "values" if "values" in doc else "vector")
    if raw is None:
        raise UsageError("membership needs --vector or --in")
    values = vector_from_json(raw, "vector")
    if values.size < 2:
        raise SchemaError("vector", "arity must be at least 2")
    if args.set == "A":
        verdict = spectrahedron.in_A_direct(values, tol)
        out = {"set": "A", **verdict.to_json(), "values": values.tolist()}
        out["recursive"] = spectrahedron.in_A_recursive(values, tol).to_json()
        if values.size == 3:
            out["closed_form"] = spectrahedron.in_A3_closed_form(values, tol).to_json()
    else:
        verdict = spectrahedron.in_B_direct(values, tol)
        out = {"set": "B", **verdict.to_json(), "values": values.tolist()}
        out["sign_structure"] = spectrahedron.b_sign_structure(values).value
    return out, EXIT_OK


def _family_and_rho(args, doc, weights_key, tol):
    fam_doc = _pick(args, doc, "family", "family")
    povm_doc = _pick(args, doc, "povm", "povm")
    rho_doc = _pick(args, doc, "rho", "rho")
    weights = _pick(args, doc, "weights", weights_key)
    seed_used = None
    if fam_doc is not None:
        fam = pinching.OperatorFamily.from_json(fam_doc)
    elif povm_doc is not None:
        fam = pinching.ProjectivePOVM.from_json(povm_doc, tol)
    else:
        seed_used = _require_seed(args, "draw a random instance")
        rng = np.random.default_rng(seed_used)
        fam = harness.random_family(args.d_in, args.d_out, args.n, rng)
    if rho_doc is not None:
        rho = matrix_from_json(rho_doc, "rho")
    else:
        seed_used = _require_seed(args, "draw a random rho")
        d = fam.dimension if isinstance(fam, pinching.ProjectivePOVM) else fam.in_dim
        rho = harness.random_psd(d, np.random.default_rng([seed_used, 1]), normalize=True)
    if weights is None:
        raise UsageError(f"missing --weights ({weights_key})")
    w = vector_from_json(weights, weights_key)
    n = fam.n
    if w.size != n:
        raise SchemaError(weights_key, f"expected {n} weights, got {w.size}")
    return fam, rho, w, seed_used


def _verify(args, reverse: bool):
    tol = _tolerance(args)
    key = "beta" if reverse else "alpha"
    fam, rho, w, seed = _family_and_rho(args, _doc(args), key, tol)
    if reverse:
        verdict = pinching.verify_reverse(fam, w, rho, tol)
        membership = spectrahedron.in_B_direct(w, tol)
    else:
        verdict = pinching.verify_generalized(fam, w, rho, tol)
        membership = spectrahedron.in_A_direct(w, tol)
    out = {
        key: w.tolist(),
        **verdict.to_json(),
        ("in_B" if reverse else "in_A"): membership.to_json(),
        "seed": seed,
    }
    return out, (EXIT_OK if verdict.holds else EXIT_VIOLATION)


def cmd_verify(args):
    return _verify(args, reverse=False)


def cmd_reverse(args):
    return _verify(args, reverse=True)


def cmd_converse(args):
    tol = _tolerance(args)
    doc = _doc(args)
    povm_doc = _pick(args, doc, "povm", "povm")
    if povm_doc is None:
        raise UsageError("converse needs --povm or --in")
    povm = pinching.ProjectivePOVM.from_json(povm_doc, tol)
    weights = _pick(args, doc, "weights", "alpha")
    if weights is None:
        raise UsageError("converse needs --weights")
    alpha = vector_from_json(weights, "alpha")
    if alpha.size != povm.n:
        raise SchemaError("alpha", f"expected {povm.n} weights, got {alpha.size}")
    if not povm.is_nontrivial():
        raise SchemaError("povm.projectors", "every projector must be nonzero")
    witness = pinching.converse_witness(povm, args.seed)
    holds = pinching.verify_generalized(povm, alpha, witness, tol)
    membership = spectrahedron.in_A_direct(alpha, tol)
    out = {
        "alpha": alpha.tolist(),
        "converse_holds": holds.holds,
        "witness_gap": holds.to_json(),
        "in_A": membership.to_json(),
        "consistent": holds.holds == membership.member,
        "seed": args.seed,
    }
    return out, EXIT_OK


def cmd_gentle(args):
    tol = _tolerance(args)
    doc = _doc(args)
    rho_doc = _pick(args, doc, "rho", "rho")
    p_doc = _pick(args, doc, "projector", "P")
    if rho_doc is None or p_doc is None:
        raise UsageError("gentle needs rho and P (--in, or --rho and --projector)")
    rho = matrix_from_json(rho_doc, "rho")
    p = matrix_from_json(p_doc, "P")
    eps = args.epsilon if args.epsilon is not None else doc.get("epsilon")
    if args.tight or eps is None:
        inst = gentle.GentleInstance.tight(rho, p, tol)
    else:
        if not isinstance(eps, (int, float)) or isinstance(eps, bool):
            raise SchemaError("epsilon", "expected a number")
        inst = gentle.GentleInstance(rho, p, eps, tol)
    report = gentle.trace_norm_report(inst)
    out = {"epsilon": inst.epsilon, **report.to_json()}
    ok = report.within_bound
    if inst.epsilon > 0:
        sandwich = gentle.sandwich_report(inst)
        out["sandwich"] = sandwich.to_json()
        ok = ok and sandwich.all_hold
    return out, (EXIT_OK if ok else EXIT_VIOLATION)


def _int_list(text, field):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise SchemaError(field, "expected comma-separated integers") from None


def cmd_campaign(args):
    seed = _require_seed(args, "run a campaign")
    cfg = harness.CampaignConfig(
        master_seed=seed,
        trials=args.trials,
        mode=args.mode,
        dims=_int_list(args.dims, "dims") if args.dims else (),
        arities=_int_list(args.arities, "arities") if args.arities else (),
        alpha_scale=args.alpha_scale,
        tolerance=_tolerance(args),
    )
    report = harness.run_campaign(cfg, workers=args.workers, log_path=args.log)
    out = report.to_json(include_time=args.timing)
    row = report.summary_row()
    if not args.timing:
        del row["wall_time"]
    out["_csv"] = row
    return out, (EXIT_VIOLATION if report.fail_count else EXIT_OK)


def cmd_sample_boundary(args):
    tol = _tolerance(args)
    if args.set == "B":
        if args.t is None:
            raise UsageError("sampling the B_2 boundary needs --t")
        if args.n not in (None, 2):
            raise UsageError("B boundary sampling is only available for n = 2")
        point = spectrahedron.sample_B2_boundary(args.t)
    else:
        prefix = None
        if args.t is not None:
            if args.n not in (None, 2):
                raise UsageError("--t parametrises the A_2 boundary; use --n 2")
            if not args.t > 0:
                raise SchemaError("t", "must be positive")
            prefix, n = [1.0 + args.t], 2
        elif args.prefix is not None:
            prefix = vector_from_json(_load(args.prefix, "prefix"), "prefix")
            n = prefix.size + 1
        else:
            if args.n is None:
                raise UsageError("give --t, --prefix, or --n with --seed")
            n = args.n
            _require_seed(args, "draw a random prefix")
        point = spectrahedron.sample_A_boundary(n, prefix, args.seed, tol)
    return vector_to_json(point), EXIT_OK


def _flatten(doc, prefix=""):
    row = {}
    for key, value in doc.items():
        if key.startswith("_"):
            continue
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            row.update(_flatten(value, name + "."))
        elif isinstance(value, list):
            row[name] = ";".join(_fmt(v) for v in value)
        else:
            row[name] = _fmt(value)
    return row


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({k: v for k, v in doc.items() if not k.startswith("_")}, allow_nan=False)
    row = _flatten(doc["_csv"]) if "_csv" in doc else _flatten(doc)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
    writer.writeheader()
    writer.writerow(row)
    return buf.getvalue().rstrip("\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--psd-slack", type=float, default=DEFAULT_PSD_SLACK)
    common.add_argument("--band", type=float, default=DEFAULT_EQUALITY_BAND)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--in", dest="input", default=None, help="JSON document (path or inline)")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv-summary"), default="json")

    parser = argparse.ArgumentParser(prog="pinchlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("membership", parents=[common], help="membership in A_n or B_n")
    p.add_argument("--set", choices=("A", "B"), default="A")
    p.add_argument("--vector", default=None)
    p.set_defaults(func=cmd_membership)

    for name, func, key in (("verify", cmd_verify, "alpha"), ("reverse", cmd_reverse, "beta")):
        p = sub.add_parser(name, parents=[common], help=f"weighted pinching inequality ({key})")
        p.add_argument("--family", default=None)
        p.add_argument("--povm", default=None)
        p.add_argument("--rho", default=None)
        p.add_argument("--weights", f"--{key}", dest="weights", default=None)
        p.add_argument("--n", type=int, default=2, help="family size for random instances")
        p.add_argument("--d-in", type=int, default=3)
        p.add_argument("--d-out", type=int, default=3)
        p.set_defaults(func=func)

    p = sub.add_parser("converse", parents=[common], help="fixed-point witness test")
    p.add_argument("--povm", default=None)
    p.add_argument("--weights", "--alpha", dest="weights", default=None)
    p.set_defaults(func=cmd_converse)

    p = sub.add_parser("gentle", parents=[common], help="ordered gentle-measurement bounds")
    p.add_argument("--rho", default=None)
    p.add_argument("--projector", "--P", dest="projector", default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--tight", action="store_true", help="use eps = 1 - Tr(rho P)")
    p.set_defaults(func=cmd_gentle)

    p = sub.add_parser("campaign", parents=[common], help="randomised verification run")
    p.add_argument("--mode", choices=harness.MODES, default="generalized")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--dims", default=None, help="comma-separated dimensions")
    p.add_argument("--arities", default=None, help="comma-separated arities")
    p.add_argument("--alpha-scale", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=None, help="default: $PINCHLAB_THREADS or 1")
    p.add_argument("--log", default=None, help="append the report to this JSON-lines file")
    p.add_argument("--timing", action="store_true", help="include wall_time (output is then not byte-stable)")
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("sample-boundary", parents=[common], help="boundary point of A_n or B_2")
    p.add_argument("--set", choices=("A", "B"), default="A")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--prefix", default=None)
    p.set_defaults(func=cmd_sample_boundary)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        doc, code = args.func(args)
    except (UsageError, SchemaError, ShapeError, ValueError, ZeroDivisionError) as exc:
        print(f"pinchlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(doc, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
