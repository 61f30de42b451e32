"""Command-line interface: validate cones, emit family cones, run the pipeline.

Reports are single JSON documents on standard output, byte-for-byte
reproducible for fixed inputs and seed. Exit codes: 0 success, 1
verification or validation failure, 2 input error, 3 numeric
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .cone import ConeSpec, dual_rays, gorenstein_vector, reeb_cone_contains, validate, xi_zero, ypq_cone
from .delzant import (
    build,
    deck_group,
    deck_group_from_flow,
    deck_groups_agree,
    reeb_coefficients,
    ypq_tabulated_deck_action,
)
from .reallink import (
    InfeasibleSystemError,
    SamplerError,
    build_system,
    classify_ypq,
    sample,
    sample_set_to_json,
)
from .reeb import ConvergenceError, UnsupportedConeError, minimize, ypq_reeb
from .verifier import contact_data, verify_flat_special, verify_link

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

SAFE_INT = 2**53
WORKERS_ENV = "SELINK_WORKERS"


def _sanitize(obj):
    """Make a structure JSON-safe: stringify ints beyond the float53 range."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, int):
        return str(obj) if abs(obj) >= SAFE_INT else obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(_sanitize(report), sort_keys=True, indent=2))
    sys.stdout.write("\n")


def _load_cone_file(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or "dim" not in raw or "normals" not in raw:
        raise ValueError("cone file must be an object with 'dim' and 'normals'")
    dim = raw["dim"]
    normals = raw["normals"]
    if not isinstance(dim, int):
        raise ValueError("'dim' must be an integer")
    if not isinstance(normals, list) or not all(isinstance(n, list) for n in normals):
        raise ValueError("'normals' must be a list of integer vectors")
    cone = ConeSpec(dim, tuple(tuple(int(x) for x in n) for n in normals))
    name = raw.get("name")
    return cone, name


def _cone_echo(cone: ConeSpec, name: Optional[str]) -> dict:
    echo = {"dim": cone.dim, "normals": [list(n) for n in cone.normals]}
    if name is not None:
        echo["name"] = name
    return echo


def detect_ypq(cone: ConeSpec) -> Optional[tuple[int, int]]:
    """Recover (p, q) when the normals match the Y^{p,q} pattern exactly."""
    if cone.dim != 3 or cone.num_normals != 4:
        return None
    normals = set(cone.normals)
    if (1, 0, 0) not in normals or (1, 1, 0) not in normals:
        return None
    rest = normals - {(1, 0, 0), (1, 1, 0)}
    for third in rest:
        if third[0] == 1 and third[1] == third[2] and third[1] >= 2:
            p = third[1]
            (other,) = rest - {third}
            q = p - other[2]
            if other == (1, p - q - 1, p - q) and p > q >= 1 and math.gcd(p, q) == 1:
                return p, q
    return None


def _workers_from_env() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        workers = int(raw)
    except ValueError as err:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from err
    if workers < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return workers


def cmd_validate(args) -> int:
    try:
        cone, name = _load_cone_file(args.path)
    except (OSError, ValueError, json.JSONDecodeError) as err:
        _emit({"error": str(err)})
        return EXIT_INPUT
    report = validate(cone)
    _emit({"cone": _cone_echo(cone, name), "validation": report.to_dict()})
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_ypq(args) -> int:
    try:
        cone = ypq_cone(args.p, args.q)
    except ValueError as err:
        _emit({"error": str(err)})
        return EXIT_INPUT
    payload = {
        "dim": cone.dim,
        "normals": [list(n) for n in cone.normals],
        "name": f"Y({args.p},{args.q})",
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    try:
        workers = _workers_from_env()
        cone, name = _load_cone_file(args.path)
    except (OSError, ValueError, json.JSONDecodeError) as err:
        _emit({"error": str(err)})
        return EXIT_INPUT

    report: dict = {
        "version": __version__,
        "seed": args.seed,
        "tolerance": args.tol,
        "cone": _cone_echo(cone, name),
    }

    validation = validate(cone)
    report["validation"] = validation.to_dict()
    if not validation.passed:
        _emit(report)
        return EXIT_FAIL

    data = build(cone, validation)
    report["quotient"] = {
        "normal_matrix": [list(r) for r in data.normal_matrix.data],
        "kernel_basis": [list(r) for r in data.kernel_basis.data],
        "torsion_rank": data.torsion_rank,
    }

    group = deck_group(data)
    flow_group = deck_group_from_flow(data)
    deck_info = {
        "elements": [list(e) for e in group.elements],
        "order": group.order,
        "flow_elements": [list(e) for e in flow_group.elements],
        "flow_agreement": deck_groups_agree(data),
    }
    pq = detect_ypq(cone)
    if pq is not None:
        tabulated = ypq_tabulated_deck_action(*pq)
        computed = group.nontrivial()
        deck_info["published_table_agreement"] = {
            "family": f"Y({pq[0]},{pq[1]})",
            "tabulated": list(tabulated),
            "computed": [list(e) for e in computed],
            "agree": len(computed) == 1 and computed[0] == tabulated,
        }
    else:
        deck_info["published_table_agreement"] = None
    report["deck_group"] = deck_info

    try:
        if args.reeb == "closed":
            if pq is None:
                _emit({**report, "error": "closed-form Reeb vector requires a Y(p,q) cone"})
                return EXIT_INPUT
            solution = ypq_reeb(*pq)
        else:
            solution = minimize(cone)
    except UnsupportedConeError as err:
        _emit({**report, "error": str(err)})
        return EXIT_INPUT
    except ConvergenceError as err:
        _emit({**report, "error": str(err)})
        return EXIT_NUMERIC
    reeb_info = solution.to_dict()
    gamma = gorenstein_vector(cone)
    reeb_info["gorenstein_vector"] = list(gamma) if gamma is not None else None
    reeb_info["in_reeb_cone"] = reeb_cone_contains(cone, solution.xi)
    xi0 = xi_zero(cone)
    reeb_info["xi_zero"] = {
        "value": list(xi0),
        "in_reeb_cone": reeb_cone_contains(cone, xi0),
    }
    report["reeb"] = reeb_info

    coeffs = reeb_coefficients(data, solution.xi)
    report["coefficients"] = {
        "values": [float(v) for v in coeffs.values],
        "residual": coeffs.residual,
    }

    try:
        system = build_system(data, coeffs)
    except InfeasibleSystemError as err:
        _emit({**report, "error": str(err)})
        return EXIT_FAIL
    report["quadric_system"] = {
        "rows": [list(r) for r in system.rows.data],
        "level": [float(v) for v in system.level],
    }

    try:
        samples = sample(system, args.samples, args.seed, workers=workers)
    except SamplerError as err:
        _emit({**report, "error": str(err)})
        return EXIT_NUMERIC
    report["sampling"] = {
        "count": len(samples),
        "seed": samples.seed,
        "residual_max": samples.residual_max,
        "jacobian_ranks": sorted(set(samples.jacobian_rank)),
    }
    if args.dump_samples:
        with open(args.dump_samples, "w", encoding="utf-8") as fh:
            fh.write(sample_set_to_json(samples, system))

    classification = classify_ypq(system, group, samples)
    report["classification"] = classification.to_dict()

    ctx = contact_data(coeffs)
    verification = verify_link(system, ctx, samples, tol=args.tol)
    report["verification"] = verification.to_dict()

    overall = verification.passed
    if data.k == 0:
        flat = verify_flat_special(cone.dim - 1, samples, tol=args.tol)
        report["flat_special"] = flat.to_dict()
        overall = overall and flat.passed
    else:
        report["flat_special"] = None

    _emit(report)
    return EXIT_OK if overall else EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="selink",
        description="Toric Sasaki-Einstein cones and their special Legendrian real links",
    )
    parser.add_argument("--version", action="version", version=f"selink {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a cone file")
    p_validate.add_argument("path", help="cone JSON file")
    p_validate.set_defaults(func=cmd_validate)

    p_ypq = sub.add_parser("ypq", help="emit the Y(p,q) cone file")
    p_ypq.add_argument("p", type=int)
    p_ypq.add_argument("q", type=int)
    p_ypq.add_argument("-o", "--output", help="write to a file instead of stdout")
    p_ypq.set_defaults(func=cmd_ypq)

    p_pipe = sub.add_parser("pipeline", help="run validate, quotient, Reeb, link, verify")
    p_pipe.add_argument("path", help="cone JSON file")
    p_pipe.add_argument("--reeb", choices=("closed", "minimize"), default="minimize")
    p_pipe.add_argument("--samples", type=int, default=500)
    p_pipe.add_argument("--seed", type=int, default=0)
    p_pipe.add_argument("--tol", type=float, default=1e-9)
    p_pipe.add_argument("--dump-samples", help="write the sample set JSON to this path")
    p_pipe.set_defaults(func=cmd_pipeline)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
