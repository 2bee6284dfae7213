"""Command-line front end: ``kstab analyze|search|verify|oracle``.

Every command reads one JSON document and writes one JSON report with sorted
keys, exact rationals as strings and decimal renderings under ``approx``.
A one-line summary goes to stderr.

Exit codes: 0 success or Pass, 1 parse or validation error, 2 Fail verdict or
oracle mismatch, 3 candidate with positive DF.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .errors import KStabError
from .exact import format_rational, parse_rational, to_decimal
from .invariants import (
    DEFAULT_PRECISION,
    Convention,
    EquivariantModel,
    LieAlgebraPoint,
    describe,
    inner_product,
)
from .optimize import Directions, brute_force_search, build_search_space, minimize_normalized_df
from .theorem import Verdict, calabi_bound_json, verify_relative_semistability
from .toric import (
    MaxAffine,
    Triangulation,
    boundary_volume,
    build_model,
    discrete_weight_oracle,
    facet_description,
    function_from_json,
    refined_triangulation,
    triangulation_from_json,
    volume,
)

EXIT_OK, EXIT_PARSE, EXIT_FAIL, EXIT_NOT_CANDIDATE = 0, 1, 2, 3
PLACES = 12


class InputError(KStabError):
    """Malformed input, carrying the JSON path of the offending field."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")


def _exact(q: Fraction) -> dict:
    return {"exact": format_rational(q), "approx": to_decimal(q, PLACES)}


def _field(doc: dict, key: str, where: str = "$"):
    if not isinstance(doc, dict):
        raise InputError(where, "expected a JSON object")
    if key not in doc:
        raise InputError(where, f"missing field {key!r}")
    return doc[key]


def _rationals(values, where: str) -> list[Fraction]:
    if not isinstance(values, list):
        raise InputError(where, "expected a list of rationals")
    try:
        return [parse_rational(v) for v in values]
    except (KStabError, TypeError) as e:
        raise InputError(where, str(e)) from None


# ---------------------------------------------------------------------------
# input parsing


def _polytope(doc: dict):
    verts = _field(doc, "vertices")
    if not isinstance(verts, list) or not verts:
        raise InputError("$.vertices", "expected a nonempty list of points")
    return facet_description([_rationals(v, f"$.vertices[{i}]") for i, v in enumerate(verts)])


def _functions(doc: dict) -> list:
    fs = _field(doc, "functions")
    if not isinstance(fs, list) or not fs:
        raise InputError("$.functions", "expected a nonempty list of functions")
    out = []
    for i, f in enumerate(fs):
        try:
            out.append(function_from_json(f))
        except KeyError as e:
            raise InputError(f"$.functions[{i}]", f"missing field {e.args[0]!r}") from None
        except (KStabError, TypeError) as e:
            raise InputError(f"$.functions[{i}]", str(e)) from None
    return out


def _shifts(doc: dict, count: int):
    if "shifts" not in doc:
        return None
    shifts = _rationals(doc["shifts"], "$.shifts")
    if len(shifts) != count:
        raise InputError("$.shifts", f"expected {count} shifts")
    return shifts


def _model(doc, where: str = "$.model") -> EquivariantModel:
    try:
        return EquivariantModel.from_json(doc)
    except (KStabError, TypeError, AttributeError) as e:
        raise InputError(where, str(e)) from None


def _point(model: EquivariantModel, values, where: str) -> LieAlgebraPoint:
    coeffs = _rationals(values, where)
    if len(coeffs) != model.size:
        raise InputError(where, f"expected {model.size} coefficients")
    return LieAlgebraPoint(tuple(coeffs))


def _triangulation(doc: dict, P) -> Triangulation:
    spec = doc.get("triangulation", {"refine": 0})
    where = "$.triangulation"
    if not isinstance(spec, dict):
        raise InputError(where, "expected an object")
    try:
        if "nodes" in spec:
            return triangulation_from_json(spec)
        extra = [_rationals(p, f"{where}.insert[{i}]") for i, p in enumerate(spec.get("insert", []))]
        m = spec.get("refine", 0)
        if isinstance(m, bool) or not isinstance(m, int) or m < 0:
            raise InputError(f"{where}.refine", "expected a nonnegative integer")
        return refined_triangulation(P, m, extra)
    except KeyError as e:
        raise InputError(where, f"missing field {e.args[0]!r}") from None
    except (KStabError, TypeError, IndexError) as e:
        if isinstance(e, InputError):
            raise
        raise InputError(where, str(e)) from None


# ---------------------------------------------------------------------------
# commands


def _constant_twist(P, convention: Convention) -> dict:
    """Norm of the twist that shifts every weight by the same constant."""
    twist = build_model(P, [MaxAffine.constant(0, P.dimension)], shifts=[1], labels=["twist"])
    e = twist.basis(0)
    return {"norm_squared": _exact(inner_product(twist, e, e, convention))}


def cmd_analyze(doc: dict, args) -> tuple[dict, int, str]:
    conv = args.convention
    if "model" in doc:
        model = _model(doc["model"])
        points = doc.get("points")
        if points is None:
            named = [(label, model.basis(i)) for i, label in enumerate(model.labels)]
        else:
            if not isinstance(points, list):
                raise InputError("$.points", "expected a list of coefficient lists")
            named = [(f"p{i}", _point(model, p, f"$.points[{i}]")) for i, p in enumerate(points)]
        report = {"kind": "model"}
    else:
        P = _polytope(doc)
        fs = _functions(doc)
        labels = doc.get("labels")
        model = build_model(P, fs, _shifts(doc, len(fs)), labels)
        named = [(label, model.basis(i)) for i, label in enumerate(model.labels)]
        report = {
            "kind": "toric",
            "polytope": {
                "vertices": P.to_json(),
                "volume": _exact(volume(P)),
                "boundary_volume": _exact(boundary_volume(P)),
            },
            "constant_twist": _constant_twist(P, conv),
        }
    report.update({
        "convention": conv.value,
        "model": model.to_json(),
        "a0": _exact(model.hilbert.a0),
        "a1": _exact(model.hilbert.a1),
        "directions": {label: describe(model, v, args.precision, conv, PLACES) for label, v in named},
    })
    dfs = ", ".join(f"{label}: DF={report['directions'][label]['df']['exact']}" for label, _ in named)
    return report, EXIT_OK, f"analyze: {dfs}"


def cmd_search(doc: dict, args) -> tuple[dict, int, str]:
    if args.convention is not Convention.TRACE_FREE:
        raise InputError("--convention", "search supports the trace-free convention only")
    P = _polytope(doc)
    T = _triangulation(doc, P)
    directions = doc.get("directions", "nonaffine")
    try:
        directions = Directions(directions)
    except ValueError:
        raise InputError("$.directions", f"unknown direction family {directions!r}") from None
    space = build_search_space(P, T, directions)
    max_it = args.max_iterations if args.max_iterations is not None else doc.get("max_iterations", 1000)
    seed = args.seed if args.seed is not None else doc.get("seed", 0)
    result = minimize_normalized_df(space, max_it, seed)
    report = {
        "polytope": P.to_json(),
        "triangulation": T.to_json(),
        "directions": directions.value,
        "dimension": space.dimension,
        "seed": seed,
        "result": result.to_json(args.precision, PLACES),
        "calabi_lower_bound": calabi_bound_json(result, args.precision, PLACES),
    }
    resolution = args.resolution if args.resolution is not None else doc.get("resolution")
    if resolution is not None:
        report["brute_force"] = brute_force_search(space, int(resolution)).to_json(args.precision, PLACES)
    return report, EXIT_OK, f"search: {result.status.value} {format_rational(result.value_squared_signed)}"


def cmd_verify(doc: dict, args) -> tuple[dict, int, str]:
    model = _model(_field(doc, "model"))
    v = _point(model, _field(doc, "candidate"), "$.candidate")
    dirs = doc.get("directions", "span")
    if dirs != "span":
        if not isinstance(dirs, list):
            raise InputError("$.directions", 'expected "span" or a list of coefficient lists')
        dirs = [_point(model, w, f"$.directions[{i}]") for i, w in enumerate(dirs)]
    report = verify_relative_semistability(model, v, dirs, args.convention)
    code = {Verdict.PASS: EXIT_OK, Verdict.FAIL: EXIT_FAIL,
            Verdict.NOT_A_CANDIDATE: EXIT_NOT_CANDIDATE}[report.verdict]
    return report.to_json(PLACES), code, f"verify: {report.verdict.value} ({report.branch.value})"


def cmd_oracle(doc: dict, args) -> tuple[dict, int, str]:
    P = _polytope(doc)
    fs = _functions(doc)
    shifts = _shifts(doc, len(fs))
    if args.k_samples is not None:
        ks = args.k_samples
    else:
        ks = doc.get("k_samples", list(range(1, 9)))
        if not isinstance(ks, list) or not all(isinstance(k, int) and not isinstance(k, bool) for k in ks):
            raise InputError("$.k_samples", "expected a list of integers")
    model = build_model(P, fs, shifts)
    rows = []
    all_match = True
    for i, f in enumerate(fs):
        R = shifts[i] if shifts else max(f(x) for x in P.vertices)
        fit = discrete_weight_oracle(P, f, R, ks)
        w = model.actions[i][1]
        pairs = {
            "a0": (model.hilbert.a0, fit.a0),
            "a1": (model.hilbert.a1, fit.a1),
            "b0": (w.b0, fit.b0),
            "b1": (w.b1, fit.b1),
            "d0": (model.d0[i][i], fit.d0),
        }
        row = {"label": model.labels[i], "period": fit.period}
        for key, (exact, fitted) in pairs.items():
            match = None if fitted is None else exact == fitted
            if match is False:
                all_match = False
            row[key] = {
                "integral": format_rational(exact),
                "oracle": None if fitted is None else format_rational(fitted),
                "match": match,
            }
        rows.append(row)
    report = {"k_samples": sorted(ks), "functions": rows, "all_match": all_match}
    return report, EXIT_OK if all_match else EXIT_FAIL, f"oracle: {'all match' if all_match else 'MISMATCH'}"


COMMANDS = {"analyze": cmd_analyze, "search": cmd_search, "verify": cmd_verify, "oracle": cmd_oracle}


# ---------------------------------------------------------------------------
# argument handling


def _positive_rational(text: str) -> Fraction:
    try:
        q = parse_rational(text)
    except KStabError as e:
        raise argparse.ArgumentTypeError(str(e)) from None
    if q <= 0:
        raise argparse.ArgumentTypeError("precision must be positive")
    return q


def _k_list(text: str) -> list[int]:
    try:
        return [int(k) for k in text.split(",") if k.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kstab", description="Exact K-stability invariants and checks.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--input", required=True, type=Path, help="input JSON file")
    p.add_argument("--convention", type=Convention, default=Convention.TRACE_FREE,
                   choices=list(Convention), metavar="{trace-free,paper}")
    p.add_argument("--precision", type=_positive_rational, default=DEFAULT_PRECISION,
                   help="width of certified brackets for decimal renderings (default 1/10^9)")
    p.add_argument("--k-samples", type=_k_list, default=None, help="e.g. 1,2,3,4,5")
    p.add_argument("--resolution", type=int, default=None, help="also run brute force at this grid size")
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", type=Path, default=None, help="write the report here instead of stdout")
    return p


def run(args) -> int:
    try:
        text = args.input.read_text()
    except OSError as e:
        print(f"kstab: cannot read {args.input}: {e.strerror}", file=sys.stderr)
        return EXIT_PARSE
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        print(f"kstab: {args.input}: line {e.lineno} column {e.colno}: {e.msg}", file=sys.stderr)
        return EXIT_PARSE
    try:
        if not isinstance(doc, dict):
            raise InputError("$", "expected a JSON object")
        report, code, summary = COMMANDS[args.command](doc, args)
    except KStabError as e:
        print(f"kstab: {args.input}: {e}", file=sys.stderr)
        return EXIT_PARSE
    out = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.output is not None:
        args.output.write_text(out)
    else:
        sys.stdout.write(out)
    print(summary, file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
