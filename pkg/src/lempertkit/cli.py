"""Command-line front end.

Every command writes one JSON document to standard output (or ``--out``).
Exit codes: 0 success, 2 domain/membership error, 3 parse/config error,
4 numerical contradiction (the document is still written, with full
diagnostics).

Points and vectors are given as ``RE,IM,RE,IM`` (``z1`` first); use the
``--point=-0.1,0,0,0`` form when the first number is negative.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import domain as dom
from . import indicatrix as ind
from . import lempert, rigidity, rlinear
from .errors import ConfigError, DomainError, HypothesisError, LempertkitError

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_CONFIG = 3
EXIT_CONTRADICTION = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _clean(obj):
    """Make a result JSON-safe: numpy scalars unwrapped, non-finite floats -> None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) + 0.0 if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return dom.complex_pair(obj)
    return obj


def _pretty(obj, indent=0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _is_flat(v):
                lines.append(f"{pad}{k}:")
                lines.append(_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{k:<28} {_fmt(v)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            if isinstance(v, (dict, list)) and not _is_flat(v):
                lines.append(f"{pad}[{i}]")
                lines.append(_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}[{i}] {_fmt(v)}")
    return "\n".join(lines)


def _is_flat(v):
    if isinstance(v, dict):
        return False
    return all(not isinstance(x, (dict, list)) or (isinstance(x, list) and _is_flat(x)) for x in v)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def parse_point(text: str) -> np.ndarray:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse point {text!r}: {exc}") from exc
    return rigidity.point_from_reals(vals)


def parse_complex(text: str) -> complex:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}: {exc}") from exc
    if len(vals) == 1:
        vals.append(0.0)
    if len(vals) != 2:
        raise ConfigError(f"complex numbers are RE or RE,IM, got {text!r}")
    return complex(*vals)


def load_document(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _spec(args, attr="spec"):
    path = getattr(args, attr)
    if path is None:
        raise ConfigError(f"--{attr.replace('_', '-')} is required")
    return dom.domain_from_document(load_document(path))


def _points(args, n):
    pts = args.point or []
    if len(pts) < n:
        raise ConfigError(f"this command needs {n} --point argument(s), got {len(pts)}")
    return [parse_point(p) for p in pts]


def _vector(args):
    if args.vector is None:
        raise ConfigError("--vector is required")
    return parse_point(args.vector)


def _pt(z):
    return [dom.complex_pair(c) for c in z]


# ---------------------------------------------------------------------------
# commands; each returns (document, exit code)

def cmd_dist(args):
    spec = _spec(args)
    z, w = _points(args, 2)[:2]
    return {"command": "dist", "z": _pt(z), "w": _pt(w),
            "c": dom.caratheodory_distance(spec, z, w)}, EXIT_OK


def cmd_metric(args):
    spec = _spec(args)
    p = _points(args, 1)[0]
    X = _vector(args)
    gamma = dom.caratheodory_metric(spec, p, X)
    doc = {"command": "metric", "p": _pt(p), "X": _pt(X), "gamma": gamma,
           "minkowski": ind.minkowski(ind.build_indicatrix(spec, p), X)}
    if args.degree is not None and np.any(X):
        res = lempert.kobayashi_metric_upper(spec, p, X, args.degree, args.budget, args.seed)
        doc["kappa_upper"] = res.value
        doc["kappa_gap"] = res.gap
        doc["witness_coefficients"] = res.witness.to_record() if res.witness is not None else None
        doc["budget_used"] = res.budget_used
        if res.lower_bound_violated:
            return doc, EXIT_CONTRADICTION
    return doc, EXIT_OK


def cmd_indicatrix(args):
    spec = _spec(args)
    p = _points(args, 1)[0]
    model = ind.build_indicatrix(spec, p)
    return {"command": "indicatrix", **ind.to_record(model, args.tol or ind.DEDUP_TOL)}, EXIT_OK


def cmd_faces(args):
    spec = _spec(args)
    p = _points(args, 1)[0]
    model = ind.build_indicatrix(spec, p)
    tol = args.tol or ind.ACTIVE_TOL
    q = ind.boundary_point(model, _vector(args))
    active = ind.active_set(model, q, tol)
    doc = {"command": "faces", "p": _pt(p), "q": _pt(q), "active_set": active,
           "minkowski": ind.minkowski(model, q)}
    if len(active) == 1:
        face = ind.face_at(model, q, tol)
        doc["face"] = {"active_index": face.active_index,
                       "kernel_direction": _pt(face.kernel_direction),
                       "safe_radius": ind.face_safe_radius(model, face)}
    else:
        doc["face"] = None
    return doc, EXIT_OK


def _linear_classify(args, doc_in):
    T = rlinear.map_from_document(doc_in)
    tol = args.tol or 1e-8
    doc = {"command": "classify", "map": rlinear.map_to_document(T),
           "classification": rlinear.classify(T, tol).to_record()}
    if args.spec is None:
        return doc, EXIT_OK
    src_spec = _spec(args)
    dst_spec = _spec(args, "spec2") if args.spec2 else src_spec
    pts = _points(args, 1)
    src = ind.build_indicatrix(src_spec, pts[0])
    dst = ind.build_indicatrix(dst_spec, pts[1] if len(pts) > 1 else pts[0])
    verdict = rlinear.line_rigidity_verdict(T, src, dst, tol=tol, seed=args.seed)
    doc["line_rigidity"] = verdict.to_record()
    return doc, EXIT_CONTRADICTION if verdict.contradiction else EXIT_OK


def cmd_classify(args):
    if args.map is None:
        raise ConfigError("--map is required")
    doc_in = load_document(args.map)
    if "A" in doc_in:
        return _linear_classify(args, doc_in)
    src = _spec(args) if args.spec else None
    dst = _spec(args, "spec2") if args.spec2 else None
    F = rigidity.map_from_document(doc_in, src, dst)
    tol = args.tol or rigidity.DEFAULT_TOL
    records = [rigidity.classify_point(F, p, tol=tol).to_record() for p in _points(args, 1)]
    return {"command": "classify", "points": records}, EXIT_OK


def cmd_isometry_check(args):
    if args.map is None or args.grid is None:
        raise ConfigError("--map and --grid are required")
    src = _spec(args)
    dst = _spec(args, "spec2") if args.spec2 else src
    F = rigidity.map_from_document(load_document(args.map), src, dst)
    grid = rigidity.grid_from_document(load_document(args.grid))
    verdict = rigidity.classify_map(F, grid, tol=args.tol or rigidity.DEFAULT_TOL)
    doc = {"command": "isometry-check", **verdict.to_record()}
    return doc, EXIT_CONTRADICTION if verdict.contradiction else EXIT_OK


def cmd_lempert_gap(args):
    spec = _spec(args)
    z, w = _points(args, 2)[:2]
    report = lempert.lempert_gap(spec, z, w, args.degree or 4, args.budget, args.seed)
    doc = {"command": "lempert-gap", "z": _pt(z), "w": _pt(w), **report.to_record()}
    return doc, EXIT_CONTRADICTION if report.result.lower_bound_violated else EXIT_OK


def cmd_circle_image(args):
    m = rlinear.RLinearMap1(parse_complex(args.a), parse_complex(args.b))
    lo, hi = rlinear.circle_image_radii(m)
    return {"command": "lemma4", "min": lo, "max": hi,
            "is_circle": rlinear.is_circle_image(m, args.tol or 1e-12)}, EXIT_OK


COMMANDS = {
    "dist": cmd_dist,
    "metric": cmd_metric,
    "indicatrix": cmd_indicatrix,
    "faces": cmd_faces,
    "classify": cmd_classify,
    "isometry-check": cmd_isometry_check,
    "lempert-gap": cmd_lempert_gap,
    "lemma4": cmd_circle_image,
}

_CANONICAL = {"circle-image": "lemma4"}


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerances must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--spec")
    common.add_argument("--spec2")
    common.add_argument("--point", action="append")
    common.add_argument("--vector")
    common.add_argument("--map")
    common.add_argument("--grid")
    common.add_argument("--degree", type=int)
    common.add_argument("--budget", type=int, default=20000)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--tol", type=_positive)
    common.add_argument("--pretty", action="store_true")
    common.add_argument("--out")
    parser = _Parser(prog="lempertkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        aliases = ["circle-image"] if name == "lemma4" else []
        p = sub.add_parser(name, parents=[common], aliases=aliases)
        if name == "lemma4":
            p.add_argument("--a", required=True, help="RE or RE,IM")
            p.add_argument("--b", required=True, help="RE or RE,IM")
    return parser


def run(argv=None) -> tuple[dict, int, argparse.Namespace | None]:
    """Parse and execute; returns (document, exit code, parsed args)."""
    args = None
    try:
        args = build_parser().parse_args(argv)
        doc, code = COMMANDS[_CANONICAL.get(args.command, args.command)](args)
    except (DomainError, HypothesisError) as exc:
        return {"error": str(exc), "kind": type(exc).__name__}, EXIT_DOMAIN, args
    except (ConfigError, argparse.ArgumentTypeError) as exc:
        return {"error": str(exc), "kind": type(exc).__name__}, EXIT_CONFIG, args
    except LempertkitError as exc:
        return {"error": str(exc), "kind": type(exc).__name__}, EXIT_DOMAIN, args
    doc = _clean(doc)
    if code == EXIT_CONTRADICTION:
        doc["status"] = "CONTRADICTION"
    return doc, code, args


def main(argv=None) -> int:
    doc, code, args = run(argv)
    if "error" in doc:
        print(json.dumps(doc, sort_keys=True), file=sys.stderr)
        return code
    if args.pretty:
        text = _pretty(doc)
    else:
        text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=False)
    if args.out:
        try:
            Path(args.out).write_text(text + "\n")
        except OSError as exc:
            print(json.dumps({"error": str(exc), "kind": "OSError"}), file=sys.stderr)
            return EXIT_CONFIG
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
