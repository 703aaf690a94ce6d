"""Command line front end.

    logrs <analyze|skeleton|truncate|fit|render|validate> [options] INPUT...

Every command writes its artifact into ``--out`` (default: the current
directory).  Exit status 2 means an input could not be parsed, 3 means a
numerical routine failed; in that case the error is written to error.json.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import FiberEnumerationIncomplete, LogRSError
from .geometry import _star_slits, kn_cells, parabolicity, ramification_count
from .numerics import CPoly, PQForm, as_complex
from .skeleton import (
    ram_cycles,
    skeleton_build,
    skeleton_from_dict,
    skeleton_to_dict,
    truncate,
    validate_graph,
)
from .svg import cells_svg, skeleton_svg
from .uniformize import RamData, fit_pq, nonlinearity, ram_data


class InputError(Exception):
    """Malformed input file; the message names the offending field."""


# ---------------------------------------------------------------------------
# byte-stable JSON


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_plain(float(obj.real)), _plain(float(obj.imag))]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _plain(float(obj))
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, CPoly):
        return [_plain(complex(c)) for c in obj.coeffs]
    return obj


def _encode(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if obj == 0:
            return "0.0"
        text = format(obj, ".17g")
        return text if ("e" in text or "." in text) else text + ".0"
    return json.dumps(obj)


def dumps(obj) -> str:
    """Sorted keys, floats with 17 significant digits, trailing newline."""
    return _encode(_plain(obj)) + "\n"


def _write(out: Path, name: str, obj) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(dumps(obj) if not isinstance(obj, str) else obj)
    return path


# ---------------------------------------------------------------------------
# input parsing


def _load(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: file not found")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}")
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    return data


def _complex_field(data: dict, key: str, where: str, default=None) -> complex:
    if key not in data:
        if default is not None:
            return default
        raise InputError(f"{where}: missing field '{key}'")
    try:
        return as_complex(data[key])
    except (TypeError, ValueError):
        raise InputError(f"{where}: field '{key}' must be a number or [re, im]")


def _poly_field(data: dict, key: str, where: str) -> CPoly:
    if key not in data:
        raise InputError(f"{where}: missing field '{key}'")
    raw = data[key]
    if not isinstance(raw, list) or not raw:
        raise InputError(f"{where}: field '{key}' must be a nonempty list of coefficients")
    try:
        return CPoly([as_complex(c) for c in raw])
    except (TypeError, ValueError):
        raise InputError(f"{where}: field '{key}' has a malformed coefficient")


def parse_pqform(data: dict, where: str = "input") -> PQForm:
    P = _poly_field(data, "P", where)
    Q = _poly_field(data, "Q", where)
    if Q.is_zero():
        raise InputError(f"{where}: field 'Q' must not be identically zero")
    zb = _complex_field(data, "base_point", where, 0j)
    c0 = _complex_field(data, "base_value", where, 0j)
    return PQForm(P, Q, zb, c0)


def pqform_to_dict(f: PQForm) -> dict:
    return {"P": f.P, "Q": f.Q, "base_point": f.base_point, "base_value": f.base_value}


def _parse_skeleton(data: dict, where: str):
    try:
        return skeleton_from_dict(data)
    except KeyError as exc:
        raise InputError(f"{where}: missing field {exc}")
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: malformed field {exc}")


def _parse_ramdata(data: dict, where: str) -> RamData:
    try:
        return RamData.from_dict(data)
    except KeyError as exc:
        raise InputError(f"{where}: missing field {exc}")
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: malformed field {exc}")


def _parse_z0(text: str):
    if text == "auto":
        return None
    try:
        re_, im_ = (float(p) for p in text.split(","))
    except ValueError:
        raise InputError(f"--z0: expected 'auto' or 're,im', got '{text}'")
    return complex(re_, im_)


def _load_chart_or_skeleton(path: str, args):
    data = _load(path)
    if "edges" in data:
        return _parse_skeleton(data, path)
    f = parse_pqform(data, path)
    return skeleton_build(f, _parse_z0(args.z0), args.radius, seed=args.seed)


# ---------------------------------------------------------------------------
# commands


def _window(g, pad: float = 1.0) -> tuple:
    pts = [g.z0] + list(g.feet)
    xs = [p.real for p in pts]
    ys = [p.imag for p in pts]
    half = 0.5 * max(max(xs) - min(xs), max(ys) - min(ys)) + pad
    cx, cy = 0.5 * (max(xs) + min(xs)), 0.5 * (max(ys) + min(ys))
    return (cx - half, cx + half, cy - half, cy + half)


def cmd_analyze(args) -> dict:
    f = parse_pqform(_load(args.input[0]), args.input[0])
    rd = ram_data(f)
    nl = nonlinearity(f)
    rep = parabolicity(ramification_count(f))
    report = {
        "ram_data": rd.to_dict() | {"d1": rd.d1, "d2": rd.d2},
        "nonlinearity": {
            "poles": [{"z": z, "residue": r} for z, r in nl.poles],
            "poly_part": nl.poly_part,
            "degree_at_infinity": nl.degree_at_infinity,
        },
        "parabolicity": {
            "n_bound": rep.n_bound,
            "verdict": rep.verdict,
            "integral_lower_bound_diverges": rep.integral_lower_bound_diverges,
            "n_estimates": {},
        },
    }
    if args.mesh is not None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FiberEnumerationIncomplete)
            g = skeleton_build(f, _parse_z0(args.z0), args.radius, seed=args.seed)
        cells = kn_cells(g, _window(g), args.mesh, seed=args.seed)
        est = parabolicity(ramification_count(f), cells).n_estimates
        report["parabolicity"]["n_estimates"] = {f"{k:.6f}": v for k, v in est.items()}
    _write(args.out, "report.json", report | {"seed": args.seed})
    return report


def cmd_skeleton(args) -> dict:
    f = parse_pqform(_load(args.input[0]), args.input[0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FiberEnumerationIncomplete)
        g = skeleton_build(f, _parse_z0(args.z0), args.radius, seed=args.seed)
    data = skeleton_to_dict(g) | {"seed": args.seed}
    _write(args.out, "skeleton.json", data)
    if args.svg:
        slits, _, _ = _star_slits(g)
        _write(args.out, "skeleton.svg", skeleton_svg(g, slits, ram_cycles(g), _window(g)))
    return data


def cmd_truncate(args) -> dict:
    g = _parse_skeleton(_load(args.input[0]), args.input[0])
    if args.n is None:
        raise InputError("--n is required for truncate")
    t = truncate(g, args.n)
    data = skeleton_to_dict(t) | {"seed": args.seed, "n": args.n}
    _write(args.out, "truncated.json", data)
    return data


def cmd_fit(args) -> dict:
    if len(args.input) != 2:
        raise InputError("fit needs RAMDATA.json INIT.json")
    target = _parse_ramdata(_load(args.input[0]), args.input[0])
    init_data = _load(args.input[1])
    init = parse_pqform(init_data, args.input[1])
    norm = None
    if "normalization" in init_data:
        nd = init_data["normalization"]
        if not isinstance(nd, dict):
            raise InputError(f"{args.input[1]}: field 'normalization' must be an object")
        where = f"{args.input[1]}: normalization"
        norm = (_complex_field(nd, "F0", where), _complex_field(nd, "dF0", where))
    try:
        res = fit_pq(target, init, norm)
    except ValueError as exc:
        raise InputError(f"{args.input[1]}: {exc}")
    data = {
        "f": pqform_to_dict(res.f),
        "residual": res.residual,
        "iterations": res.iterations,
        "converged": res.converged,
        "seed": args.seed,
    }
    _write(args.out, "fit.json", data)
    return data


def cmd_render(args) -> dict:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FiberEnumerationIncomplete)
        g = _load_chart_or_skeleton(args.input[0], args)
    window = _window(g)
    h = args.mesh if args.mesh is not None else 0.02 * (window[1] - window[0])
    cells = kn_cells(g, window, h, seed=args.seed)
    _write(args.out, "cells.svg", cells_svg(cells))
    counts = np.bincount(cells.assignment, minlength=len(cells.rams))
    data = {
        "window": list(window),
        "h": h,
        "ramification_points": [{"projection": r.projection, "order": r.order} for r in cells.rams],
        "cell_sizes": counts.tolist(),
        "boundary_samples": int(cells.boundary.sum()),
        "seed": args.seed,
    }
    _write(args.out, "cells.json", data)
    return data


def cmd_validate(args) -> dict:
    g = _parse_skeleton(_load(args.input[0]), args.input[0])
    out = []
    for v in validate_graph(g):
        subject = v.subject
        if hasattr(subject, "u"):
            subject = {"u": subject.u, "v": subject.v, "foot": subject.foot,
                       "u_side": subject.u_side, "v_side": subject.v_side}
        out.append({"axiom": v.axiom, "subject": subject, "witness": v.witness})
    data = {"violations": out, "seed": args.seed}
    _write(args.out, "violations.json", data)
    return data


COMMANDS = {
    "analyze": cmd_analyze,
    "skeleton": cmd_skeleton,
    "truncate": cmd_truncate,
    "fit": cmd_fit,
    "render": cmd_render,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logrs", description="Log-Riemann surfaces of PQ-forms.")
    p.add_argument("--version", action="version", version=f"logrs {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("input", nargs="+")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--z0", default="auto")
    p.add_argument("--mesh", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--svg", action="store_true", help="also draw the skeleton")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except InputError as exc:
        print(f"logrs: input error: {exc}", file=sys.stderr)
        return 2
    except LogRSError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command, "seed": args.seed}
        _write(args.out, "error.json", err)
        print(f"logrs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
