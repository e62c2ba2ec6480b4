"""Command-line front end.

Every subcommand reads a JSON problem spec (``--spec``) holding exactly the
keys it needs, writes a deterministic artifact to ``--out`` (default stdout)
and exits with 0 on success, 1 on invalid input, 2 on numerical failure and
3 on I/O failure.  Errors are reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Any, Callable, Sequence

import jsonschema
import numpy as np

from . import local
from .develop import develop_samples, monodromy
from .divisor import INFINITY, complete_at_infinity, divisor_from_json, divisor_to_json, parse_alpha, validate_gauss_bonnet
from .errors import FlatconeError, NumericalError, ValidationError
from .path import path_from_json
from .prym import PrymDifferential, metric_density
from .quadrature import DEFAULT_MAX_DEPTH, DEFAULT_TOL
from .schwarz_christoffel import (
    PrevertexConfig,
    polygon_from_json,
    sc_forward,
    sc_solve_parameters,
    sc_vertices,
)

__all__ = ["main", "run", "emit_svg", "format_json", "SCHEMAS", "SPEC_KEYS"]

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class _IOFailure(Exception):
    pass


# ---------------------------------------------------------------- output

def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise NumericalError(f"non-finite value {x} in output")
    s = format(x, ".17g")
    return "0" if s == "-0" else s


def format_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {format_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + format_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _c(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _exact(a) -> str | float:
    if isinstance(a, Fraction):
        return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
    return float(a)


_COMPLEX = {
    "type": "object",
    "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
    "required": ["re", "im"],
    "additionalProperties": False,
}
_ALPHA = {"type": ["string", "number"]}


def _obj(props: dict, required: Sequence[str] | None = None) -> dict:
    return {
        "type": "object",
        "properties": props,
        "required": list(props if required is None else required),
        "additionalProperties": False,
    }


_DIVISOR = _obj({
    "points": {"type": "array", "items": _obj({"re": {"type": "number"}, "im": {"type": "number"}, "alpha": _ALPHA})},
    "infinity": {"oneOf": [{"type": "null"}, _obj({"alpha": _ALPHA})]},
})

SCHEMAS: dict[str, dict] = {
    "validate": _obj({
        "passed": {"type": "boolean"},
        "exact": {"type": "boolean"},
        "degree": _ALPHA,
        "deficit": _ALPHA,
        "completed": {"oneOf": [{"type": "null"}, _DIVISOR]},
    }),
    "metric": _obj({
        "rows": {"type": "array", "items": _obj({
            "re": {"type": "number"}, "im": {"type": "number"},
            "density": {"type": ["number", "string"]},
        })},
    }),
    "develop": _obj({
        "samples": {"type": "array", "minItems": 2, "items": _obj({"z": _COMPLEX, "F": _COMPLEX})},
    }),
    "monodromy": _obj({
        "rotation": _COMPLEX,
        "translation": _COMPLEX,
        "predicted_rotation": _COMPLEX,
        "angle": {"type": "number"},
        "windings": {"type": "array", "items": {"type": "integer"}},
    }),
    "cone-angle": _obj({
        "points": {"type": "array", "items": _obj({
            "index": {"type": "integer"},
            "position": _COMPLEX,
            "alpha": _ALPHA,
            "eps": {"type": "number"},
            "measured": {"type": ["number", "null"]},
            "expected": {"type": ["number", "null"]},
        })},
    }),
    "frobenius": _obj({
        "root": _COMPLEX,
        "series": {"type": "array", "items": _obj({
            "N": {"type": "integer"},
            "coefficients": {"type": "array", "items": _COMPLEX},
            "residual_order": {"type": "number"},
            "predicted_order": {"type": "number"},
        })},
    }),
    "sc-solve": _obj({
        "prevertices": {"type": "array", "items": {"type": "number"}},
        "residual": {"type": "number"},
        "iterations": {"type": "integer"},
        "ratios": {"type": "array", "items": {"type": "number"}},
    }),
    "sc-map": _obj({
        "points": {"type": "array", "items": _obj({
            "z": {"oneOf": [_COMPLEX, {"const": "infinity"}]},
            "F": _COMPLEX,
        })},
    }),
}

# subcommand -> (required keys, optional keys, formats; the first is the default)
SPEC_KEYS: dict[str, tuple[frozenset, frozenset, tuple[str, ...]]] = {
    "validate": (frozenset({"divisor"}), frozenset(), ("json",)),
    "metric": (frozenset({"divisor", "grid"}), frozenset(), ("csv", "json")),
    "develop": (frozenset({"divisor", "path"}), frozenset({"samples"}), ("json",)),
    "monodromy": (frozenset({"divisor", "path"}), frozenset({"origin"}), ("json",)),
    "cone-angle": (frozenset({"divisor"}), frozenset({"eps"}), ("json",)),
    "frobenius": (frozenset({"frobenius"}), frozenset(), ("json",)),
    "sc-solve": (frozenset({"polygon"}), frozenset({"initial", "max_iters"}), ("json",)),
    "sc-map": (frozenset({"sc", "points"}), frozenset(), ("json",)),
    "plot": (frozenset(), frozenset({"divisor", "path", "samples", "sc"}), ("svg",)),
}
_COMMON = frozenset({"tolerances"})


# ---------------------------------------------------------------- SVG

def emit_svg(samples: Sequence[complex], style: dict | None = None) -> str:
    """One ``<polyline>`` through ``samples``; the imaginary axis points up.

    The viewBox is the bounding box plus a margin of 5% of its diagonal and
    coordinates are rounded to 1e-6 of the diagonal.
    """
    pts = [complex(z) for z in samples]
    if len(pts) < 2:
        raise ValidationError("an SVG polyline needs at least 2 samples")
    xs = np.array([z.real for z in pts])
    ys = np.array([-z.imag for z in pts])
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValidationError("non-finite sample")
    x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    diag = math.hypot(x1 - x0, y1 - y0)
    if diag == 0:
        raise ValidationError("degenerate bounding box: all samples coincide")
    q = 1e-6 * diag
    digits = max(0, -math.floor(math.log10(q)))

    def r(v: float) -> str:
        s = f"{round(v / q) * q:.{digits}f}"
        return s[1:] if s.startswith("-") and float(s) == 0 else s

    m = 0.05 * diag
    st = {"fill": "none", "stroke": "black", "stroke-width": "1", "vector-effect": "non-scaling-stroke"}
    st.update(style or {})
    attrs = " ".join(f'{k}="{v}"' for k, v in st.items())
    coords = " ".join(f"{r(x)},{r(y)}" for x, y in zip(xs, ys))
    view = f"{r(x0 - m)} {r(y0 - m)} {r(x1 - x0 + 2 * m)} {r(y1 - y0 + 2 * m)}"
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{view}">\n'
        f'  <polyline points="{coords}" {attrs}/>\n'
        "</svg>\n"
    )


# ---------------------------------------------------------------- parsing

def _complex_in(v) -> complex:
    if isinstance(v, dict):
        try:
            return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad complex value {v!r}") from exc
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    raise ValidationError(f"bad complex value {v!r}")


def _scalar_in(v):
    """Number, ``"p/q"`` string (kept exact) or ``{"re", "im"}``."""
    if isinstance(v, dict):
        return _complex_in(v)
    try:
        return parse_alpha(v)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad numeric value {v!r}") from exc


def _differential(spec: dict) -> PrymDifferential:
    return PrymDifferential.from_json(spec["divisor"])


def _tolerances(spec: dict, tol_override: float | None) -> dict:
    t = dict(spec.get("tolerances") or {})
    unknown = set(t) - {"tol_q", "max_depth", "resonance_tol"}
    if unknown:
        raise ValidationError(f"unknown tolerance keys {sorted(unknown)}")
    out = {
        "tol_q": float(t.get("tol_q", DEFAULT_TOL)),
        "max_depth": int(t.get("max_depth", DEFAULT_MAX_DEPTH)),
        "resonance_tol": None if t.get("resonance_tol") is None else float(t["resonance_tol"]),
    }
    if tol_override is not None:
        out["tol_q"] = float(tol_override)
    if not out["tol_q"] > 0:
        raise ValidationError("tol_q must be positive")
    return out


def _check_keys(command: str, spec: dict) -> None:
    if not isinstance(spec, dict):
        raise ValidationError("the problem spec must be a JSON object")
    required, optional, _ = SPEC_KEYS[command]
    keys = set(spec)
    missing = required - keys
    extra = keys - required - optional - _COMMON
    if missing:
        raise ValidationError(f"'{command}' needs keys {sorted(missing)}")
    if extra:
        raise ValidationError(f"'{command}' does not accept keys {sorted(extra)}")


# ---------------------------------------------------------------- commands

def _cmd_validate(spec, tol):
    d = divisor_from_json(spec["divisor"])
    gb = validate_gauss_bonnet(d)
    completed = None
    if d.infinity_point is None:
        completed = divisor_to_json(complete_at_infinity(d))
    report = {
        "passed": gb.passed,
        "exact": gb.exact,
        "degree": _exact(gb.degree),
        "deficit": _exact(gb.deficit),
        "completed": completed,
    }
    return report, (EXIT_OK if gb.passed else EXIT_VALIDATION)


def _grid_axis(g: dict, lo: str, hi: str, n: str) -> np.ndarray:
    try:
        a, b, k = float(g[lo]), float(g[hi]), int(g[n])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"grid needs numeric '{lo}', '{hi}', '{n}'") from exc
    if k < 1 or (k == 1 and a != b) or b < a:
        raise ValidationError(f"bad grid axis {lo}..{hi} with {n}={k}")
    return np.linspace(a, b, k)


def _cmd_metric(spec, tol):
    omega = _differential(spec)
    g = spec["grid"]
    if not isinstance(g, dict) or set(g) - {"re_min", "re_max", "nx", "im_min", "im_max", "ny"}:
        raise ValidationError("grid keys are re_min, re_max, nx, im_min, im_max, ny")
    rows = []
    for x in _grid_axis(g, "re_min", "re_max", "nx"):
        for y in _grid_axis(g, "im_min", "im_max", "ny"):
            z = complex(x, y)
            k = omega.index_of(z)
            if k is not None and omega.exponents[k] != 0:
                dens = "inf" if omega.exponents[k] < 0 else 0.0
            else:
                dens = metric_density(omega, z)
            rows.append({"re": float(x), "im": float(y), "density": dens})
    return {"rows": rows}, EXIT_OK


def _cmd_develop(spec, tol):
    omega = _differential(spec)
    path = path_from_json(spec["path"])
    n = int(spec.get("samples", 64))
    if n < 2:
        raise ValidationError("samples must be >= 2")
    pts = develop_samples(omega, path, n, tol=tol["tol_q"], max_depth=tol["max_depth"])
    return {"samples": [{"z": _c(z), "F": _c(F)} for z, F in pts]}, EXIT_OK


def _cmd_monodromy(spec, tol):
    omega = _differential(spec)
    loop = path_from_json(spec["path"])
    origin = _complex_in(spec["origin"]) if "origin" in spec else None
    res = monodromy(omega, loop, tol=tol["tol_q"], max_depth=tol["max_depth"], origin=origin)
    return {
        "rotation": _c(res.rotation),
        "translation": _c(res.translation),
        "predicted_rotation": _c(res.predicted_rotation),
        "angle": res.isometry.angle,
        "windings": [int(w) for w in res.windings],
    }, EXIT_OK


def _cmd_cone_angle(spec, tol):
    omega = _differential(spec)
    eps = float(spec.get("eps", 1e-3))
    rows = []
    for k, p in enumerate(omega.finite_points):
        a = float(p.alpha)
        row = {"index": k, "position": _c(p.position), "alpha": _exact(p.alpha), "eps": eps,
               "measured": None, "expected": None}
        if a > 0:
            row["measured"] = local.cone_angle_measure(omega, k, eps, tol=max(tol["tol_q"], 1e-13))
            row["expected"] = 2 * math.pi * a
        rows.append(row)
    return {"points": rows}, EXIT_OK


def _indicial_root(b0, which):
    if not isinstance(which, str):
        return _scalar_in(which)
    if which not in ("smaller", "larger"):
        raise ValidationError("root must be 'smaller', 'larger' or a number")
    disc = 1 - 4 * b0
    if isinstance(disc, Fraction) and disc >= 0:
        rn, rd = math.isqrt(disc.numerator), math.isqrt(disc.denominator)
        if rn * rn == disc.numerator and rd * rd == disc.denominator:
            sq = Fraction(rn, rd)
            return (1 - sq) / 2 if which == "smaller" else (1 + sq) / 2
    sq = complex(disc) ** 0.5
    r1, r2 = (1 - sq) / 2, (1 + sq) / 2
    lo, hi = sorted((r1, r2), key=lambda r: (r.real, r.imag))
    pick = lo if which == "smaller" else hi
    return pick.real if pick.imag == 0 else pick


def _cmd_frobenius(spec, tol):
    f = spec["frobenius"]
    if not isinstance(f, dict) or "b" not in f or set(f) - {"b", "root", "orders"}:
        raise ValidationError("frobenius spec keys are b, root, orders")
    b = [_scalar_in(v) for v in f["b"]]
    if not b:
        raise ValidationError("b must contain at least b_0")
    s = _indicial_root(b[0], f.get("root", "larger"))
    orders = [int(N) for N in f.get("orders", [3, 6])]
    out = []
    for N in orders:
        ser = local.frobenius_coefficients(b, s, N, tol["resonance_tol"])
        slope = local.residual_order(ser, b)
        out.append({
            "N": N,
            "coefficients": [_c(complex(c)) for c in ser.coefficients],
            "residual_order": slope,
            "predicted_order": complex(s).real + N + 1,
        })
    return {"root": _c(complex(s)), "series": out}, EXIT_OK


def _cmd_sc_solve(spec, tol):
    poly = polygon_from_json(spec["polygon"])
    init = spec.get("initial")
    rep = sc_solve_parameters(poly, max_iters=int(spec.get("max_iters", 200)),
                              initial=None if init is None else [float(x) for x in init])
    return {
        "prevertices": list(rep.config.prevertices),
        "residual": rep.residual,
        "iterations": rep.iterations,
        "ratios": list(rep.ratios),
    }, EXIT_OK


def _sc_in(obj) -> tuple[PrevertexConfig, list, complex]:
    if not isinstance(obj, dict) or not {"prevertices", "alphas"} <= set(obj) or \
            set(obj) - {"prevertices", "alphas", "scale"}:
        raise ValidationError("sc spec keys are prevertices, alphas and optional scale")
    cfg = PrevertexConfig(tuple(float(x) for x in obj["prevertices"]))
    scale = _complex_in(obj["scale"]) if "scale" in obj else 1.0
    return cfg, [parse_alpha(a) for a in obj["alphas"]], scale


def _cmd_sc_map(spec, tol):
    cfg, alphas, scale = _sc_in(spec["sc"])
    rows = []
    for p in spec["points"]:
        if p == "infinity":
            rows.append({"z": "infinity", "F": _c(sc_forward(cfg, alphas, INFINITY, scale))})
        else:
            z = _complex_in(p)
            rows.append({"z": _c(z), "F": _c(sc_forward(cfg, alphas, z, scale))})
    return {"points": rows}, EXIT_OK


def _cmd_plot(spec, tol):
    if "sc" in spec:
        if {"divisor", "path", "samples"} & set(spec):
            raise ValidationError("plot takes either 'sc' or 'divisor' + 'path'")
        cfg, alphas, scale = _sc_in(spec["sc"])
        v = list(sc_vertices(cfg, alphas, scale))
        return emit_svg(v + [v[0]]), EXIT_OK
    if not {"divisor", "path"} <= set(spec):
        raise ValidationError("plot needs 'sc' or 'divisor' + 'path'")
    omega = _differential(spec)
    path = path_from_json(spec["path"])
    n = int(spec.get("samples", 128))
    pts = develop_samples(omega, path, n, tol=tol["tol_q"], max_depth=tol["max_depth"])
    return emit_svg([F for _, F in pts]), EXIT_OK


COMMANDS: dict[str, Callable] = {
    "validate": _cmd_validate,
    "metric": _cmd_metric,
    "develop": _cmd_develop,
    "monodromy": _cmd_monodromy,
    "cone-angle": _cmd_cone_angle,
    "frobenius": _cmd_frobenius,
    "sc-solve": _cmd_sc_solve,
    "sc-map": _cmd_sc_map,
    "plot": _cmd_plot,
}


def _render(command: str, result: Any, fmt: str) -> str:
    if fmt == "svg":
        return result
    if fmt == "csv":
        lines = ["re,im,density"]
        for row in result["rows"]:
            d = row["density"]
            lines.append(f"{_num(row['re'])},{_num(row['im'])},{d if isinstance(d, str) else _num(d)}")
        return "\n".join(lines) + "\n"
    text = format_json(result) + "\n"
    jsonschema.validate(json.loads(text), SCHEMAS[command])
    return text


def run(command: str, spec: dict, fmt: str | None = None, tol: float | None = None) -> tuple[str, int]:
    """Execute one subcommand on an already-parsed spec; returns ``(text, exit code)``."""
    if command not in COMMANDS:
        raise ValidationError(f"unknown subcommand {command!r}")
    _check_keys(command, spec)
    formats = SPEC_KEYS[command][2]
    fmt = fmt or formats[0]
    if fmt not in formats:
        raise ValidationError(f"'{command}' supports formats {list(formats)}, not {fmt!r}")
    tols = _tolerances(spec, tol)
    result, code = COMMANDS[command](spec, tols)
    return _render(command, result, fmt), code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--spec", required=True, help="problem spec JSON file ('-' for stdin)")
    common.add_argument("--out", default="-", help="output file, '-' for stdout")
    common.add_argument("--tol", type=float, default=None, help="quadrature tolerance (overrides tol_q)")
    common.add_argument("--format", choices=("json", "csv", "svg"), default=None)
    parser = _Parser(prog="flatcone", description="Flat conical metrics on the sphere.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _read_spec(source: str) -> dict:
    try:
        text = sys.stdin.read() if source == "-" else open(source, encoding="utf-8").read()
    except OSError as exc:
        raise _IOFailure(f"cannot read spec {source!r}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"spec is not valid JSON: {exc}") from exc


def _write(target: str, text: str) -> None:
    try:
        if target == "-":
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            with open(target, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {target!r}: {exc}") from exc


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        spec = _read_spec(args.spec)
        text, code = run(args.command, spec, args.format, args.tol)
        _write(args.out, text)
        if code != EXIT_OK:
            return _fail("ValidationError", "divisor fails the Gauss-Bonnet condition", code)
        return EXIT_OK
    except _IOFailure as exc:
        return _fail("IOError", str(exc), EXIT_IO)
    except ValidationError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_VALIDATION)
    except NumericalError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_NUMERICAL)
    except jsonschema.ValidationError as exc:
        return _fail("SchemaError", exc.message, EXIT_NUMERICAL)
    except (FlatconeError, ValueError, TypeError, KeyError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_VALIDATION)


if __name__ == "__main__":
    sys.exit(main())
