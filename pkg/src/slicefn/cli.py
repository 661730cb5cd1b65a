"""Command-line front end.

Every subcommand writes one JSON document (or CSV with ``--out csv``) to
standard output.  Failures print ``{"error": ..., "message": ...}`` and exit
with 2 (parse error), 3 (domain or math error) or 4 (inconclusive probe).
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .cayley_dickson import NAME_LEVELS, Element, format_element
from .errors import ParseError, SliceError
from .expr import format_function, parse_element, parse_function
from .modulus_analysis import local_extremum_probe, open_image_epsilon, sphere_extrema
from .reciprocal import (
    associator_status,
    reciprocal_via_phi,
    star_reciprocal,
    t_f,
    t_f_inverse,
    t_f_special,
)
from .singularities import classify_singularity, density_probe, spherical_laurent_extract
from .slice_rep import slice_product
from .star_poly import function_from_json
from .zeros import camshaft_zero, classify_sphere_zeros, zero_scan


class _Context:
    def __init__(self, args):
        self.args = args
        self.level = NAME_LEVELS[args.algebra]
        self.exact = args.mode == "rational"

    def point(self, text):
        return parse_element(text, self.level, self.exact)

    def function(self, text=None, path=None):
        if path is not None:
            try:
                with open(path, encoding="utf-8") as fh:
                    data = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ParseError(f"cannot read function file: {exc}") from exc
            try:
                f = function_from_json(data)
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"malformed function file: {exc}") from exc
            if f.level != self.level:
                raise ParseError(f"function file is over {data.get('algebra')}, not {self.args.algebra}")
            return f
        if text is None:
            raise ParseError("an --expr or --function is required")
        f = parse_function(text, self.level, self.exact)
        return f


def _elem(e):
    return {"value": e.to_json(), "text": format_element(e)}


def _fn(f):
    out = {"text": format_function(f)}
    if hasattr(f, "to_json"):
        out["function"] = f.to_json()
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(ctx):
    f = ctx.function(ctx.args.expr, ctx.args.function)
    x = ctx.point(ctx.args.at)
    return {"command": "eval", "at": _elem(x), **_elem(f.evaluate(x))}


def cmd_product(ctx):
    f = ctx.function(ctx.args.expr, ctx.args.function)
    g = ctx.function(ctx.args.with_expr)
    return {"command": "product", **_fn(slice_product(f, g))}


def cmd_conj(ctx):
    return {"command": "conj", **_fn(ctx.function(ctx.args.expr, ctx.args.function).conj())}


def cmd_normal(ctx):
    return {"command": "normal", **_fn(ctx.function(ctx.args.expr, ctx.args.function).normal())}


def cmd_reciprocal(ctx):
    f = ctx.function(ctx.args.expr, ctx.args.function)
    r = star_reciprocal(f)
    out = {"command": "reciprocal", **_fn(r)}
    if ctx.args.at:
        x = ctx.point(ctx.args.at)
        out["at"] = _elem(x)
        out["value"] = _elem(r.evaluate(x))
        out["value_via_phi"] = _elem(reciprocal_via_phi(f, x))
    return out


def cmd_tf(ctx):
    f = ctx.function(ctx.args.expr, ctx.args.function)
    x = ctx.point(ctx.args.at)
    y = t_f_inverse(f, x) if ctx.args.inverse else t_f(f, x)
    out = {"command": "tf", "at": _elem(x), "inverse": bool(ctx.args.inverse), **_elem(y)}
    if not ctx.args.inverse and not x.is_real():
        out["special_form"] = _elem(t_f_special(f, x))
        out["associator"] = associator_status(f, x, ctx.args.tol or 1e-10)
    return out


def cmd_zeros(ctx):
    f = ctx.function(ctx.args.expr, ctx.args.function)
    if ctx.args.sphere:
        res = classify_sphere_zeros(f, ctx.point(ctx.args.sphere), ctx.args.tol or 1e-9)
        return {"command": "zeros", "spheres": [res.to_json()]}
    hits = zero_scan(f, tuple(ctx.args.rect), ctx.args.density, ctx.args.tol or 1e-9)
    return {"command": "zeros", "spheres": [h.to_json() for h in hits]}


def cmd_camshaft(ctx):
    f = ctx.function(ctx.args.expr, ctx.args.function)
    g = ctx.function(ctx.args.with_expr)
    res = camshaft_zero(f, g, ctx.point(ctx.args.sphere), tol=ctx.args.tol or 1e-9)
    out = {"command": "camshaft", **res.to_json()}
    out["extra"] = {k: (v.to_json() if isinstance(v, Element) else v) for k, v in res.extra.items()}
    return out


def cmd_extrema(ctx):
    f = ctx.function(ctx.args.expr, ctx.args.function)
    y = ctx.point(ctx.args.at)
    out = {"command": "extrema", **sphere_extrema(f, y, ctx.args.grid, ctx.args.seed).to_json()}
    if ctx.args.probe_radius:
        out["local_probe"] = local_extremum_probe(f, y, ctx.args.probe_radius, seed=ctx.args.seed)
    return out


def cmd_openmap(ctx):
    f = ctx.function(ctx.args.expr, ctx.args.function)
    x0 = ctx.point(ctx.args.at)
    rep = open_image_epsilon(f, x0, ctx.args.radius, n_targets=ctx.args.targets, seed=ctx.args.seed)
    return {"command": "openmap", **rep}


def cmd_laurent(ctx):
    f = ctx.function(ctx.args.expr, ctx.args.function)
    y = ctx.point(ctx.args.center).to_double()
    c = spherical_laurent_extract(f, y, (ctx.args.kmin, ctx.args.kmax), radius=ctx.args.radius,
                                  tol=ctx.args.tol or 1e-9)
    return {"command": "laurent", **c.to_json()}


def cmd_classify(ctx):
    f = ctx.function(ctx.args.expr, ctx.args.function)
    rep = classify_singularity(f, ctx.point(ctx.args.center), k_max=ctx.args.kmax)
    return {"command": "classify", **rep.to_json()}


def cmd_density(ctx):
    f = ctx.function(ctx.args.expr, ctx.args.function)
    rep = density_probe(f, ctx.point(ctx.args.center), n_samples=ctx.args.samples,
                        eps=ctx.args.eps, n_targets=ctx.args.targets,
                        shell=tuple(ctx.args.shell), seed=ctx.args.seed)
    return {"command": "density", **rep}


def cmd_table(ctx):
    """Grid of ``|f(alpha + beta J)|`` and coordinates over a half-plane rectangle."""
    f = ctx.function(ctx.args.expr, ctx.args.function)
    a0, a1, b0, b1 = ctx.args.rect
    n = ctx.args.n
    J = ctx.point(ctx.args.unit).to_double()
    J = J / abs(J)
    rows = []
    for a in np.linspace(a0, a1, n):
        for b in np.linspace(b0, b1, n):
            x = J * float(b) + float(a)
            try:
                v = f.evaluate(x).to_double()
                vals = [float(c) for c in v.coords]
                rows.append([float(a), float(b), abs(v)] + vals)
            except SliceError:
                rows.append([float(a), float(b), math.nan] + [math.nan] * (1 << ctx.level))
    header = ["alpha", "beta", "abs"] + [f"c{t}" for t in range(1 << ctx.level)]
    return {"command": "table", "unit": J.to_json(), "header": header, "rows": rows}


COMMANDS = {
    "eval": cmd_eval, "product": cmd_product, "conj": cmd_conj, "normal": cmd_normal,
    "reciprocal": cmd_reciprocal, "tf": cmd_tf, "zeros": cmd_zeros, "camshaft": cmd_camshaft,
    "extrema": cmd_extrema, "openmap": cmd_openmap, "laurent": cmd_laurent,
    "classify": cmd_classify, "density": cmd_density, "table": cmd_table,
}


# ---------------------------------------------------------------------------
# argument parsing and output


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--algebra", choices=["C", "H", "O"], default="O")
    common.add_argument("--mode", choices=["rational", "double"], default="rational")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", choices=["json", "csv"], default="json")
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--expr", help="function in the expression language")
    common.add_argument("--function", help="JSON file holding a function")

    parser = argparse.ArgumentParser(prog="slicefn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    add("eval", "evaluate at a point").add_argument("--at", required=True)
    p = add("product", "star product")
    p.add_argument("--with", dest="with_expr", required=True)
    add("conj", "conjugate function")
    add("normal", "normal function")
    add("reciprocal", "star reciprocal").add_argument("--at")
    p = add("tf", "sphere transformation")
    p.add_argument("--at", required=True)
    p.add_argument("--inverse", action="store_true")
    p = add("zeros", "zero spheres")
    p.add_argument("--rect", type=float, nargs=4, default=[-2, 2, 0, 2],
                   metavar=("A0", "A1", "B0", "B1"))
    p.add_argument("--density", type=int, default=64)
    p.add_argument("--sphere", help="classify the zeros on the sphere of this point only")
    p = add("camshaft", "zero of a product on a sphere")
    p.add_argument("--with", dest="with_expr", required=True)
    p.add_argument("--sphere", required=True)
    p = add("extrema", "modulus extrema on a sphere")
    p.add_argument("--at", required=True)
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--probe-radius", type=float, default=None)
    p = add("openmap", "open-mapping epsilon ball")
    p.add_argument("--at", required=True)
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--targets", type=int, default=32)
    p = add("laurent", "spherical Laurent coefficients")
    p.add_argument("--center", required=True)
    p.add_argument("--kmin", type=int, default=-4)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--radius", type=float, default=None)
    p = add("classify", "singularity classification")
    p.add_argument("--center", required=True)
    p.add_argument("--kmax", type=int, default=12)
    p = add("density", "image density near a singular sphere")
    p.add_argument("--center", required=True)
    p.add_argument("--samples", type=int, default=10 ** 5)
    p.add_argument("--eps", type=float, default=0.15)
    p.add_argument("--targets", type=int, default=2000)
    p.add_argument("--shell", type=float, nargs=2, default=[0.1, 1.0])
    p = add("table", "CSV grid of |f| over a half-plane rectangle")
    p.add_argument("--rect", type=float, nargs=4, default=[-2, 2, 0, 2],
                   metavar=("A0", "A1", "B0", "B1"))
    p.add_argument("--n", type=int, default=21)
    p.add_argument("--unit", default="i")
    return parser


def _flatten(prefix, value, rows):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], rows)
    elif isinstance(value, list):
        for n, v in enumerate(value):
            _flatten(f"{prefix}[{n}]", v, rows)
    else:
        rows.append([prefix, value])


def _finite(value):
    """Replace non-finite floats by strings so the output stays valid JSON."""
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, np.generic):
        return _finite(value.item())
    return value


def render(result, fmt):
    result = _finite(result)
    if fmt == "json":
        return json.dumps(result, sort_keys=True, default=str, allow_nan=False)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if result.get("command") == "table":
        w.writerow(result["header"])
        w.writerows(result["rows"])
    else:
        w.writerow(["key", "value"])
        rows = []
        _flatten("", result, rows)
        w.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _error(exc, code):
    out = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if getattr(exc, "position", None) is not None:
        out["position"] = exc.position
    return out


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result = COMMANDS[args.command](_Context(args))
        code = 0
    except SliceError as exc:
        result, code = _error(exc, exc.exit_code), exc.exit_code
    except (ValueError, ZeroDivisionError, ArithmeticError) as exc:
        result, code = _error(exc, 3), 3
    if code:
        print(json.dumps(result, sort_keys=True), file=stdout)
    else:
        print(render(result, args.out), file=stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
