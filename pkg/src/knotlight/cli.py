"""Command-line entry point: verify, trace, invariants, grid, fibration.

Exit codes: 0 success, 1 domain or verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import re
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import export, frames, topology, verify
from .exprlang import ExprError
from .fields import BatemanField, eb_extract, hopf_ranada, line_direction, psi_for_family, rs_form
from .frames import FrameSide
from .topology import GridSpec, TraceConfig, TraceError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

BUILTINS = {"hopf-ranada": hopf_ranada}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class FieldSpec:
    builtin: str | None = None
    alpha: str | None = None
    beta: str | None = None

    def __post_init__(self):
        has_expr = self.alpha is not None or self.beta is not None
        if self.builtin is not None and has_expr:
            raise UsageError("give either --field or --alpha/--beta, not both")
        if has_expr and (self.alpha is None or self.beta is None):
            raise UsageError("--alpha and --beta must be given together")

    def build(self) -> BatemanField:
        if self.alpha is not None:
            try:
                return BatemanField.from_expressions(self.alpha, self.beta)
            except ExprError as exc:
                raise UsageError(str(exc)) from exc
        return BUILTINS[self.builtin or "hopf-ranada"]()


# -- argument parsing helpers ------------------------------------------------------


def _floats(text: str, n: int | None = None, what: str = "value") -> tuple:
    try:
        vals = tuple(float(v) for v in text.strip().split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers for {what}, got {text!r}")
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers for {what}, got {text!r}")
    if not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"non-finite {what}: {text!r}")
    return vals


def _pair(text):
    a, b = _floats(text, 2, "an interval a,b")
    if not b > a:
        raise argparse.ArgumentTypeError(f"interval {text!r} must have a < b")
    return (a, b)


def _point(text):
    return _floats(text, 3, "a point x,y,z")


def _positive_int(minimum):
    def conv(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if v < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {v}")
        return v

    return conv


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def _override(text):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    if name not in verify.CHECKS:
        raise argparse.ArgumentTypeError(f"unknown check {name!r}; known: {', '.join(verify.CHECKS)}")
    return name, _positive_float(value)


_NEG_LIST = re.compile(r"^-[0-9.]")


def _protect_negatives(argv):
    # "-6,6" or "-0.5,0,0" would otherwise be taken for an option flag
    return [" " + a if _NEG_LIST.match(a) and ("," in a or not _is_number(a)) else a for a in argv]


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_field(p):
    g = p.add_argument_group("field")
    g.add_argument("--field", choices=sorted(BUILTINS), help="built-in Bateman pair (default hopf-ranada)")
    g.add_argument("--alpha", help="expression for alpha(t, x, y, z)")
    g.add_argument("--beta", help="expression for beta(t, x, y, z)")


def _add_box(p, default=(-2.0, 2.0), axes="xyz"):
    p.add_argument("--box", type=_pair, default=default, help="a,b applied to every axis")
    for ax in axes:
        p.add_argument(f"--box-{ax}", type=_pair, default=None, help=f"override for the {ax} axis")


def _box(args, axes) -> list:
    return [list(getattr(args, f"box_{ax}") or args.box) for ax in axes]


def _field(args) -> BatemanField:
    return FieldSpec(args.field, args.alpha, args.beta).build()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="knotlight", description="Null electromagnetic fields from Bateman pairs.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("verify", help="score a Bateman pair against the identity battery")
    _add_field(p)
    p.add_argument("--samples", type=_positive_int(1), default=1000)
    _add_box(p, axes="txyz")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-override", type=_override, action="append", default=[], metavar="NAME=VALUE")

    p = sub.add_parser("trace", help="trace field lines at a fixed time")
    _add_field(p)
    p.add_argument("--line", choices=topology_families(), default="magnetic")
    p.add_argument("--seed", type=_point, action="append", required=True, metavar="X,Y,Z")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--out", default=None, help="PATH.csv or PATH.vtk")
    _add_tracer(p)

    p = sub.add_parser("invariants", help="Hopf invariant, linking of traced lines, helicity")
    _add_field(p)
    p.add_argument("--hopf", type=int, choices=(1, 2, 3), action="append", default=[])
    p.add_argument("--samples", type=_positive_int(100), default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--link", type=_point, nargs=2, metavar=("SEED_A", "SEED_B"))
    p.add_argument("--line", choices=topology_families(), default="magnetic")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--helicity", action="store_true")
    p.add_argument("--grid", type=_positive_int(2), default=64)
    _add_box(p, default=(-6.0, 6.0))
    _add_tracer(p)

    p = sub.add_parser("grid", help="export E, B and the Poynting vector on a grid")
    _add_field(p)
    p.add_argument("--grid", type=_positive_int(2), default=32)
    _add_box(p, default=(-3.0, 3.0))
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--out", required=True, help="PATH.vtk")

    p = sub.add_parser("fibration", help="projected Hopf circles of the invariant fields")
    p.add_argument("--axis", choices=("1", "2", "3", "all"), default="all")
    p.add_argument("--count", type=_positive_int(1), default=8)
    p.add_argument("--steps", type=_positive_int(16), default=1024)
    p.add_argument("--out", default=None, help="PATH.csv or PATH.vtk")
    return parser


def topology_families():
    from .fields import LINE_FAMILIES

    return LINE_FAMILIES


def _add_tracer(p):
    d = TraceConfig()
    g = p.add_argument_group("tracer")
    g.add_argument("--step", type=_positive_float, default=d.step)
    g.add_argument("--rtol", type=_positive_float, default=d.rtol)
    g.add_argument("--atol", type=_positive_float, default=d.atol)
    g.add_argument("--max-arclength", type=_positive_float, default=d.max_arclength)
    g.add_argument("--closure-tol", type=_positive_float, default=d.closure_tol)
    g.add_argument("--min-arclength", type=_positive_float, default=d.min_arclength)
    g.add_argument("--max-segment", type=_positive_float, default=d.max_segment)


def _tracer(args) -> TraceConfig:
    try:
        return TraceConfig(
            step=args.step,
            rtol=args.rtol,
            atol=args.atol,
            max_arclength=args.max_arclength,
            closure_tol=args.closure_tol,
            min_arclength=args.min_arclength,
            max_segment=args.max_segment,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _clean(obj):
    """Make a structure JSON-safe: NaN/inf become null, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(payload: dict, out):
    print(json.dumps(_clean(payload), indent=2), file=out)


def _fmt_seed(s):
    return "(" + ", ".join("%g" % v for v in s) + ")"


# -- commands --------------------------------------------------------------------------


def cmd_verify(args, out, err) -> int:
    f = _field(args)
    box = _box(args, "txyz")
    report = verify.run_battery(
        f, box=box, n=args.samples, seed=args.seed, tolerances=dict(args.tol_override)
    )
    payload = report.to_dict()
    payload["failing"] = report.failing()
    _emit(payload, out)
    return EXIT_OK if report.passed else EXIT_FAIL


def _trace_family(f, family, t, seeds, cfg, err):
    direction = line_direction(f, family, t)
    which = psi_for_family(family)
    results = []
    for s in seeds:
        try:
            c = topology.trace_line(direction, s, cfg)
        except TraceError as exc:
            print(f"error: trace from seed {_fmt_seed(s)} failed: {exc}", file=err)
            results.append((s, None, None))
            continue
        results.append((s, c, topology.psi_constancy(f, t, c, which)))
    return results


def cmd_trace(args, out, err) -> int:
    f = _field(args)
    cfg = _tracer(args)
    results = _trace_family(f, args.line, args.t, args.seed, cfg, err)
    which = psi_for_family(args.line)
    for s, c, dev in results:
        if c is None:
            continue
        print(
            f"seed={_fmt_seed(s)} closed={'yes' if c.closed else 'no'} "
            f"length={c.length():.10g} closure_gap={c.closure_gap:.3g} "
            f"psi{which}_deviation={dev:.3g} vertices={len(c)}",
            file=out,
        )
    good = [c for _, c, _ in results if c is not None]
    if args.out and good:
        try:
            paths = export.write_curves(args.out, good)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        for p in paths:
            print(f"wrote {p}", file=out)
    return EXIT_OK if len(good) == len(results) else EXIT_FAIL


def _hopf_payload(i, n, seed):
    value = topology.hopf_invariant(i, n, seed)
    u = np.random.default_rng(seed).standard_normal((n, 4))
    dens = topology.hopf_density(i, u, np.random.default_rng(seed + 1))
    stderr = float(np.std(dens) / math.sqrt(n) * 2 * math.pi**2 / (4 * math.pi**2))
    return {"axis": i, "value": value, "uncertainty": stderr, "samples": n, "seed": seed}


def _decimated(c):
    return topology.Curve(c.points[::2], None, c.closed, c.closure_gap)


def cmd_invariants(args, out, err) -> int:
    if not (args.hopf or args.link or args.helicity):
        raise UsageError("invariants: request at least one of --hopf, --link, --helicity")
    payload = {"schema": "knotlight.invariants/1"}
    failed = []
    for i in args.hopf:
        entry = _hopf_payload(i, args.samples, args.seed)
        payload.setdefault("hopf", []).append(entry)
    if len(args.hopf) == 1:
        payload["hopf_invariant"] = payload["hopf"][0]["value"]

    f = _field(args) if (args.link or args.helicity) else None
    if f is not None:
        payload["field"] = f.name

    if args.link:
        cfg = _tracer(args)
        res = _trace_family(f, args.line, args.t, args.link, cfg, err)
        curves = [c for _, c, _ in res]
        entry = {
            "line": args.line,
            "t": args.t,
            "seeds": [list(s) for s in args.link],
            "closed": [bool(c is not None and c.closed) for c in curves],
            "closure_gap": [None if c is None else c.closure_gap for c in curves],
        }
        if all(c is not None and c.closed for c in curves):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", topology.CloseCurvesWarning)
                value = topology.gauss_linking(*curves)
                coarse = topology.gauss_linking(*map(_decimated, curves))
            entry.update(value=value, uncertainty=abs(value - coarse))
            entry["warnings"] = [str(w.message) for w in caught]
            payload["linking_number"] = value
        else:
            msg = "linking needs two closed lines; " + ", ".join(
                f"seed {_fmt_seed(s)} {'failed' if c is None else 'did not close (' + c.meta.get('stop', '') + ')'}"
                for s, c in zip(args.link, curves)
                if c is None or not c.closed
            )
            print(f"error: {msg}", file=err)
            entry["error"] = msg
            failed.append("linking")
        payload["linking"] = entry

    if args.helicity:
        box = _box(args, "xyz")
        n = args.grid
        n_coarse = max(2, int(round(0.75 * n)))
        fine = topology.helicity(f, args.t, GridSpec(box, n))
        coarse = topology.helicity(f, args.t, GridSpec(box, n_coarse))
        payload["helicity"] = {
            "t": args.t,
            "box": box,
            "grid": n,
            "magnetic": fine.magnetic,
            "electric": fine.electric,
            "reference_grid": n_coarse,
            "magnetic_refinement_delta": abs(fine.magnetic - coarse.magnetic),
            "electric_refinement_delta": abs(fine.electric - coarse.electric),
        }
    payload["failed"] = failed
    _emit(payload, out)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_grid(args, out, err) -> int:
    f = _field(args)
    if not str(args.out).lower().endswith(".vtk"):
        raise UsageError("grid: --out must name a .vtk file")
    spec = GridSpec(_box(args, "xyz"), args.grid)
    xs, ys, zs = spec.axes()
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    p = np.stack([np.full(X.shape, args.t), X, Y, Z], axis=-1)
    E, B = eb_extract(rs_form(f, p))
    S = np.cross(E, B)
    try:
        path = export.write_structured_points(
            args.out, spec.origin, spec.spacing, spec.resolution, {"E": E, "B": B, "poynting": S}
        )
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=err)
        return EXIT_FAIL
    _emit(
        {
            "schema": "knotlight.grid/1",
            "field": f.name,
            "t": args.t,
            "points": int(X.size),
            "max_abs_E_dot_B": float(np.max(np.abs(np.sum(E * B, axis=-1)))),
            "out": str(path),
        },
        out,
    )
    return EXIT_OK


def cmd_fibration(args, out, err) -> int:
    axes = (1, 2, 3) if args.axis == "all" else (int(args.axis),)
    paths = {i: topology.hopf_fibers_s3(i, topology.fibration_seeds(i, args.count), args.steps) for i in axes}
    pole = topology.choose_projection_pole([p for ps in paths.values() for p in ps])
    curves = {i: [topology._projected_curve(p, pole, i) for p in ps] for i, ps in paths.items()}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", topology.CloseCurvesWarning)
        links = [
            topology.gauss_linking(a, b)
            for i in axes
            for a, b in itertools.combinations(curves[i], 2)
        ]
    # orthogonality of the three framings on S^3, at every seed
    seeds = np.array([p[0] for ps in paths.values() for p in ps])
    tang = np.stack([frames.invariant_field(FrameSide.LEFT, i, seeds) for i in (1, 2, 3)], axis=1)
    gram = np.einsum("nia,nja->nij", tang, tang)
    ortho = float(np.max(np.abs(gram - np.eye(3))))
    flat = [c for i in axes for c in curves[i]]
    payload = {
        "schema": "knotlight.fibration/1",
        "axes": list(axes),
        "count": args.count,
        "curves": len(flat),
        "projection_pole": np.asarray(pole).tolist(),
        "max_closure_gap": max(c.closure_gap for c in flat),
        "pairwise_linking": {"min": min(links), "max": max(links)} if links else None,
        "frame_orthogonality_residual": ortho,
    }
    if args.out:
        try:
            written = export.write_curves(args.out, flat)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        payload["out"] = [str(p) for p in written]
    _emit(payload, out)
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "trace": cmd_trace,
    "invariants": cmd_invariants,
    "grid": cmd_grid,
    "fibration": cmd_fibration,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_protect_negatives(argv))
        return COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
