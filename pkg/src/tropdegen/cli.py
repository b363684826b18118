"""Command-line front end.

Subcommands: tropicalize, amoeba, skeleton, limit-measure, toric-check,
rma solve / rma measure.  Every output file embeds the full configuration,
and every run is deterministic given its seed; --threads is a performance
knob only and never changes results.

Exit codes: 0 success, 2 input error, 3 infeasible/diagnostic failure,
4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import amoeba as am
from . import realma as rm
from . import sncmodel as sm
from . import toriclimit as tl
from . import tropical as tr
from .laurent import ParseError, parse_polynomial
from .polyhedral import PolyhedralComplex, as_fraction

EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_NONCONVERGED = 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _write_text(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _json_dump(obj: dict, config: dict) -> str:
    return json.dumps({"config": config, **obj}, indent=2, sort_keys=True) + "\n"


def _csv_dump(header: list[str], rows: list[list], config: dict) -> str:
    lines = ["# config: " + json.dumps(config, sort_keys=True)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_csv_cell(x) for x in row))
    return "\n".join(lines) + "\n"


def _csv_cell(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


# ---------------------------------------------------------------------------
# SVG output (hand-rolled: deterministic, no timestamps)
# ---------------------------------------------------------------------------

def _svg_scene(window, width=640, height=640):
    (x0, x1), (y0, y1) = window

    def to_px(p):
        px = (p[0] - x0) / (x1 - x0) * width
        py = height - (p[1] - y0) / (y1 - y0) * height
        return px, py

    return to_px


def render_svg(
    window,
    cloud_points: np.ndarray | None,
    complex_cells: PolyhedralComplex | None,
    width: int = 640,
    height: int = 640,
) -> str:
    to_px = _svg_scene(window, width, height)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if complex_cells is not None:
        span = max(abs(window[0][1] - window[0][0]), abs(window[1][1] - window[1][0]))
        for cell in complex_cells.cells:
            verts, rays, lines = cell.v_rep()
            vf = [tuple(map(float, v)) for v in verts]
            segs = []
            if len(vf) >= 2:
                for a, b in zip(vf, vf[1:]):
                    segs.append((a, b))
            for v in vf:
                for r in [tuple(map(float, r)) for r in rays]:
                    far = (v[0] + 3 * span * r[0], v[1] + 3 * span * r[1])
                    segs.append((v, far))
                for li in [tuple(map(float, li)) for li in lines]:
                    lo = (v[0] - 3 * span * li[0], v[1] - 3 * span * li[1])
                    hi = (v[0] + 3 * span * li[0], v[1] + 3 * span * li[1])
                    segs.append((lo, hi))
            if len(vf) == 1 and not rays and not lines:
                px, py = to_px(vf[0])
                parts.append(
                    f'<circle cx="{px:.2f}" cy="{py:.2f}" r="4" fill="crimson"/>'
                )
            for a, b in segs:
                pa, pb = to_px(a), to_px(b)
                parts.append(
                    f'<line x1="{pa[0]:.2f}" y1="{pa[1]:.2f}" x2="{pb[0]:.2f}" '
                    f'y2="{pb[1]:.2f}" stroke="crimson" stroke-width="2"/>'
                )
    if cloud_points is not None and len(cloud_points):
        for p in cloud_points:
            px, py = to_px((float(p[0]), float(p[1])))
            if 0 <= px <= width and 0 <= py <= height:
                parts.append(
                    f'<circle cx="{px:.2f}" cy="{py:.2f}" r="1.2" fill="steelblue" '
                    f'fill-opacity="0.5"/>'
                )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# per-command implementations
# ---------------------------------------------------------------------------

def _parse_poly_arg(text: str):
    try:
        return parse_polynomial(text)
    except ParseError as e:
        raise CliError(f"cannot parse polynomial: {e}", EXIT_INPUT)


def _parse_window(text: str, n: int):
    vals = [float(x) for x in text.split(",")]
    if len(vals) != 2 * n:
        raise CliError(f"window needs {2 * n} numbers (lo,hi per coordinate)")
    return [(vals[2 * i], vals[2 * i + 1]) for i in range(n)]


def cmd_tropicalize(args) -> int:
    f = _parse_poly_arg(args.poly)
    trop = tr.trop_from_poly(f)
    cx = tr.tropical_hypersurface(trop)
    config = {"command": "tropicalize", "poly": args.poly}
    _write_text(args.out, _json_dump(
        {"tropical_polynomial": trop.to_json_dict(), "complex": cx.to_json_dict()},
        config,
    ))
    if args.svg:
        if trop.n != 2:
            raise CliError("SVG output is only available for n = 2")
        window = _parse_window(args.window, 2) if args.window else [(-3, 3), (-3, 3)]
        Path(args.svg).write_text(render_svg(window, None, cx))
    return 0


def cmd_amoeba(args) -> int:
    f = _parse_poly_arg(args.poly)
    n = f.nvars
    trop = tr.trop_from_poly(f)
    cx = tr.tropical_hypersurface(trop)
    window = _parse_window(args.window, n) if args.window else [(-3.0, 3.0)] * n
    config = {
        "command": "amoeba",
        "poly": args.poly,
        "window": window,
        "samples": args.samples,
        "seed": args.seed,
        "threads": "ignored-for-results",
    }
    if args.t is None and args.ray is None:
        raise CliError("one of --t or --ray is required")
    if args.t is not None:
        s = _scale_from_arg(args.t)
        config["t"] = args.t
        cloud = am.sample_hypersurface(f, s, args.samples, window, args.seed)
        try:
            dist = am.one_sided_hausdorff(cloud, cx, window)
        except ValueError as e:
            raise CliError(str(e), EXIT_INFEASIBLE)
        rows = [[*map(float, p)] for p in cloud.points]
        header = [f"w{i+1}" for i in range(n)]
        _write_text(args.out, _csv_dump(header, rows, config))
        if args.svg:
            if n != 2:
                raise CliError("SVG output is only available for n = 2")
            Path(args.svg).write_text(render_svg(window, cloud.points, cx))
        sys.stderr.write(
            f"one-sided hausdorff distance inside window: {dist:.6g}\n"
        )
        return 0
    t0, rho, steps = _parse_ray(args.ray)
    config["ray"] = args.ray
    rows = am.convergence_report(
        f, cx, t0, rho, steps, args.samples, window, args.seed
    )
    table = [
        [
            r.abs_t,
            r.eps,
            r.distance if r.distance is not None else "nan",
            r.n_points,
            r.skip_degree_zero,
            r.skip_nonconvergence,
            r.error or "",
        ]
        for r in rows
    ]
    header = ["abs_t", "eps", "distance", "points", "skip_degree", "skip_nonconv", "error"]
    _write_text(args.out, _csv_dump(header, table, config))
    if any(r.error for r in rows):
        return EXIT_INFEASIBLE
    return 0


def _scale_from_arg(text: str) -> am.ScaleFactor:
    try:
        t = complex(text)
    except ValueError:
        raise CliError(f"cannot parse t value {text!r}")
    try:
        return am.ScaleFactor(t)
    except ValueError as e:
        raise CliError(str(e))


def _parse_ray(text: str):
    bits = text.split(",")
    if len(bits) != 3:
        raise CliError("--ray expects t0,rho,steps")
    try:
        return complex(bits[0]), float(bits[1]), int(bits[2])
    except ValueError:
        raise CliError(f"cannot parse ray {text!r}")


def _load_model(path: str) -> sm.SncCombinatorics:
    try:
        return sm.SncCombinatorics.from_json(Path(path).read_text())
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as e:
        raise CliError(f"cannot load model: {e}")


def cmd_skeleton(args) -> int:
    m = _load_model(args.model)
    dc = sm.dual_complex(m)
    k, per = sm.kappa(m)
    ess = sm.essential_complex(m)
    out = {
        "dual_complex": dc.to_json_dict(),
        "kappa": {
            "kappa": str(k),
            "per_component": {lab: str(x) for lab, x in zip(m.labels, per)},
        },
        "essential_complex": ess.to_json_dict(),
    }
    try:
        measures = sm.limit_measure(m, default_mass=args.default_mass)
        out["limit_measure"] = [mm.to_json_dict() for mm in measures]
    except ValueError as e:
        out["limit_measure_error"] = str(e)
    config = {"command": "skeleton", "model": args.model}
    _write_text(args.out, _json_dump(out, config))
    return 0


def cmd_limit_measure(args) -> int:
    m = _load_model(args.model)
    try:
        measures = sm.limit_measure(m, default_mass=args.default_mass)
    except ValueError as e:
        raise CliError(str(e), EXIT_INFEASIBLE)
    config = {"command": "limit-measure", "model": args.model}
    _write_text(
        args.out,
        _json_dump({"limit_measure": [mm.to_json_dict() for mm in measures]}, config),
    )
    return 0


def cmd_toric_check(args) -> int:
    try:
        b = [int(x) for x in args.b.split(",")]
        a = [as_fraction(x) for x in args.a.split(",")]
        d = tl.ToricDegeneration.make(b, a)
    except (ValueError, TypeError) as e:
        raise CliError(f"bad b/a: {e}")
    t0, rho, steps = _parse_ray(args.ray)
    if t0.imag != 0 or t0.real <= 0:
        raise CliError("toric rays use real positive t0")
    ts = [t0.real * rho**k for k in range(steps)]
    config = {
        "command": "toric-check",
        "b": args.b,
        "a": args.a,
        "ray": args.ray,
        "samples": args.samples,
        "seed": args.seed,
    }
    out: dict = {}
    s_ref = am.ScaleFactor(ts[0])
    out["omt_max_relative_deviation"] = tl.verify_omt(
        d, s_ref, trials=args.omt_trials, seed=args.seed
    )
    try:
        fit = tl.mass_asymptotics(d, ts)
    except ValueError as e:
        raise CliError(str(e))
    out["mass_fit"] = fit.to_json_dict()
    if args.samples:
        rep = tl.pushforward_limit(d, am.ScaleFactor(ts[-1]), args.samples, args.seed)
        out["pushforward"] = rep.to_json_dict()
    _write_text(args.out, _json_dump(out, config))
    return 0


def cmd_rma_solve(args) -> int:
    try:
        target = rm.AtomicMeasure.from_json_dict(json.loads(Path(args.target).read_text()))
        bd = json.loads(Path(args.boundary).read_text())
        boundary = [(p["point"], p["value"]) for p in bd["boundary"]]
    except (OSError, json.JSONDecodeError, KeyError, ValueError, TypeError) as e:
        raise CliError(f"cannot load solver input: {e}")
    try:
        f = rm.solve_rma(target, boundary)
    except rm.InfeasibleTargetError as e:
        sys.stderr.write(f"infeasible target: {e} (bound {e.bound})\n")
        return EXIT_INFEASIBLE
    except ValueError as e:
        raise CliError(str(e), EXIT_INFEASIBLE)
    except rm.SolverError as e:
        sys.stderr.write(f"solver did not converge: {e}\n")
        return EXIT_NONCONVERGED
    config = {"command": "rma solve", "target": args.target, "boundary": args.boundary}
    _write_text(args.out, _json_dump({"solution": f.to_json_dict()}, config))
    return 0


def cmd_rma_measure(args) -> int:
    try:
        f = rm.ConvexPLFunction.from_json_dict(json.loads(Path(args.f).read_text()))
    except (OSError, json.JSONDecodeError, KeyError, ValueError, TypeError) as e:
        raise CliError(f"cannot load function: {e}")
    mu = rm.ma_alexandrov(f)
    config = {"command": "rma measure", "f": args.f}
    _write_text(args.out, _json_dump({"measure": mu.to_json_dict()}, config))
    return 0


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tropdegen", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=["json", "csv", "svg"], default=None)
        p.add_argument("--threads", type=int, default=1,
                       help="performance knob; results never depend on it")

    p = sub.add_parser("tropicalize", help="tropical hypersurface of a polynomial")
    p.add_argument("poly")
    p.add_argument("--svg", default=None)
    p.add_argument("--window", default=None)
    common(p)
    p.set_defaults(func=cmd_tropicalize)

    p = sub.add_parser("amoeba", help="sample a rescaled amoeba")
    p.add_argument("poly")
    p.add_argument("--t", default=None)
    p.add_argument("--ray", default=None, help="t0,rho,steps")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--window", default=None)
    p.add_argument("--svg", default=None)
    common(p)
    p.set_defaults(func=cmd_amoeba)

    p = sub.add_parser("skeleton", help="dual complex, kappa, essential complex")
    p.add_argument("model")
    p.add_argument("--default-mass", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_skeleton)

    p = sub.add_parser("limit-measure", help="limit measure of a model")
    p.add_argument("model")
    p.add_argument("--default-mass", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_limit_measure)

    p = sub.add_parser("toric-check", help="toric identities and mass asymptotics")
    p.add_argument("--b", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--ray", required=True, help="t0,rho,steps")
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--omt-trials", type=int, default=100)
    common(p)
    p.set_defaults(func=cmd_toric_check)

    p = sub.add_parser("rma", help="real Monge-Ampere operations")
    rsub = p.add_subparsers(dest="rma_command", required=True)
    ps = rsub.add_parser("solve")
    ps.add_argument("--target", required=True)
    ps.add_argument("--boundary", required=True)
    common(ps)
    ps.set_defaults(func=cmd_rma_solve)
    pm = rsub.add_parser("measure")
    pm.add_argument("--f", required=True)
    common(pm)
    pm.set_defaults(func=cmd_rma_measure)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        sys.stderr.write(f"error: {e}\n")
        return e.code


if __name__ == "__main__":
    sys.exit(main())
