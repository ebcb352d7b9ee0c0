"""Command-line front end.

Angles cross this boundary in degrees and are converted to unit vectors
immediately; nothing downstream sees an angle.  Numeric JSON output is
printed with 17 significant digits so every value round-trips losslessly.
Exit codes: 0 success, 1 verification failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from . import analysis, mcsim, oracle
from .contact import (
    ConcentricCenters,
    OverlapVerdict,
    closest_approach,
    overlap,
    tangency_residuals,
)
from .geometry import (
    DegenerateShape,
    UnitVec2,
    Vec2,
    ZeroVector,
    make_pair_configuration,
)
from .quartic import NoPhysicalRoot

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INPUT = 2


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def _json17(obj) -> str:
    """JSON with floats at 17 significant digits (lossless round-trip)."""
    if isinstance(obj, float):
        return _f17(obj)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int,)):
        return str(obj)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_json17(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json17(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _add_pair_args(p: argparse.ArgumentParser, with_dhat: bool = True) -> None:
    p.add_argument("--a1", type=float, required=True, help="semi-major axis of ellipse 1")
    p.add_argument("--b1", type=float, required=True, help="semi-minor axis of ellipse 1")
    p.add_argument("--a2", type=float, required=True, help="semi-major axis of ellipse 2")
    p.add_argument("--b2", type=float, required=True, help="semi-minor axis of ellipse 2")
    p.add_argument("--theta1", type=float, default=0.0,
                   help="major-axis angle of ellipse 1, degrees (default 0)")
    p.add_argument("--theta2", type=float, default=0.0,
                   help="major-axis angle of ellipse 2, degrees (default 0)")
    if with_dhat:
        p.add_argument("--theta-d", type=float, default=0.0,
                       help="center-line direction, degrees (default 0)")


def _pair_from_args(args):
    return make_pair_configuration(
        args.a1, args.b1, args.a2, args.b2,
        UnitVec2.from_angle(math.radians(args.theta1)),
        UnitVec2.from_angle(math.radians(args.theta2)),
        UnitVec2.from_angle(math.radians(getattr(args, "theta_d", 0.0))),
    )


def _solution_record(cfg, sol) -> dict:
    r1, r2, cross = tangency_residuals(cfg, sol)
    return {
        "d": sol.d,
        "d_prime": sol.d_prime,
        "q": sol.q,
        "branch": sol.branch.value,
        "contact_point": [sol.contact_point.x, sol.contact_point.y],
        "contact_normal": [sol.contact_normal.x, sol.contact_normal.y],
        "residual_e1": r1,
        "residual_e2": r2,
        "normal_cross": cross,
    }


def _print_record(record: dict, as_json: bool) -> None:
    if as_json:
        print(_json17(record))
        return
    for key, value in record.items():
        if isinstance(value, float):
            print(f"{key:15s} {_f17(value)}")
        elif isinstance(value, list):
            print(f"{key:15s} ({', '.join(_f17(v) for v in value)})")
        else:
            print(f"{key:15s} {value}")


def cmd_distance(args) -> int:
    cfg = _pair_from_args(args)
    sol = closest_approach(cfg)
    _print_record(_solution_record(cfg, sol), args.json)
    return EXIT_OK


def cmd_contact(args) -> int:
    cfg = _pair_from_args(args)
    sol = closest_approach(cfg)
    record = _solution_record(cfg, sol)
    record = {
        "contact_point": record["contact_point"],
        "contact_normal": record["contact_normal"],
        "sin_psi": sol.sin_psi,
        "cos_psi": sol.cos_psi,
        "sin_gamma": sol.sin_gamma,
        "cos_gamma": sol.cos_gamma,
        "d": sol.d,
        "branch": sol.branch.value,
        "residual_e1": record["residual_e1"],
        "residual_e2": record["residual_e2"],
    }
    _print_record(record, args.json)
    return EXIT_OK


def cmd_overlap(args) -> int:
    cfg = _pair_from_args(args)
    r12 = Vec2(
        args.sep * math.cos(math.radians(args.theta_d)),
        args.sep * math.sin(math.radians(args.theta_d)),
    )
    try:
        verdict = overlap(cfg.shape1, cfg.shape2, cfg.k1, cfg.k2, r12)
        d = closest_approach(cfg).d
        record = {"verdict": verdict.value, "separation": args.sep, "d": d}
    except ConcentricCenters:
        record = {"verdict": OverlapVerdict.OVERLAPPING.value, "concentric": True}
    _print_record(record, args.json)
    return EXIT_OK


_BATCH_FIELDS = ("a1", "b1", "a2", "b2", "theta1", "theta2", "theta_d")
_RESULT_FIELDS = (
    "d", "d_prime", "q", "branch", "rc_x", "rc_y", "residual_e1", "residual_e2",
)


def _process_batch_row(row: dict) -> dict:
    cfg = make_pair_configuration(
        float(row["a1"]), float(row["b1"]), float(row["a2"]), float(row["b2"]),
        UnitVec2.from_angle(math.radians(float(row["theta1"]))),
        UnitVec2.from_angle(math.radians(float(row["theta2"]))),
        UnitVec2.from_angle(math.radians(float(row["theta_d"]))),
    )
    sol = closest_approach(cfg)
    r1, r2, _ = tangency_residuals(cfg, sol)
    out = dict(row)
    out.update(
        d=sol.d, d_prime=sol.d_prime, q=sol.q, branch=sol.branch.value,
        rc_x=sol.contact_point.x, rc_y=sol.contact_point.y,
        residual_e1=r1, residual_e2=r2,
    )
    return out


def _iter_batch_rows(path: str, fmt: str):
    """Yield (line_number, row_dict or None, error or None)."""
    if fmt == "jsonl":
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    missing = [k for k in _BATCH_FIELDS if k not in row]
                    if missing:
                        raise KeyError(f"missing fields {missing}")
                    yield lineno, row, None
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    yield lineno, None, str(exc)
        return
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(
            k not in reader.fieldnames for k in _BATCH_FIELDS
        ):
            raise ValueError(
                f"CSV header must contain {', '.join(_BATCH_FIELDS)}"
            )
        for lineno, row in enumerate(reader, 2):  # header is line 1
            yield lineno, row, None


def cmd_batch(args) -> int:
    fmt = args.format
    rejects = open(args.rejects, "w", encoding="utf-8") if args.rejects else sys.stderr
    try:
        rows_out = []
        extra_fields: list[str] = []
        total = rejected = 0
        try:
            row_iter = _iter_batch_rows(args.input, fmt)
            for lineno, row, err in row_iter:
                total += 1
                if err is None:
                    try:
                        out = _process_batch_row(row)
                        rows_out.append(out)
                        for k in row:
                            if k not in _BATCH_FIELDS and k not in extra_fields:
                                extra_fields.append(k)
                        continue
                    except (DegenerateShape, ZeroVector, NoPhysicalRoot,
                            ValueError, KeyError, TypeError) as exc:
                        err = str(exc)
                rejected += 1
                print(f"line {lineno}: {err}", file=rejects)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT

        if fmt == "jsonl":
            with open(args.output, "w", encoding="utf-8") as fh:
                for out in rows_out:
                    fh.write(_json17(out) + "\n")
        else:
            header = list(extra_fields) + list(_BATCH_FIELDS) + list(_RESULT_FIELDS)
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(header)
                for out in rows_out:
                    writer.writerow(
                        [
                            _f17(out[k]) if isinstance(out[k], float) else out.get(k, "")
                            for k in header
                        ]
                    )
        if total and rejected * 2 > total:
            print(f"error: {rejected}/{total} rows rejected", file=sys.stderr)
            return EXIT_INPUT
        return EXIT_OK
    finally:
        if args.rejects:
            rejects.close()


def _scheme_from_name(name: str) -> analysis.QuadratureScheme:
    return {
        "trapezoid": analysis.QuadratureScheme.FIXED_TRAPEZOID,
        "gauss": analysis.QuadratureScheme.GAUSS_LEGENDRE_PANELS,
        "adaptive": analysis.QuadratureScheme.ADAPTIVE_SIMPSON,
    }[name]


def cmd_excluded_area(args) -> int:
    cfg = _pair_from_args(args)
    spec = analysis.QuadratureSpec(
        scheme=_scheme_from_name(args.scheme), panels=args.panels, abs_tol=args.tol
    )

    def area_at(angle_deg: float) -> float:
        k2 = UnitVec2.from_angle(math.radians(args.theta1 + angle_deg))
        return analysis.excluded_area(cfg.shape1, cfg.shape2, cfg.k1, k2, spec)

    if args.sweep:
        try:
            start, stop, step = (float(x) for x in args.sweep.split(":"))
        except ValueError:
            print("error: --sweep expects START:STOP:STEP", file=sys.stderr)
            return EXIT_INPUT
        out = sys.stdout if args.output is None else open(args.output, "w", encoding="utf-8")
        try:
            print("angle_deg,area", file=out)
            angle = start
            while angle <= stop + 1e-12:
                print(f"{_f17(angle)},{_f17(area_at(angle))}", file=out)
                angle += step
        finally:
            if args.output is not None:
                out.close()
        return EXIT_OK

    if args.angle is None:
        # fall back to the orientation difference given by the theta flags
        k2 = UnitVec2.from_angle(math.radians(args.theta2))
        value = analysis.excluded_area(cfg.shape1, cfg.shape2, cfg.k1, k2, spec)
    else:
        value = area_at(args.angle)
    print(_f17(value))
    return EXIT_OK


def _write_curve(
    curve: analysis.LocusCurve, output, angle_label: str, as_json: bool
) -> None:
    out = sys.stdout if output is None else open(output, "w", encoding="utf-8")
    try:
        if as_json:
            payload = {
                "angle_label": angle_label,
                "closed": curve.closed,
                "samples": [
                    [math.degrees(theta), p.x, p.y] for theta, p in curve.samples
                ],
            }
            print(_json17(payload), file=out)
        else:
            print(f"{angle_label},x,y", file=out)
            for theta, p in curve.samples:
                print(
                    f"{_f17(math.degrees(theta))},{_f17(p.x)},{_f17(p.y)}", file=out
                )
    finally:
        if output is not None:
            out.close()


def cmd_boundary(args) -> int:
    cfg = _pair_from_args(args)
    curve = analysis.excluded_boundary(cfg.shape1, cfg.shape2, cfg.k1, cfg.k2, args.n)
    _write_curve(curve, args.output, "theta_d_deg", args.json)
    return EXIT_OK


def cmd_locus(args) -> int:
    cfg = _pair_from_args(args)
    curve = analysis.contact_locus(cfg.shape1, cfg.shape2, cfg.k2, cfg.dhat, args.n)
    _write_curve(curve, args.output, "theta1_deg", args.json)
    return EXIT_OK


def cmd_verify(args) -> int:
    settings = oracle.OracleSettings(boundary_samples=args.samples)
    report = oracle.verify_random(
        trials=args.trials,
        seed=args.seed,
        tolerance=args.tol,
        settings=settings,
        workers=args.workers,
    )
    print(f"trials        {report.trials}")
    print(f"max rel err   {_f17(report.max_rel_err)}")
    print(f"mean rel err  {_f17(report.mean_rel_err)}")
    print(f"root failures {report.root_failures}")
    print(f"failures      {len(report.failures)}")
    for idx, err in report.failures[:20]:
        print(f"  trial {idx}: rel err {_f17(err)}")
    return EXIT_OK if not report.failures else EXIT_VERIFY_FAIL


def cmd_simulate(args) -> int:
    try:
        cfg = mcsim.load_mc_config(args.config)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: bad run configuration: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        with open(args.output, "w", encoding="utf-8") as fh:
            summary = mcsim.run_simulation(cfg, fh, audit=args.audit)
    except mcsim.PackingInfeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(_json17(summary))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ellipse-contact",
        description="Analytic contact distance, overlap and excluded area "
        "for hard ellipses in 2D.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", help="distance of closest approach along a direction")
    _add_pair_args(p)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("contact", help="contact point and normal at tangency")
    _add_pair_args(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_contact)

    p = sub.add_parser("overlap", help="overlap verdict at a given separation")
    _add_pair_args(p)
    p.add_argument("--sep", type=float, required=True, help="center separation")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("batch", help="process a CSV or JSONL file of configurations")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--rejects", default=None,
                   help="write rejected line numbers here instead of stderr")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("excluded-area", help="excluded area at one angle or a sweep")
    _add_pair_args(p, with_dhat=False)
    p.add_argument("--angle", type=float, default=None,
                   help="angle between major axes, degrees")
    p.add_argument("--sweep", default=None, help="START:STOP:STEP angle sweep, degrees")
    p.add_argument("--panels", type=int, default=2048)
    p.add_argument("--scheme", choices=("trapezoid", "gauss", "adaptive"),
                   default="trapezoid")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="absolute tolerance (adaptive scheme)")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_excluded_area)

    p = sub.add_parser("boundary", help="excluded-area boundary curve as CSV")
    _add_pair_args(p, with_dhat=False)
    p.add_argument("--n", type=int, default=720)
    p.add_argument("--output", default=None)
    p.add_argument("--json", action="store_true", help="JSON curve payload")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("locus", help="contact-point locus as ellipse 1 rotates")
    _add_pair_args(p)
    p.add_argument("--n", type=int, default=720)
    p.add_argument("--output", default=None)
    p.add_argument("--json", action="store_true", help="JSON curve payload")
    p.set_defaults(func=cmd_locus)

    p = sub.add_parser("verify", help="compare the kernel against the brute-force oracle")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--samples", type=int, default=4096,
                   help="oracle boundary samples per ellipse")
    p.add_argument("--workers", type=int, default=None,
                   help="process count (default: ELLIPSE_CONTACT_THREADS or 1)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run the hard-ellipse Monte Carlo driver")
    p.add_argument("--config", required=True, help="JSON or key=value run file")
    p.add_argument("--output", required=True, help="trajectory JSONL path")
    p.add_argument("--audit", action="store_true",
                   help="all-pairs overlap audit after every sweep")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DegenerateShape, ZeroVector, ConcentricCenters) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoPhysicalRoot as exc:
        print(f"error: NoPhysicalRoot: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
