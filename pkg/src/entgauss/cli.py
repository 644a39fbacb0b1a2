"""Command-line front end: ``entgauss <subcommand> ...``.

Entropies are read and written in bits unless ``--units nats`` is given.
Exit status is 0 on success, 2 for invalid input (domain errors, bad
arguments, failed preconditions) and 3 when a computation fails to converge
or cannot certify its precision.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (
    UNDERFLOW_FLOOR,
    conditional_entropy,
    conditional_entropy_sweep,
    fit_exponent,
    hxy_lower_bound,
    hxy_lower_bound_best,
    hxy_upper_bound,
)
from .distributions import (
    DiscreteGaussianSpec,
    entropy,
    load_constellation,
    materialize,
    min_distance,
)
from .errors import ConvergenceError, DomainError, PrecisionError
from .extremal import (
    dmin_search,
    duality_check,
    shift_comparison,
    tangent_lemma_check,
    variance_gap,
)
from .solver import (
    d_h_approx,
    from_nats,
    gap_exponent_approx,
    solve,
    solve_shifted,
    threshold_entropy,
    to_nats,
)
from .svgplot import line_plot
from .theta import log_theta

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERIC = 0, 2, 3

FIG1_H_BITS = (0.05, 0.5, 5.0)
FIG1_GRID = "1:1e4:41:log"
FIG5_GRID = "1e-8:16:97:log"
FIGL_GRID = "0.05:4.5:180"
# approximation curves are drawn only well inside their regime
REGIME_FACTOR = 4.0


@dataclass(frozen=True)
class SweepSpec:
    """A one-dimensional sweep ``min:max:count[:log]``."""

    min: float
    max: float
    count: int
    spacing: str = "linear"

    @classmethod
    def parse(cls, text):
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise DomainError(f"grid must be min:max:count[:log], got {text!r}")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise DomainError(f"bad grid {text!r}: {exc}") from exc
        spacing = "linear"
        if len(parts) == 4:
            if parts[3] not in ("log", "linear", "lin"):
                raise DomainError(f"grid spacing must be 'log' or 'linear', got {parts[3]!r}")
            spacing = "log" if parts[3] == "log" else "linear"
        spec = cls(lo, hi, count, spacing)
        spec.validate()
        return spec

    def validate(self):
        if self.count < 2:
            raise DomainError("grid count must be at least 2")
        if not self.min < self.max:
            raise DomainError("grid min must be below max")
        if self.spacing == "log" and not self.min > 0.0:
            raise DomainError("log grid needs a positive minimum")

    def values(self):
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)

    def __str__(self):
        tail = ":log" if self.spacing == "log" else ""
        return f"{self.min:g}:{self.max:g}:{self.count}{tail}"


# ---------------------------------------------------------------- output


def _num(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def render_csv(columns, rows, meta, notes=()):
    buf = io.StringIO()
    for key in sorted(meta):
        buf.write(f"# {key}: {meta[key]}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_num(row.get(c)) for c in columns) + "\n")
    for note in notes:
        buf.write(f"# warning: {note}\n")
    return buf.getvalue()


def render_json(record, meta=None):
    doc = dict(record)
    if meta is not None:
        doc = {"meta": meta, **doc}
    return json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n"


def _write(text, out, suffix=None):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if suffix is not None:
        path = path.with_suffix(suffix)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _meta(args, **extra):
    meta = {"command": args.command, "entgauss_version": __version__}
    for key, value in sorted(vars(args).items()):
        if key in ("func", "command", "out", "format"):
            continue
        if value is None:
            continue
        meta[f"param.{key}"] = value if not isinstance(value, list) else ",".join(map(str, value))
    meta.update(extra)
    return meta


def _emit_record(args, record):
    fmt = args.format or "json"
    if fmt == "svg":
        raise DomainError("--format svg is only available for figure commands")
    if fmt == "json":
        _write(render_json(record, _meta(args)), args.out)
    else:
        cols = list(record)
        _write(render_csv(cols, [record], _meta(args)), args.out)


def _emit_table(args, columns, rows, notes=(), meta_extra=None, plot=None):
    """Write a table as CSV or JSON; with svg also write the CSV beside it."""
    fmt = args.format or "csv"
    meta = _meta(args, **(meta_extra or {}))
    if fmt == "json":
        _write(render_json({"columns": columns, "rows": rows, "warnings": list(notes)}, meta), args.out)
        return
    csv_text = render_csv(columns, rows, meta, notes)
    if fmt == "csv":
        _write(csv_text, args.out)
        return
    if args.out is None:
        raise DomainError("--format svg needs --out")
    if plot is None:
        raise DomainError("this command has no plot")
    _write(plot(), args.out, ".svg")
    _write(csv_text, args.out, ".csv")


def _h_nats(args, value=None):
    v = args.h if value is None else value
    if v is None:
        raise DomainError("--h is required")
    h = to_nats(v, args.units)
    if not (h > 0.0 and math.isfinite(h)):
        raise DomainError(f"entropy must be positive and finite, got {v!r}")
    return h


def _snrs(args):
    if args.snr_grid is not None:
        return SweepSpec.parse(args.snr_grid).values()
    if args.snr is not None:
        return np.array([float(args.snr)])
    raise DomainError("give --snr or --snr-grid")


# ---------------------------------------------------------------- commands


def cmd_solve(args):
    res = solve(_h_nats(args), tol=args.tol or 1e-12)
    rec = res.to_dict(args.units)
    rec["threshold"] = from_nats(threshold_entropy(), args.units)
    _emit_record(args, rec)


def cmd_theta(args):
    t = log_theta(args.lam, args.a, tol=args.tol or 1e-12)
    _emit_record(args, {
        "lambda": t.lam,
        "a": t.shift_a,
        "L": t.L,
        "dL": t.dL,
        "d2L": t.d2L,
        "entropy": from_nats(t.entropy, args.units),
        "variance": t.variance,
        "terms": t.truncation_terms,
        "abs_error_bound": t.abs_error_bound,
        "units": args.units,
    })


_HXY_ENTROPY_COLS = ("H_X", "h_Y", "I_XY", "H_X_given_Y")


def cmd_hxy(args):
    dist = load_constellation(_require_dist(args))
    snrs = _snrs(args)
    evals = conditional_entropy_sweep(dist, snrs, tol=args.tol or 1e-10, workers=args.workers)
    cols = ["snr", "sigma", *_HXY_ENTROPY_COLS, "rel_error_bound", "underflow"]
    rows = []
    for ev in evals:
        d = ev.to_dict(args.units)
        rows.append({c: d[c] for c in cols})
    if len(rows) == 1 and args.snr_grid is None and (args.format or "json") == "json":
        _emit_record(args, {**rows[0], "units": args.units})
    else:
        _emit_table(args, cols, rows, meta_extra={"units": args.units})


def _require_dist(args):
    if args.dist is None:
        raise DomainError("--dist is required")
    return args.dist


def cmd_bounds(args):
    dist = load_constellation(_require_dist(args))
    snr = float(args.snr) if args.snr is not None else None
    if snr is None:
        raise DomainError("--snr is required")
    ev = conditional_entropy(dist, snr, tol=args.tol or 1e-10)
    upper = hxy_upper_bound(dist, snr)
    if args.delta is not None:
        delta = float(args.delta)
        lower = hxy_lower_bound(dist, snr, delta)
    else:
        lower, delta = hxy_lower_bound_best(dist, snr)
    conv = lambda v: from_nats(v, args.units)  # noqa: E731
    _emit_record(args, {
        "snr": snr,
        "units": args.units,
        "lower": conv(lower),
        "value": conv(ev.H_X_given_Y),
        "upper": conv(upper),
        "delta": delta,
        "ordered": bool(lower <= ev.H_X_given_Y <= upper),
        "underflow": ev.underflow,
    })


def cmd_exponent(args):
    dist = load_constellation(_require_dist(args))
    if args.snr_grid is None:
        raise DomainError("--snr-grid is required")
    grid = SweepSpec.parse(args.snr_grid).values()
    fit = fit_exponent(dist, grid, tol=args.tol or 1e-10, workers=args.workers)
    rec = fit.to_dict()
    rec["H_X_given_Y"] = [from_nats(v, args.units) for v in rec["H_X_given_Y"]]
    rec["units"] = args.units
    rec["d_min"] = min_distance(dist)
    _emit_record(args, rec)


def cmd_verify(args):
    h = _h_nats(args)
    report = dmin_search(h, args.atoms, args.trials, args.seed, workers=args.workers)
    var_h, product = duality_check(h)
    var0, var_half = shift_comparison(h)
    slope_f, slope_g = tangent_lemma_check(h)
    log10_gap, log10_rel = variance_gap(h)
    rec = report.to_dict()
    rec["h_target"] = from_nats(h, args.units)
    rec["units"] = args.units
    rec.update({
        "search_ok": bool(report.best_dmin_found <= report.d_h_reference * (1.0 + 1e-3)),
        "var_h": var_h,
        "var_h_times_d_h_squared": product,
        "var_a0": float(var0),
        "var_a_half": float(var_half),
        "log10_var_gap": log10_gap,
        "log10_relative_var_gap": log10_rel,
        "shift_ok": bool(var0 < var_half),
        "slope_f": float(slope_f),
        "slope_g": float(slope_g),
        # both slopes are negative, so |f| < |g| is f > g; compared before rounding
        "tangent_ok": bool(slope_f > slope_g),
    })
    _emit_record(args, rec)


def cmd_fig1(args):
    hs_in = args.h if args.h else list(FIG1_H_BITS if args.units == "bits" else
                                       [to_nats(v, "bits") for v in FIG1_H_BITS])
    snrs = SweepSpec.parse(args.snr_grid or FIG1_GRID).values()
    thr = threshold_entropy()
    cols = ["h", "snr", "H_X_given_Y", "asymptote", "ratio", "approx_small", "approx_large"]
    rows, notes, curves = [], [], []
    for h_in in hs_in:
        h = _h_nats(args, h_in)
        res = solve(h)
        dist = materialize(DiscreteGaussianSpec(res.d_h, res.lambda_h))
        evals = conditional_entropy_sweep(dist, snrs, tol=args.tol or 1e-10, workers=args.workers)
        rate = res.d_h**2 / 8.0
        small = h <= thr / REGIME_FACTOR
        large = h >= thr * REGIME_FACTOR
        xs, ys, ya, yapp = [], [], [], []
        for ev in evals:
            if ev.underflow:
                notes.append(f"h={h_in:g} {args.units} snr={ev.snr!r}: H(X|Y) below {UNDERFLOW_FLOOR:g}, point dropped")
                continue
            asym = math.exp(-ev.snr * rate)
            row = {
                "h": h_in,
                "snr": ev.snr,
                "H_X_given_Y": from_nats(ev.H_X_given_Y, args.units),
                "asymptote": asym,
                "ratio": ev.H_X_given_Y / asym if asym > 0.0 else math.inf,
            }
            if small:
                row["approx_small"] = math.exp(-ev.snr * gap_exponent_approx(h, "small"))
            if large:
                row["approx_large"] = math.exp(-ev.snr * gap_exponent_approx(h, "large"))
            rows.append(row)
            xs.append(ev.snr)
            ys.append(row["H_X_given_Y"])
            ya.append(asym)
            yapp.append(row.get("approx_small", row.get("approx_large")))
        curves.append((h_in, xs, ys, ya, yapp, small or large))
    for h_in in hs_in:
        dropped = sum(1 for n in notes if n.startswith(f"h={h_in:g} "))
        if dropped:
            print(f"warning: h={h_in:g} {args.units}: {dropped} underflowed points dropped",
                  file=sys.stderr)

    def plot():
        series = []
        for h_in, xs, ys, ya, yapp, has_approx in curves:
            series.append((f"H(X|Y), h={h_in:g}", xs, ys))
            series.append((f"exp(-snr d^2/8), h={h_in:g}", xs, ya))
            if has_approx:
                series.append((f"approx, h={h_in:g}", xs, yapp))
        return line_plot(series, title="Conditional entropy of the discrete Gaussian",
                         xlabel="snr", ylabel=f"H(X|Y) [{args.units}]", xlog=True, ylog=True)

    _emit_table(args, cols, rows, notes, {"units": args.units, "snr_grid": args.snr_grid or FIG1_GRID}, plot)


def cmd_fig2(args):
    h = _h_nats(args)
    res = solve(h)
    dist = materialize(DiscreteGaussianSpec(res.d_h, res.lambda_h))
    envelope = res.d_h * np.exp(-0.5 * dist.atoms**2) / math.sqrt(2.0 * math.pi)
    cols = ["index", "atom", "prob", "gaussian_envelope"]
    half = len(dist) // 2
    rows = [
        {"index": k - half, "atom": float(x), "prob": float(p), "gaussian_envelope": float(e)}
        for k, (x, p, e) in enumerate(zip(dist.atoms, dist.probs, envelope))
    ]
    extra = {"units": args.units, "d_h": repr(res.d_h), "lambda_h": repr(res.lambda_h),
             "entropy_check": repr(from_nats(entropy(dist), args.units))}

    def plot():
        xs, ys = [], []
        for x, p in zip(dist.atoms, dist.probs):
            xs += [float(x), float(x), math.nan]
            ys += [0.0, float(p), math.nan]
        return line_plot([("pmf", xs, ys), ("d_h * N(0,1) density", dist.atoms.tolist(), envelope.tolist())],
                         title=f"Discrete Gaussian, h={args.h:g} {args.units}", xlabel="atom", ylabel="probability")

    _emit_table(args, cols, rows, (), extra, plot)


def cmd_fig5(args):
    grid = SweepSpec.parse(args.h_grid or FIG5_GRID)
    cols = ["h", "d_h", "d_h_small_approx", "d_h_large_approx", "lambda_h", "regime"]
    rows = []
    for h_in in grid.values():
        h = _h_nats(args, float(h_in))
        res = solve(h)
        rows.append({
            "h": float(h_in),
            "d_h": res.d_h,
            "d_h_small_approx": d_h_approx(h, "small"),
            "d_h_large_approx": d_h_approx(h, "large"),
            "lambda_h": res.lambda_h,
            "regime": res.regime,
        })

    def plot():
        xs = [r["h"] for r in rows]
        return line_plot(
            [("d_h", xs, [r["d_h"] for r in rows]),
             ("sqrt(log(2/h)/h)", xs, [r["d_h_small_approx"] for r in rows]),
             ("sqrt(2 pi e) exp(-h)", xs, [r["d_h_large_approx"] for r in rows])],
            title="Largest minimum distance", xlabel=f"h [{args.units}]", ylabel="d_h",
            xlog=grid.spacing == "log", ylog=True)

    _emit_table(args, cols, rows, (), {"units": args.units, "h_grid": str(grid)}, plot)


def cmd_figL(args):
    h = _h_nats(args) if args.h is not None else to_nats(0.5, "bits")
    grid = SweepSpec.parse(args.lambda_grid or FIGL_GRID)
    res = solve(h)
    t0 = log_theta(res.lambda_h)
    half = None
    if h > math.log(2.0):
        lam_half, t_half = solve_shifted(h, 0.5)
        half = (lam_half, t_half)
    cols = ["lambda", "L_0", "L_half", "tangent_0", "tangent_half"]
    rows = []
    for lam in grid.values():
        lam = float(lam)
        row = {
            "lambda": lam,
            "L_0": log_theta(lam, 0.0).L,
            "L_half": log_theta(lam, 0.5).L,
            "tangent_0": h + t0.dL * lam,
        }
        # without a tangent the limiting asymptote log 2 - lam/4 is drawn
        row["tangent_half"] = h + half[1].dL * lam if half else math.log(2.0) - 0.25 * lam
        rows.append(row)
    extra = {
        "units": args.units,
        "h_nats": repr(h),
        "lambda_h": repr(res.lambda_h),
        "slope_0": repr(t0.dL),
        "x_intercept_0": repr(h * res.d_h**2),
        "lambda_half": repr(half[0]) if half else "none (h <= log 2; asymptote shown)",
        "slope_half": repr(half[1].dL) if half else repr(-0.25),
    }

    def plot():
        xs = [r["lambda"] for r in rows]
        return line_plot([(c, xs, [r[c] for r in rows]) for c in cols[1:]],
                         title="Lattice potentials and tangents", xlabel="lambda", ylabel="nats")

    _emit_table(args, cols, rows, (), extra, plot)


# ---------------------------------------------------------------- parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--units", choices=("bits", "nats"), default="bits",
                        help="entropy units for input and output (default: bits)")
    common.add_argument("--tol", type=float, default=None, help="target tolerance")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json", "svg"), default=None,
                        help="output format; svg also writes a CSV beside it")
    common.add_argument("--workers", type=int, default=None, help="threads for sweeps")

    p = argparse.ArgumentParser(prog="entgauss", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"entgauss {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="lambda_h and d_h for an entropy")
    s.add_argument("--h", type=float, required=True)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("theta", parents=[common], help="evaluate L_a(lambda)")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--a", type=float, default=0.0, help="lattice shift in [0, 1)")
    s.set_defaults(func=cmd_theta)

    for name, func, helptext in (
        ("hxy", cmd_hxy, "conditional entropy over AWGN"),
        ("bounds", cmd_bounds, "lower bound, value and upper bound of H(X|Y)"),
        ("exponent", cmd_exponent, "fit the high-SNR decay exponent"),
    ):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--dist", help="constellation JSON path, inline JSON, or dgauss:h=<v>[bits|nats]")
        s.add_argument("--snr", type=float)
        s.add_argument("--snr-grid", help="min:max:count[:log]")
        if name == "bounds":
            s.add_argument("--delta", type=float, help="window for the lower bound (default: best on a grid)")
        s.set_defaults(func=func)

    s = sub.add_parser("verify", parents=[common], help="extremal checks at one entropy")
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--atoms", type=int, default=8)
    s.add_argument("--trials", type=int, default=2000)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser(
        "fig1", parents=[common],
        help="H(X|Y) of the discrete Gaussian versus snr",
        description=(
            "H(X|Y) of the discrete Gaussian versus snr with the exp(-snr d_h^2/8) "
            f"asymptote. Default h values {', '.join(map(str, FIG1_H_BITS))} bits. "
            f"The default snr grid {FIG1_GRID} is a chosen range, since the "
            "figure's range is not specified. Approximation columns are filled "
            f"only when h is below threshold/{REGIME_FACTOR:g} or above "
            f"{REGIME_FACTOR:g} x threshold."
        ),
    )
    s.add_argument("--h", type=float, nargs="+", help="entropy values")
    s.add_argument("--snr-grid", help=f"min:max:count[:log] (default {FIG1_GRID})")
    s.set_defaults(func=cmd_fig1)

    s = sub.add_parser("fig2", parents=[common], help="pmf of the discrete Gaussian")
    s.add_argument("--h", type=float, required=True)
    s.set_defaults(func=cmd_fig2)

    s = sub.add_parser("fig5", parents=[common], help="d_h and its approximations versus h")
    s.add_argument("--h-grid", help=f"min:max:count[:log] in --units (default {FIG5_GRID})")
    s.set_defaults(func=cmd_fig5)

    s = sub.add_parser("figL", parents=[common], help="L_0, L_1/2 and tangents versus lambda")
    s.add_argument("--h", type=float, help="tangent intercept (default 0.5 bits)")
    s.add_argument("--lambda-grid", help=f"min:max:count[:log] (default {FIGL_GRID})")
    s.set_defaults(func=cmd_figL)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except DomainError as exc:
        print(f"entgauss: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConvergenceError, PrecisionError) as exc:
        print(f"entgauss: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"entgauss: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
