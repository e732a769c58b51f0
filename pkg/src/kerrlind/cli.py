"""Command line entry point.

Exit codes: 0 success, 1 check failed, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigInvalid, KerrLindError, NumericalFailure
from .fock import coherent_state
from .lindblad import ORDERS, assemble_liouvillian, build_model, channel_report, channel_report_csv
from .model import load_config, with_alpha_sq
from .spectral import analyze, minimum_dim

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc


def _order_list(text: str) -> list[str]:
    return [x for x in text.replace(",", " ").split()]


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_sweep(args) -> int:
    from .plotting import plot_lifetimes
    from .sweep import SweepSpec, Tolerances, build_manifest, manifest_json, rows_to_csv, run_sweep, spectra_jsonl

    config = load_config(args.config)
    spec = SweepSpec(args.axis, tuple(args.values), tuple(args.orders), str(args.out), args.jobs)
    tol = Tolerances(max_dim=args.max_dim)
    rows = run_sweep(config, spec, tol)
    out = Path(args.out)
    _write(out, rows_to_csv(rows))
    _write(out.with_suffix(".manifest.json"), manifest_json(build_manifest(config, spec, tol)))
    _write(out.with_suffix(".spectra.jsonl"), spectra_jsonl(rows))
    x = {"alpha_sq": "alpha_sq", "kerr_over_2pi": "kerr_over_2pi_hz", "kappa_2ph": "kappa_2ph_per_us"}[args.axis]
    if not args.no_plot:
        plot_lifetimes(rows, out.with_suffix(".png"), x=x)
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"point {args.axis}={r.value:g} order {r.order} failed: {r.error}", file=sys.stderr)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_figure(args) -> int:
    from .plotting import plot_lifetimes
    from .sweep import FIGURES, Tolerances, manifest_json, reproduce_figure, rows_to_csv, spectra_jsonl

    tol = Tolerances(max_dim=args.max_dim)
    rows, manifest = reproduce_figure(args.name, args.values, args.jobs, tol)
    out = Path(args.out)
    _write(out / f"{args.name}.csv", rows_to_csv(rows))
    _write(out / f"{args.name}.manifest.json", manifest_json(manifest))
    _write(out / f"{args.name}.spectra.jsonl", spectra_jsonl(rows))
    if not args.no_plot:
        plot_lifetimes(rows, out / f"{args.name}.png", title=FIGURES[args.name])
    failed = [r for r in rows if r.error]
    print(f"wrote {args.name} ({len(rows)} rows, {len(failed)} failed) to {out}")
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_check(args) -> int:
    from .sweep import check_coefficients

    report = check_coefficients(load_config(args.config))
    sys.stdout.write(report.text())
    if args.expect_k_hz is not None:
        dev = abs(report.kerr_over_2pi_hz - args.expect_k_hz) / abs(args.expect_k_hz)
        if dev > 0.01:
            print(f"K/2pi deviates from the expected {args.expect_k_hz:g} Hz by {dev:.2%}", file=sys.stderr)
            return EXIT_CHECK
        print(f"K/2pi matches the expected {args.expect_k_hz:g} Hz within {dev:.3%}")
    return EXIT_OK


def cmd_channels(args) -> int:
    config = load_config(args.config)
    a2 = config.alpha_sq if args.alpha_sq is None else args.alpha_sq
    p = with_alpha_sq(config.params, a2)
    rows = channel_report(build_model(p, config.bath, args.order, config.cooling_form), a2)
    text = channel_report_csv(rows)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_dynamics(args) -> int:
    from .dynamics import evolve, fit_tx, x_polarization

    config = load_config(args.config)
    p = with_alpha_sq(config.params, args.alpha_sq)
    model = build_model(p, config.bath, args.order, config.cooling_form)
    dim = args.dim or minimum_dim(args.alpha_sq)
    L = assemble_liouvillian(model, dim, max_dim=args.max_dim)
    alpha = math.sqrt(args.alpha_sq)
    psi = coherent_state(alpha, dim)
    traj = evolve(
        L, np.outer(psi, psi.conj()), args.t_final_us * 1e-6, args.samples,
        observable=lambda rho: x_polarization(rho, alpha), method=args.method,
    )
    _write(Path(args.out), traj.to_csv())
    fitted = fit_tx(traj)
    print(f"fitted T_X = {fitted.fitted_tx * 1e6:.6g} us (relative rms residual {fitted.fit_residual:.2g})")
    if args.compare:
        print(f"spectral T_X = {analyze(L, with_steady_state=False).t_x * 1e6:.6g} us at N = {dim}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    from .lindblad import DEFAULT_MAX_DIM
    from .sweep import AXES, FIGURES, default_jobs

    parser = argparse.ArgumentParser(prog="kerrlind", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="T_X along one parameter axis")
    s.add_argument("--config", required=True)
    s.add_argument("--axis", required=True, choices=AXES)
    s.add_argument("--values", required=True, type=_float_list)
    s.add_argument("--orders", required=True, type=_order_list, help=f"comma list from {ORDERS}")
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=default_jobs())
    s.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    s.add_argument("--no-plot", action="store_true")
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("figure", help="reproduce a built-in figure preset")
    f.add_argument("name", choices=sorted(FIGURES))
    f.add_argument("--out", required=True)
    f.add_argument("--values", type=_float_list, default=None, help="override the |alpha|^2 grid")
    f.add_argument("--jobs", type=int, default=default_jobs())
    f.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    f.add_argument("--no-plot", action="store_true")
    f.set_defaults(func=cmd_figure)

    c = sub.add_parser("check", help="print derived coefficients and order-1 rates")
    c.add_argument("--config", required=True)
    c.add_argument("--expect-k-hz", type=float, default=None)
    c.set_defaults(func=cmd_check)

    ch = sub.add_parser("channels", help="channel report CSV at the config's |alpha|^2")
    ch.add_argument("--config", required=True)
    ch.add_argument("--order", required=True, choices=ORDERS)
    ch.add_argument("--alpha-sq", type=float, default=None)
    ch.add_argument("--out", default=None)
    ch.set_defaults(func=cmd_channels)

    d = sub.add_parser("dynamics", help="integrate from |+alpha> and fit T_X")
    d.add_argument("--config", required=True)
    d.add_argument("--alpha-sq", required=True, type=float)
    d.add_argument("--order", required=True, choices=ORDERS)
    d.add_argument("--t-final-us", required=True, type=float)
    d.add_argument("--out", required=True)
    d.add_argument("--samples", type=int, default=200)
    d.add_argument("--dim", type=int, default=None)
    d.add_argument("--method", choices=("propagator", "rk"), default="propagator")
    d.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    d.add_argument("--compare", action="store_true", help="also print the spectral T_X")
    d.set_defaults(func=cmd_dynamics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except KerrLindError as exc:
        print(f"invalid parameters: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
