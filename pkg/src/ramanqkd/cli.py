"""Command line entry point: ``python -m ramanqkd.cli <verb> ...``.

Exit codes: 0 success, 1 invalid scenario or arguments, 2 computation failure.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

from . import fiber as fib
from .classical import (
    FecThreshold, ModulationFormat, PenaltyModel, UnreachableBER, receiver_sensitivity,
)
from .noise import ModelValidityWarning
from .pulse import UnboundedBitrate, gate_capture_at_target, max_quantum_bitrate
from .scenario import ComputationError, LinkScenario, ScenarioError, load_scenario, preset_names
from .sweep import (
    emit_csv, emit_plot_script, format_noise_grid, format_reach, format_table, noise_grid,
    records_to_csv, report_reach, run_sweep,
)

EXIT_OK, EXIT_INVALID, EXIT_COMPUTE = 0, 1, 2


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(args) -> LinkScenario:
    sc = load_scenario(args.scenario)
    if getattr(args, "fiber", None):
        try:
            prof = fib.get_fiber(args.fiber)
        except KeyError as exc:
            raise ScenarioError(str(exc.args[0])) from None
        sc = sc.with_changes({"fiber": {
            "profile": prof.label, "label": prof.label,
            "alpha_db_per_km": prof.alpha_db_per_km, "dispersion_D": prof.dispersion_D,
            "dispersion_slope": prof.dispersion_slope,
            "raman_cross_section": prof.raman_cross_section,
        }, "noise": {"rho_per_km_nm": prof.raman_cross_section}})
    return sc


def _header(sc: LinkScenario) -> str:
    return "".join(f"# {line}\n" for line in sc.dumps().splitlines())


def cmd_sweep(args) -> int:
    sc = _load(args)
    items = [sc, *sc.variants] if args.all_variants else [sc]
    for i, s in enumerate(items):
        recs = run_sweep(s, workers=args.workers)
        out = args.out
        if out and len(items) > 1:
            p = Path(out)
            out = str(p.with_name(f"{p.stem}_{i:02d}_{s.name}{p.suffix}"))
        if args.format == "csv":
            _write(records_to_csv(recs), out)
        else:
            _write(format_table(recs, _header(s)), out)
        if args.plot:
            if not out or args.format != "csv":
                raise ScenarioError("--plot needs --out and --format csv")
            emit_plot_script(recs, Path(out).with_suffix(".py"), out, title=s.name,
                             rsec_thr=s.thresholds.r_sec_bps, qber_thr=s.thresholds.qber)
    return EXIT_OK


def cmd_reach(args) -> int:
    sc = _load(args)
    _write(format_reach(report_reach(sc, workers=args.workers), args.format), args.out)
    return EXIT_OK


def cmd_fmax(args) -> int:
    rows = []
    if args.scenario:
        sc = _load(args)
        for s in (sc, *sc.variants):
            rows.append((s.name, s.fiber.dispersion_D, s.lambda_nm, s.pulse.tau_fraction,
                         s.pulse.gate_fraction, s.f_rep.f_err_target))
    else:
        Ds = args.D or [p.dispersion_D for p in fib.BUILTIN_FIBERS.values()]
        for D in Ds:
            rows.append((f"D={D:g}", D, args.lambda_nm, args.tau_fraction, args.gate_fraction,
                         args.f_err))
    lines = ["name,D_ps_nm_km,length_km,f_err_target,tau_fraction,f_max_ghz,t_isi,dcf_km"]
    for name, D, lam, tf, gf, fe in rows:
        try:
            f = max_quantum_bitrate(D, lam, args.length, fe, tf, gf)
        except UnboundedBitrate:
            f = math.inf
        lines.append(",".join([
            name, repr(D), repr(args.length), repr(fe), repr(tf), f"{f:.6g}",
            f"{gate_capture_at_target(fe, tf, gf):.4f}",
            f"{fib.dcf_length(args.length, D):.4g}",
        ]))
    text = "\n".join(lines) + "\n"
    if args.format == "table":
        text = "\n".join("  ".join(f"{c:>14}" for c in ln.split(",")) for ln in lines) + "\n"
    _write(text, args.out)
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    penalty = PenaltyModel(0.0, 0.0, args.shot_noise) if args.ideal else PenaltyModel(
        args.alpha_n, args.beta, args.shot_noise)
    fmts = [ModulationFormat.parse(f) for f in args.formats] if args.formats else [
        f for f in ModulationFormat if f is not ModulationFormat.OOK]
    lines = ["format,fec,baud_gbaud,rx_sensitivity_dbm"]
    for fmt in fmts:
        for fec in ("hd", "sd"):
            try:
                val = f"{receiver_sensitivity(fmt, FecThreshold.of(fec), penalty, args.baud):.2f}"
            except UnreachableBER:
                val = "unreachable"
            lines.append(f"{fmt.value},{fec},{args.baud:g},{val}")
    text = "\n".join(lines) + "\n"
    if args.format == "table":
        text = "\n".join("  ".join(f"{c:>18}" for c in ln.split(",")) for ln in lines) + "\n"
    _write(text, args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    sc = _load(args)
    _write(sc.dumps(), args.out)
    return EXIT_OK


def cmd_noise_grid(args) -> int:
    sc = _load(args)
    _write(format_noise_grid(noise_grid(sc)), args.out)
    return EXIT_OK


def cmd_presets(args) -> int:
    _write("\n".join(preset_names()) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ramanqkd", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p, scenario_required=True, fmt_default="csv"):
        p.add_argument("--scenario", required=scenario_required,
                       help="scenario TOML path or shipped preset name")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "table"), default=fmt_default)
        p.add_argument("--fiber", help="replace the scenario fiber by a built-in profile")

    p = sub.add_parser("sweep", help="evaluate the link over the length grid")
    common(p)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--plot", action="store_true", help="also write a matplotlib script next to --out")
    p.add_argument("--all-variants", action="store_true", help="sweep every variant too")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reach", help="maximum length meeting the QBER and key-rate thresholds")
    common(p, fmt_default="table")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("fmax", help="dispersion-limited quantum bit rate per fiber")
    common(p, scenario_required=False)
    p.add_argument("--length", type=float, default=300.0)
    p.add_argument("--D", type=float, action="append")
    p.add_argument("--lambda-nm", type=float, default=fib.DEFAULT_WAVELENGTH_NM)
    p.add_argument("--tau-fraction", type=float, default=0.1)
    p.add_argument("--gate-fraction", type=float, default=0.5)
    p.add_argument("--f-err", type=float, default=1e-3)
    p.set_defaults(func=cmd_fmax)

    p = sub.add_parser("sensitivity", help="receiver sensitivity per format and FEC threshold")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "table"), default="csv")
    p.add_argument("--formats", nargs="*")
    p.add_argument("--baud", type=float, default=10.0)
    p.add_argument("--ideal", action="store_true", help="no implementation penalty")
    p.add_argument("--alpha-n", type=float, default=1.07)
    p.add_argument("--beta", type=float, default=0.0075)
    p.add_argument("--shot-noise", type=float, default=-58.5)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("validate", help="check a scenario and print it with defaults resolved")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("noise-grid", help="Raman and dark-count probabilities over length and power")
    common(p)
    p.set_defaults(func=cmd_noise_grid)

    p = sub.add_parser("presets", help="list shipped presets")
    p.add_argument("--out")
    p.set_defaults(func=cmd_presets)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("ignore", RuntimeWarning)
            warnings.simplefilter("always", ModelValidityWarning)
            code = args.func(args)
        clamps = [w for w in caught if issubclass(w.category, ModelValidityWarning)]
        if clamps:
            print(f"warning: {len(clamps)} value(s) clamped, first: {clamps[0].message}",
                  file=sys.stderr)
        return code
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ComputationError, UnreachableBER, ArithmeticError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
