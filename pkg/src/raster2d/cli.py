"""Command-line front end.

Every subcommand writes plain data files (JSON, CSV, PGM). Exit status is
0 on success, 2 when a schedule violates a constraint and 1 on usage or
parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import budget, compiler, device_model as dm, oracle, render, shuttle
from .config import load_device
from .exceptions import Raster2DError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONSTRAINT = 2

DEFAULT_DEVICE = "brimrose_ted150"
DEFAULT_ALPHA = 3.6e13


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def write_atomic(path, data) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text) -> None:
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _device(args):
    device = load_device(args.device)
    if getattr(args, "measured_waist", False):
        device = device.with_measured_waist()
    return device


# --- model ----------------------------------------------------------------


def model_report(device: dm.DeviceSpec, alpha: float = DEFAULT_ALPHA) -> str:
    beam, aod = device.beam, device.aod
    t1, t2 = device.access_time_single, device.access_time_daod
    full = aod.full_bandwidth_dF
    n1 = dm.static_resolution(t1, full, 1)
    n2 = dm.static_resolution(t1, full, 2)
    vm = dm.vipa_metrics(device.fast_axis)
    f_aod = dm.acoustic_focal_length(beam, aod, alpha)
    shift = dm.focal_shift(device.relay.objective_focal_f_obj, f_aod)
    lines = [
        f"device {device.name}",
        f"waist w0 = {beam.waist_w0 * 1e3:.4g} mm",
        f"access time single = {t1 * 1e9:.1f} ns (nominal, w0 from config)",
        f"access time DAOD = {t2 * 1e9:.1f} ns",
        f"access time ratio single/DAOD = {t1 / t2:.3f} (model)",
    ]
    m = device.measured
    if m.access_time_single:
        measured = device.with_measured_waist()
        lines.append(f"access time single = {measured.access_time_single * 1e9:.1f} ns "
                     f"(measured-waist variant, w0 = {measured.beam.waist_w0 * 1e3:.4g} mm)")
    if m.access_time_ratio:
        lines.append(f"deviation: measured ratio single/DAOD = {m.access_time_ratio:.2f} "
                     f"({m.access_time_single * 1e9:.0f} ns / {m.access_time_daod * 1e9:.0f} ns) "
                     f"vs model 2.000")
    lines += [
        f"static resolution single = {n1:.2f} (full {full / 1e6:g} MHz band)",
        f"static resolution DAOD = {n2:.2f}",
        f"static resolution single/DAOD with usable {aod.usable_bandwidth / 1e6:g} MHz = "
        f"{device.static_resolution(1):.2f} / {device.static_resolution(2):.2f}",
        f"quoted 33 / 66 correspond to T_a = "
        f"{33 / (math.pi / 4 * full) * 1e9:.0f} ns at full band",
        f"deflection range = {dm.deflection_range(beam, aod) * 1e3:.3f} mrad (single, full band)",
        f"VIPA resolution = {vm.resolution:.2f}",
        f"VIPA switch time = {vm.switch_time * 1e9:.3f} ns",
    ]
    if m.t_fast:
        lines.append(f"measured switch time = {m.t_fast * 1e9:.1f} ns (detector limited)")
    if math.isinf(f_aod):
        lines.append(f"acoustic focal length at alpha={alpha:g} Hz/s = no-lens")
    else:
        lines.append(f"acoustic focal length at alpha={alpha:g} Hz/s = {f_aod:.4g} m")
        lines.append(f"focal shift (f_obj = {device.relay.objective_focal_f_obj * 1e3:g} mm) = "
                     f"{shift * 1e3:.4g} mm")
    return "\n".join(lines) + "\n"


def cmd_model(args) -> int:
    _emit(args, model_report(_device(args), args.alpha_hz_per_s))
    return EXIT_OK


# --- resolve / oracle -----------------------------------------------------

RESOLVE_COLUMNS = ("t_scan_s", "n_dyn_aod", "n_dyn_daod", "n_dyn_oracle_aod", "n_dyn_oracle_daod")


def resolve_rows(device, t_scans, with_oracle=True, t_samples=64):
    rows = []
    for t_scan in t_scans:
        row = [t_scan, device.dynamic_resolution(t_scan, 1), device.dynamic_resolution(t_scan, 2)]
        if with_oracle:
            chirp = dm.ChirpScan.centered(device.aod, t_scan)
            for n in (1, 2):
                tr = oracle.knife_edge_trace(device, chirp, t_samples, n)
                row.append(tr.dynamic_resolution)
        else:
            row += ["", ""]
        rows.append(row)
    return rows


def cmd_resolve(args) -> int:
    device = _device(args)
    t_scans = [t * 1e-6 for t in args.t_scan_us]
    if not t_scans:
        raise argparse.ArgumentTypeError("need at least one scan time")
    _emit(args, _csv(RESOLVE_COLUMNS, resolve_rows(device, t_scans, not args.no_oracle)))
    return EXIT_OK


def cmd_oracle(args) -> int:
    device = _device(args)
    points = oracle.oracle_sweep(device, args.alphas, sample_count=args.samples,
                                 workers=args.workers)
    rows = [[getattr(p, c) for c in oracle.SWEEP_COLUMNS] for p in points]
    _emit(args, _csv(oracle.SWEEP_COLUMNS, rows))
    return EXIT_OK


# --- compile / validate ---------------------------------------------------


def cmd_compile(args) -> int:
    device = _device(args)
    pattern = compiler.load_pattern(args.pattern)
    retrace = None if args.retrace_ns is None else args.retrace_ns * 1e-9
    sched = compiler.compile_pattern(pattern, device, args.t_scan_us * 1e-6, retrace)
    _emit(args, sched.to_json())
    tr = compiler.timing_report(sched, device)
    print(f"compiled {sched.n_cols}x{sched.n_rows}: refresh {tr.refresh_rate / 1e6:.4g} MHz, "
          f"dwell {tr.column_dwell * 1e9:.4g} ns, duty {tr.duty:.3f}", file=sys.stderr)
    return EXIT_OK


def _constraints(args):
    return compiler.ShuttleConstraints(
        f_trap=args.f_trap_hz,
        heating_margin=args.heating_margin,
        step_max=args.step_nm * 1e-9,
        t_fast=None if args.t_fast_ns is None else args.t_fast_ns * 1e-9,
    )


def cmd_validate(args) -> int:
    device = _device(args)
    sched = compiler.load_schedule(args.schedule)
    sched.check_windows(tol=1e-12)
    report = compiler.validate(sched, device, _constraints(args))
    if args.out:
        write_atomic(args.out, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    print(report.format())
    return EXIT_OK if report.passed else EXIT_CONSTRAINT


# --- shuttle --------------------------------------------------------------


def cmd_plan(args) -> int:
    device = _device(args)
    cap = shuttle.DeviceCapability.from_device(device, shuttle.Model(args.model))
    sched = shuttle.plan_moves(shuttle.load_atoms(args.initial), shuttle.load_atoms(args.target),
                               cap, _constraints(args))
    if args.out:
        write_atomic(args.out, json.dumps(sched.to_dict(), sort_keys=True) + "\n")
    s = sched.summary()
    print(f"model={s['model']} cycles={s['cycles']} groups={s['groups']} "
          f"total_time_us={s['total_time_us']:.6g} "
          f"addressing_overhead_ns={s['addressing_overhead_per_cycle_ns']:.6g}")
    return EXIT_OK


def cmd_plan_bench(args) -> int:
    rows = shuttle.plan_bench(args.n, args.trials, args.seed)
    cols = ("n_atoms", "trial", "time_crossed_s", "time_daod_vipa_s", "speedup")
    _emit(args, _csv(cols, [[getattr(r, c) for c in cols] for r in rows]))
    print(f"speedup slope vs N: {shuttle.speedup_slope(rows):.3f}", file=sys.stderr)
    return EXIT_OK


# --- budget / render ------------------------------------------------------


def cmd_budget(args) -> int:
    chain = budget.load_chain(args.chain)
    _emit(args, budget.format_budget(chain, args.input_power_w) + "\n")
    return EXIT_OK


def cmd_render(args) -> int:
    device = _device(args)
    pattern = compiler.load_pattern(args.pattern)
    t_scan = device.raster_period if args.t_scan_us is None else args.t_scan_us * 1e-6
    cols = compiler.slow_axis_capacity(device, t_scan)
    rows = compiler.fast_axis_capacity(device)
    if pattern.n_cols > math.floor(cols):
        raise compiler.ResolutionExceededError("slow", pattern.n_cols, cols)
    if pattern.n_rows > math.floor(rows):
        raise compiler.ResolutionExceededError("fast", pattern.n_rows, rows)
    img = render.render_pattern(pattern, args.pitch_um * 1e-6, args.pitch_um * 1e-6,
                                args.wx_um * 1e-6, args.wy_um * 1e-6, args.pixel_um * 1e-6)
    comments = [f"{pattern.n_cols}x{pattern.n_rows} pattern, pitch {args.pitch_um:g} um, "
                f"w_x {args.wx_um:g} um, w_y {args.wy_um:g} um, pixel {args.pixel_um:g} um"]
    if args.annotate_edge_rows:
        comments.append(render.EDGE_ROW_NOTE)
    data = render.pgm_bytes(render.to_gray(img), comments)
    if args.out:
        write_atomic(args.out, data)
    else:
        sys.stdout.buffer.write(data)
    return EXIT_OK


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--device", default=DEFAULT_DEVICE,
                        help="device JSON file or bundled name (default %(default)s)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--seed", type=int, default=7, help="RNG seed (default %(default)s)")
    common.add_argument("--measured-waist", action="store_true",
                        help="set w0 from the measured single-AOD access time")

    limits = _Parser(add_help=False)
    limits.add_argument("--f-trap-hz", type=float, default=50e3)
    limits.add_argument("--heating-margin", type=float, default=10.0)
    limits.add_argument("--step-nm", type=float, default=100.0)
    limits.add_argument("--t-fast-ns", type=float, default=None)

    p = _Parser(prog="raster2d", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("model", parents=[common], help="closed-form device figures")
    s.add_argument("--alpha-hz-per-s", type=float, default=DEFAULT_ALPHA)
    s.set_defaults(func=cmd_model)

    s = sub.add_parser("resolve", parents=[common], help="dynamic resolution vs scan time (CSV)")
    s.add_argument("--t-scan-us", type=_floats, default=[0.3, 0.5, 1.0, 2.0, 5.0, 10.0])
    s.add_argument("--no-oracle", action="store_true")
    s.set_defaults(func=cmd_resolve)

    s = sub.add_parser("oracle", parents=[common], help="wave-optics sweep over chirp rate (CSV)")
    s.add_argument("--alphas", type=_floats, default=[0.0, 1e12, 3e12, 1e13, 3e13])
    s.add_argument("--samples", type=int, default=oracle.DEFAULT_SAMPLES)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("compile", parents=[common], help="pattern -> drive schedule JSON")
    s.add_argument("--pattern", required=True)
    s.add_argument("--t-scan-us", type=float, default=1.0)
    s.add_argument("--retrace-ns", type=float, default=None,
                   help="dead time between sweeps (default: one access time)")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("validate", parents=[common, limits], help="check a schedule")
    s.add_argument("--schedule", required=True)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("plan", parents=[common, limits], help="plan parallel atom moves")
    s.add_argument("--initial", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--model", default="daod_vipa", choices=[m.value for m in shuttle.Model])
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("plan-bench", parents=[common], help="crossed-AOD vs DAOD-VIPA speedup CSV")
    s.add_argument("--n", type=_ints, default=[4, 8, 16, 32])
    s.add_argument("--trials", type=int, default=50)
    s.set_defaults(func=cmd_plan_bench)

    s = sub.add_parser("budget", parents=[common], help="efficiency chain table")
    s.add_argument("--chain", default="current")
    s.add_argument("--input-power-w", type=float, default=None)
    s.set_defaults(func=cmd_budget)

    s = sub.add_parser("render", parents=[common], help="expected image as PGM")
    s.add_argument("--pattern", required=True)
    s.add_argument("--pitch-um", type=float, default=30.0)
    s.add_argument("--wx-um", type=float, default=15.0)
    s.add_argument("--wy-um", type=float, default=11.3)
    s.add_argument("--pixel-um", type=float, default=1.0)
    s.add_argument("--t-scan-us", type=float, default=None)
    s.add_argument("--annotate-edge-rows", action="store_true")
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (Raster2DError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"raster2d {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
