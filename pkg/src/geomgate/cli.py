"""Command-line front end.

Exit status: 0 on success, 1 on usage, I/O or parse errors, 2 when a
requested check or golden comparison fails.
"""

import argparse
import csv
import io
import json
import logging
import os
import re
import sys

import numpy as np

from .errors import GeomGateError, ParseError
from .schedule_io import atomic_write, load, save

log = logging.getLogger("geomgate")

EXIT_OK, EXIT_ERROR, EXIT_CHECK = 0, 1, 2
TWO_PI = 2 * np.pi

_SI = {"k": 1e3, "M": 1e6, "G": 1e9}
SCHEME_CHOICES = ("sr-ngqg", "ngqg-p1", "ngqg-p2", "sssp", "dynamical")
GATE_CHOICES = ("x", "y", "x/2", "y/2")
_NEGATIVE = re.compile(r"^-(\d|\.\d)")
PARAM_KEYS = ("omega1_hz", "omega2_hz", "anh1_hz", "anh2_hz", "g12_hz")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def si_float(text):
    """Float with an optional trailing k, M or G multiplier (``"20M"`` -> 2e7)."""
    text = str(text).strip()
    mult = 1.0
    if text and text[-1] in _SI:
        mult = _SI[text[-1]]
        text = text[:-1]
    try:
        return float(text) * mult
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def scheme_name(text):
    return text.upper().replace("-", "_")


def gate_name(text):
    g = text.upper().replace("/2", "_HALF")
    return g.replace("_HALF", "_half")


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _complex_json(m):
    m = np.asarray(m)
    return {"real": m.real.tolist(), "imag": m.imag.tolist()}


def _schedule_from_args(args):
    from .pulses import build_schedule

    if getattr(args, "schedule", None):
        return load(args.schedule)
    if getattr(args, "scheme", None) and getattr(args, "gate", None):
        omega0 = TWO_PI * args.omega0 if getattr(args, "omega0", None) else None
        return build_schedule(scheme_name(args.scheme), gate_name(args.gate), omega0)
    raise UsageError("give --schedule FILE or both --scheme and --gate")


def read_params(path):
    """Device parameters from ``key = value`` lines (Hz, SI suffixes allowed)."""
    from .twoqubit import DeviceParams

    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError("expected key = value", lineno)
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in PARAM_KEYS:
                raise ParseError(f"unknown key {key!r}", lineno, key)
            try:
                values[key] = si_float(val)
            except argparse.ArgumentTypeError as exc:
                raise ParseError(str(exc), lineno, key) from None
    kwargs = {k[:-3]: TWO_PI * v for k, v in values.items()}
    return DeviceParams(**kwargs)


# ---------------------------------------------------------------------------
# commands


def cmd_pulse_build(args):
    sched = _schedule_from_args(args)
    save(sched, args.out)
    print(f"wrote {sched.name} ({len(sched.segments)} segments) to {args.out}")
    return EXIT_OK


def pulse_report(sched):
    """Constraint report: path residuals, dynamical-phase integral, D12/eps."""
    from .geometry import constraint_residual, dynamical_phase_check, path_from_schedule
    from .geometry import robustness_integral

    report = {"name": sched.name, "scheme": sched.scheme, "gate": sched.gate}
    try:
        path = path_from_schedule(sched)
    except (ValueError, GeomGateError):
        path = None
    if path is not None:
        amp_res, ph_res = constraint_residual(path, sched)
        report["amplitude_residual"] = amp_res
        report["phase_residual"] = ph_res
        report["dynamical_phase"] = dynamical_phase_check(path)
    r = robustness_integral(sched)
    report["d12"] = abs(r.d12)
    report["d12_sign"] = r.sign
    return report


def cmd_pulse_check(args):
    sched = _schedule_from_args(args)
    rep = pulse_report(sched)
    failures = []
    if "amplitude_residual" in rep:
        print(f"path amplitude residual   {rep['amplitude_residual']:.3e}  (tol {args.residual_tol:g})")
        print(f"path phase residual       {rep['phase_residual']:.3e} rad  (tol {args.residual_tol:g})")
        print(f"dynamical-phase integral  {rep['dynamical_phase']:+.6f} rad")
        if max(rep["amplitude_residual"], rep["phase_residual"]) > args.residual_tol:
            failures.append("path constraint")
        if sched.scheme != "SSSP" and abs(rep["dynamical_phase"]) > args.residual_tol:
            failures.append("dynamical phase")
    else:
        print("path constraint           n/a (no auxiliary path)")
    print(f"|D12/eps|                 {rep['d12']:.2f} +- {args.d12_tol:.2f}  (sign {rep['d12_sign']:+d})")
    if args.require_super_robust and rep["d12"] > args.d12_tol:
        failures.append("super-robustness")
    if failures:
        print("FAIL: " + ", ".join(failures))
        return EXIT_CHECK
    print("OK")
    return EXIT_OK


def cmd_simulate(args):
    from .core import gate_fidelity
    from .evolution import ErrorModel, evolve
    from .pulses import ideal_gate

    sched = _schedule_from_args(args)
    res = evolve(sched, ErrorModel(args.epsilon), args.steps)
    out = {
        "schedule": sched.name,
        "epsilon": args.epsilon,
        "steps": res.steps,
        "halving_change": res.halving_change,
        "unitarity_defect": res.max_unitarity_defect,
        "unitary": _complex_json(res.final_unitary),
    }
    if sched.gate:
        out["fidelity"] = gate_fidelity(ideal_gate(sched.gate), res.final_unitary)
        print(f"fidelity {out['fidelity']:.12f}")
    if args.out:
        atomic_write(args.out, json.dumps(out, indent=1) + "\n")
    return EXIT_OK


def cmd_sweep(args):
    from .evolution import fidelity_sweep
    from .pulses import ideal_gate

    sched = _schedule_from_args(args)
    if not sched.gate:
        raise UsageError("schedule carries no target gate")
    grid = np.linspace(args.eps_min, args.eps_max, args.points)
    fit = (args.fit_min, args.fit_max) if args.fit_min is not None else None
    res = fidelity_sweep(sched, ideal_gate(sched.gate), grid, fit_range=fit, steps_per_segment=args.steps)
    rows = [(e, f, 1 - f) for e, f in zip(res.epsilons, res.fidelities)]
    atomic_write(args.out, _csv_text(("epsilon", "fidelity", "infidelity"), rows))
    if res.fitted_slope is not None:
        print(f"log-log slope {res.fitted_slope:.3f} over {fit}")
    return EXIT_OK


def _trajectory_rows(sched, epsilon, samples):
    from .geometry import bloch_trajectory, path_from_schedule

    try:
        path = path_from_schedule(sched)
    except (ValueError, GeomGateError):
        path = None
    traj = bloch_trajectory(path, sched, epsilon, samples)
    return [(*row, epsilon) for row in traj]


def cmd_trajectory(args):
    sched = _schedule_from_args(args)
    rows = _trajectory_rows(sched, args.epsilon, args.samples)
    atomic_write(args.out, _csv_text(("t", "x", "y", "z", "epsilon"), rows))
    return EXIT_OK


def _two_qubit_drive(args, params):
    from .twoqubit import calibrate_cz, iswap_drive

    omega0 = TWO_PI * args.omega0
    if args.gate == "iswap":
        return iswap_drive(scheme_name(args.scheme), params, omega0, not args.no_compensation)
    from .twoqubit import cz_drive

    gamma, _ = calibrate_cz(params, omega0)
    return cz_drive(params, omega0, gamma)


def _params(args):
    from .twoqubit import DeviceParams

    return read_params(args.params) if args.params else DeviceParams()


def cmd_two_qubit_simulate(args):
    from .twoqubit import gate_metrics, simulate_two_qubit

    params = _params(args)
    drive = _two_qubit_drive(args, params)
    res = simulate_two_qubit(params, drive, args.frame, trace_samples=args.samples)
    metrics = gate_metrics(res, args.gate)
    for k, v in metrics.items():
        print(f"{k} {v:.10f}")
    pops = np.abs(res.propagators[:, :, args.initial]) ** 2
    labels = [f"p{n1}{n2}" for n1 in range(3) for n2 in range(3)]
    rows = [(t, *p) for t, p in zip(res.times, pops)]
    atomic_write(args.out, _csv_text(("t", *labels), rows))
    unitary_out = args.unitary_out or os.path.splitext(args.out)[0] + ".unitary.json"
    dump = {"frame": "rotating", "gate": args.gate, "metrics": metrics,
            "unitary": _complex_json(res.final_unitary)}
    atomic_write(unitary_out, json.dumps(dump, indent=1) + "\n")
    return EXIT_OK


def cmd_two_qubit_sweep(args):
    from .twoqubit import delta_a_sweep

    params = _params(args)
    args.gate = "iswap"
    drive = _two_qubit_drive(args, params)
    grid = TWO_PI * np.linspace(args.delta_a_min, args.delta_a_max, args.points)
    res = delta_a_sweep(params, drive, grid)
    rows = [(d / TWO_PI, e, f) for d, e, f in zip(res.delta_a, res.equivalent_error, res.fidelities)]
    atomic_write(args.out, _csv_text(("delta_a_hz", "equivalent_error", "fidelity"), rows))
    print(f"fidelity variation {res.variation:.3e}")
    return EXIT_OK


def cmd_qpt(args):
    from .characterize import process_to_average_fidelity, qpt
    from .evolution import ErrorModel, evolve
    from .pulses import ideal_gate

    sched = _schedule_from_args(args)
    u = evolve(sched, ErrorModel(args.epsilon)).final_unitary
    chi = qpt(u, shots=args.shots, seed=args.seed)
    out = {"schedule": sched.name, "epsilon": args.epsilon, "chi": _complex_json(chi.chi)}
    if sched.gate:
        fp = chi.fidelity(ideal_gate(sched.gate))
        out["process_fidelity"] = fp
        out["average_fidelity"] = process_to_average_fidelity(fp)
        print(f"process fidelity {fp:.10f}")
    atomic_write(args.out, json.dumps(out, indent=1) + "\n")
    return EXIT_OK


def cmd_rb(args):
    from .characterize import interleaved_gate_fidelity, rb_run
    from .evolution import evolve
    from .pulses import ideal_gate

    kw = dict(sequences_per_length=args.sequences, seed=args.seed,
              depolarizing_q=args.depolarizing, shots=args.shots)
    ref = rb_run(args.lengths, **kw)
    header = ["length", "survival"]
    cols = [ref.lengths, ref.sequence_fidelities]
    print(f"reference p {ref.decay_p:.6f} +- {ref.p_stderr:.1e}  F_avg {ref.avg_gate_fidelity:.6f}")
    if args.interleave:
        sched = load(args.interleave)
        u = evolve(sched).final_unitary
        inter = rb_run(args.lengths, interleaved=u,
                       interleaved_ideal=ideal_gate(sched.gate) if sched.gate else None, **kw)
        header.append("interleaved_survival")
        cols.append(inter.sequence_fidelities)
        print(f"interleaved p {inter.decay_p:.6f}  gate fidelity "
              f"{interleaved_gate_fidelity(ref, inter):.6f}")
    atomic_write(args.out, _csv_text(header, zip(*cols)))
    return EXIT_OK


def cmd_reproduce(args):
    from . import reproduce as rp

    os.makedirs(args.out_dir, exist_ok=True)
    path = lambda name: os.path.join(args.out_dir, name)
    ok = True
    if args.figure == "table3":
        rows = rp.table3()
        out = []
        for r in rows:
            status = "PASS" if r.passed else "FAIL"
            ok &= r.passed
            print(f"{r.scheme:10s} {r.gate:7s} computed {r.computed:6.3f} (sign {r.sign:+d})  "
                  f"reference {r.reference:+.2f}  tol {r.tolerance:.2f}  {status}")
            out.append((r.scheme, r.gate, r.computed, r.sign, r.reference, r.tolerance, status))
        atomic_write(path("table3.csv"), _csv_text(
            ("scheme", "gate", "d12_abs", "sign", "reference", "tolerance", "status"), out))
    elif args.figure == "fig3":
        curves, slopes = rp.fig3()
        atomic_write(path("fig3_fidelity.csv"), _csv_text(
            ("scheme", "gate", "epsilon", "fidelity"), curves))
        out = []
        for scheme, gate, slope in slopes:
            status = ""
            if scheme in rp.EXPECTED_SLOPES and gate == "X":
                want, tol = rp.EXPECTED_SLOPES[scheme]
                passed = abs(slope - want) <= tol
                ok &= passed
                status = "PASS" if passed else "FAIL"
            print(f"{scheme:10s} {gate:7s} slope {slope:6.3f} {status}")
            out.append((scheme, gate, slope, status))
        atomic_write(path("fig3_slopes.csv"), _csv_text(("scheme", "gate", "slope", "status"), out))
    elif args.figure == "fig1":
        for name, (eps, traj) in rp.fig1().items():
            norms = np.linalg.norm(traj[:, 1:4], axis=1)
            passed = bool(np.all(np.abs(norms - 1) < 1e-10))
            ok &= passed
            rows = [(*row, eps) for row in traj]
            atomic_write(path(f"fig1_{name}.csv"), _csv_text(("t", "x", "y", "z", "epsilon"), rows))
            print(f"{name}: {len(rows)} rows, unit norm {'PASS' if passed else 'FAIL'}")
    elif args.figure == "fig4c":
        out = []
        for scheme, res in rp.fig4c(points=args.points).items():
            passed = res.variation < rp.FIG4C_VARIATION_LIMIT
            ok &= passed
            print(f"{scheme:10s} variation {res.variation:.4%} {'PASS' if passed else 'FAIL'}")
            out += [(scheme, d / TWO_PI, e, f)
                    for d, e, f in zip(res.delta_a, res.equivalent_error, res.fidelities)]
        atomic_write(path("fig4c.csv"), _csv_text(
            ("scheme", "delta_a_hz", "equivalent_error", "fidelity"), out))
    return EXIT_OK if ok else EXIT_CHECK


# ---------------------------------------------------------------------------
# parser


def _schedule_flags(p, required_out=False):
    p.add_argument("--schedule", metavar="FILE", help="schedule file (alternative to --scheme/--gate)")
    p.add_argument("--scheme", choices=SCHEME_CHOICES, help="built-in scheme")
    p.add_argument("--gate", type=str.lower, choices=GATE_CHOICES, help="target gate")
    p.add_argument("--omega0", type=si_float, metavar="HZ",
                   help="peak Rabi frequency Omega0/2pi in Hz (default 10M)")


def build_parser():
    parser = _Parser(prog="geomgate", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pulse = sub.add_parser("pulse", help="build or check pulse schedules")
    psub = pulse.add_subparsers(dest="action", required=True, parser_class=_Parser)
    b = psub.add_parser("build", help="write a schedule file")
    _schedule_flags(b)
    b.add_argument("--out", required=True, metavar="FILE", help="output schedule file")
    b.set_defaults(func=cmd_pulse_build)
    c = psub.add_parser("check", help="report path constraints and D12/eps")
    _schedule_flags(c)
    c.add_argument("--require-super-robust", action="store_true",
                   help="fail unless |D12/eps| is within --d12-tol of 0")
    c.add_argument("--d12-tol", type=float, default=0.02, help="tolerance on |D12/eps| (dimensionless)")
    c.add_argument("--residual-tol", type=float, default=1e-6,
                   help="tolerance on path residuals (rad, units of Omega0) and dynamical phase (rad)")
    c.set_defaults(func=cmd_pulse_check)

    s = sub.add_parser("simulate", help="evolve one schedule under a Rabi error")
    _schedule_flags(s)
    s.add_argument("--epsilon", type=float, default=0.0, help="relative Rabi error (dimensionless)")
    s.add_argument("--steps", type=int, default=4096, help="steps per segment")
    s.add_argument("--out", metavar="FILE", help="JSON with the final unitary and fidelity")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="fidelity against Rabi error")
    _schedule_flags(w)
    w.add_argument("--eps-min", type=float, default=-0.2, help="lowest relative Rabi error")
    w.add_argument("--eps-max", type=float, default=0.2, help="highest relative Rabi error")
    w.add_argument("--points", type=int, default=41, help="grid points")
    w.add_argument("--fit-min", type=float, help="lower end of the log-log fit range (epsilon)")
    w.add_argument("--fit-max", type=float, help="upper end of the log-log fit range (epsilon)")
    w.add_argument("--steps", type=int, default=4096, help="steps per segment")
    w.add_argument("--out", required=True, metavar="FILE", help="CSV: epsilon, fidelity, infidelity")
    w.set_defaults(func=cmd_sweep)

    t = sub.add_parser("trajectory", help="Bloch trajectory of the first auxiliary state")
    _schedule_flags(t)
    t.add_argument("--epsilon", type=float, default=0.0, help="relative Rabi error")
    t.add_argument("--samples", type=int, default=201, help="time samples")
    t.add_argument("--out", required=True, metavar="FILE", help="CSV: t, x, y, z, epsilon (t in 1/Omega0)")
    t.set_defaults(func=cmd_trajectory)

    two = sub.add_parser("two-qubit", help="parametric two-transmon gates")
    tsub = two.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, helptext in (("simulate", "simulate iSWAP or CZ"), ("sweep", "iSWAP fidelity against dA")):
        p = tsub.add_parser(name, help=helptext)
        p.add_argument("--params", metavar="FILE",
                       help="device file with keys " + ", ".join(PARAM_KEYS) + " (Hz, SI suffixes)")
        p.add_argument("--scheme", choices=SCHEME_CHOICES, default="sr-ngqg",
                       help="single-qubit X schedule the iSWAP is built from")
        p.add_argument("--omega0", type=si_float, default=20e6, metavar="HZ",
                       help="effective peak rate Omega0/2pi in Hz (default 20M)")
        p.add_argument("--no-compensation", action="store_true", help="skip phase compensation")
    ts = tsub.choices["simulate"]
    ts.add_argument("--gate", choices=("iswap", "cz"), default="iswap", help="target gate")
    ts.add_argument("--frame", choices=("rotating", "lab"), default="rotating", help="integration frame")
    ts.add_argument("--samples", type=int, default=200, help="trace samples")
    ts.add_argument("--initial", type=int, default=1, help="initial basis index 3*n1+n2 (default |01>)")
    ts.add_argument("--out", required=True, metavar="FILE", help="CSV: t (s), then 9 populations")
    ts.add_argument("--unitary-out", metavar="FILE", help="JSON unitary dump (default: --out stem + .unitary.json)")
    ts.set_defaults(func=cmd_two_qubit_simulate)
    tw = tsub.choices["sweep"]
    tw.add_argument("--delta-a-min", type=si_float, required=True, metavar="HZ",
                    help="lowest amplitude offset dA/2pi in Hz")
    tw.add_argument("--delta-a-max", type=si_float, required=True, metavar="HZ",
                    help="highest amplitude offset dA/2pi in Hz")
    tw.add_argument("--points", type=int, default=11, help="grid points")
    tw.add_argument("--out", required=True, metavar="FILE", help="CSV: delta_a_hz, equivalent_error, fidelity")
    tw.set_defaults(func=cmd_two_qubit_sweep)

    q = sub.add_parser("qpt", help="simulated process tomography of a schedule")
    _schedule_flags(q)
    q.add_argument("--epsilon", type=float, default=0.0, help="relative Rabi error")
    q.add_argument("--shots", type=int, help="measurement shots per setting (default exact)")
    q.add_argument("--seed", type=int, default=0, help="sampling seed")
    q.add_argument("--out", required=True, metavar="FILE", help="JSON with chi as real/imag arrays")
    q.set_defaults(func=cmd_qpt)

    r = sub.add_parser("rb", help="single-qubit randomized benchmarking")
    r.add_argument("--lengths", type=int_list, default=int_list("1,2,4,8,16,32,64,128"),
                   help="comma-separated sequence lengths (Cliffords)")
    r.add_argument("--sequences", type=int, default=50, help="random sequences per length")
    r.add_argument("--seed", type=int, default=0, help="seed")
    r.add_argument("--depolarizing", type=float, default=0.0, help="depolarizing probability per Clifford")
    r.add_argument("--shots", type=int, help="shots per sequence (default exact)")
    r.add_argument("--interleave", metavar="FILE", help="schedule file of a gate to interleave")
    r.add_argument("--out", required=True, metavar="FILE", help="CSV: length, survival[, interleaved_survival]")
    r.set_defaults(func=cmd_rb)

    rp = sub.add_parser("reproduce", help="datasets for the robustness table and figures")
    rp.add_argument("figure", choices=("table3", "fig1", "fig3", "fig4c"), help="dataset")
    rp.add_argument("--out-dir", default=".", metavar="DIR", help="output directory")
    rp.add_argument("--points", type=int, default=11, help="dA grid points (fig4c)")
    rp.set_defaults(func=cmd_reproduce)
    return parser


def _join_negative_values(argv):
    # "--flag -5M" -> "--flag=-5M" so negative SI values are not read as options
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_values(argv))
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"geomgate: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ParseError as exc:
        print(f"geomgate: parse error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"geomgate: I/O error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except GeomGateError as exc:
        print(f"geomgate: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
