"""Command-line entry point: ``gaussent <command> ...``.

Exit codes: 0 success, 1 usage or I/O error, 2 physics precondition failed,
3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings
from pathlib import Path

from . import __version__
from .counting_stats import analyze, read_csv, sample_counts, write_csv
from .errors import (
    ConfigError,
    CutoffTooSmall,
    DataFormatError,
    DomainError,
    GaussEntError,
    HypothesisError,
    HypothesisWarning,
    NotBonaFide,
)
from .fock_oracle import joint_distribution, synthesize_state
from .fock_oracle.checks import ppt_grid, random_physical_states, wick_check
from .gaussian_core import StateClass, ThermalTwoModeState, classify
from .report import ReportDocument
from .witnesses import (
    GridSpec,
    cauchy_schwarz_bounds,
    g2_entanglement_threshold,
    g2_separability_threshold,
    region_grid,
)

EXIT_OK, EXIT_USAGE, EXIT_PHYSICS, EXIT_VALIDATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _pair(text, kind=float):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}")
    try:
        return tuple(kind(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value in {text!r}") from None


def _fix(text):
    name, _, value = text.partition("=")
    if name not in ("n", "theta") or not value:
        raise argparse.ArgumentTypeError("expected n=<value> or theta=<value>")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value {value!r}") from None


def _err(message):
    print(f"gaussent: {message}", file=sys.stderr)


def _fmt(x):
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.10g}"


# -- commands ----------------------------------------------------------------

def cmd_analyze(args) -> int:
    try:
        data = read_csv(args.data)
    except (OSError, DataFormatError, DomainError) as exc:
        _err(f"cannot read {args.data}: {exc}")
        return EXIT_USAGE
    eta = args.eta if args.eta is not None else data.eta
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", HypothesisWarning)
            result = analyze(data, eta=eta, override_thermal=args.override_thermal,
                             replicates=args.bootstrap, seed=args.seed)
    except HypothesisError as exc:
        _err(f"thermal single-mode hypothesis rejected: {exc} (use --override-thermal)")
        return EXIT_PHYSICS
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except GaussEntError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_PHYSICS
    inputs = {"data": Path(args.data).name, "eta": eta, "shots": len(data),
              "bootstrap": args.bootstrap, "seed": args.seed,
              "override_thermal": args.override_thermal}
    doc = ReportDocument.from_analysis(result, inputs)
    try:
        Path(args.out).write_text(doc.to_json(), encoding="utf-8")
    except OSError as exc:
        _err(f"cannot write {args.out}: {exc}")
        return EXIT_USAGE
    for note in doc.warnings:
        _err(f"warning: {note}")
    print(f"class: {doc.state_class}  log_negativity: {_fmt(doc.log_negativity['value'])}  "
          f"witness: {doc.witness['verdict']}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        state = ThermalTwoModeState(args.n1, args.n2, args.mpair, args.mcoh)
    except DomainError as exc:
        _err(str(exc))
        return EXIT_USAGE
    if args.shots < 1 or not (0.0 < args.eta <= 1.0):
        _err(f"need --shots >= 1 and 0 < --eta <= 1, got {args.shots} and {args.eta}")
        return EXIT_USAGE
    nn = args.n1 * args.n2
    if not cauchy_schwarz_bounds(state):
        _err(f"unphysical: Cauchy-Schwarz bound violated (|<a1 a2^dag>|^2 <= n1 n2 = {nn:.6g}, "
             f"|<a1 a2>|^2 <= n1 n2 + min(n1, n2) = {nn + min(args.n1, args.n2):.6g})")
        return EXIT_PHYSICS
    if classify(state) is StateClass.UNPHYSICAL:
        _err("unphysical: the covariance matrix violates the uncertainty principle")
        return EXIT_PHYSICS
    try:
        rho = synthesize_state(state, (args.phase_pair, args.phase_coh), cutoff=args.cutoff,
                               tail_bound=args.tail_bound)
        data = sample_counts(joint_distribution(rho), args.shots, args.eta, args.seed)
    except NotBonaFide as exc:
        _err(f"unphysical: {exc}")
        return EXIT_PHYSICS
    except CutoffTooSmall as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    except (ConfigError, DomainError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    try:
        write_csv(data, args.out)
    except OSError as exc:
        _err(f"cannot write {args.out}: {exc}")
        return EXIT_USAGE
    print(f"cutoff {rho.cutoff}  tail mass {rho.tail_mass:.3e}  shots {len(data)}")
    return EXIT_OK


def cmd_thresholds(args) -> int:
    try:
        g_e = g2_entanglement_threshold(args.n1, args.n2)
        g_s = g2_separability_threshold(args.n1, args.n2)
    except DomainError as exc:
        _err(str(exc))
        return EXIT_USAGE
    tmsv = 2.0 + 1.0 / math.sqrt(args.n1 * args.n2)
    print(f"g2_E = {g_e:.10g}")
    print(f"g2_S = {g_s:.10g}")
    print(f"two-mode squeezed vacuum at n = sqrt(n1 n2) reaches g2_12 = {tmsv:.10g}")
    return EXIT_OK


def cmd_regions(args) -> int:
    name, value = args.fix
    if name == "n":
        x_range, y_range = args.g2_range, args.other_range
    else:
        x_range, y_range = args.other_range, args.g2_range
    try:
        spec = GridSpec(name, value, x_range, y_range, args.resolution)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_USAGE
    cells = region_grid(spec)
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "y", "lambda_minus", "log_negativity", "class"])
    for c in cells:
        writer.writerow([repr(c.x), repr(c.y), _fmt(c.lambda_minus), _fmt(c.log_negativity),
                         str(c.state_class)])
    try:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8", newline="\n")
    except OSError as exc:
        _err(f"cannot write {args.out}: {exc}")
        return EXIT_USAGE
    counts = {cls: sum(c.state_class is cls for c in cells) for cls in StateClass}
    print("  ".join(f"{cls.value}: {k}" for cls, k in counts.items()))
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    states = [ThermalTwoModeState.tmsv(1.0), ThermalTwoModeState.thermal(0.5, 0.3)]
    states += random_physical_states(args.states, seed=args.seed)
    failures = []
    print(f"{'check':<8} {'state / cell':<44} {'error':>11} {'allowed':>11}  ok")
    for state in states:
        res = wick_check(state, cutoff=args.cutoff, tolerance=args.tolerance)
        label = f"n=({state.n1:.3f},{state.n2:.3f}) m=({state.m_pair:.3f},{state.m_coh:.3f})"
        print(f"{'wick':<8} {label:<44} {res.error:>11.3e} {res.tolerance:>11.3e}  "
              f"{'yes' if res.passed else 'NO'}")
        if not res.passed:
            failures.append(f"wick {label}: {res.message or f'error {res.error:.3e}'}")
    for n in args.ppt_populations:
        cells = ppt_grid(n, args.grid_resolution, cutoff=args.cutoff)
        bad = [c for c in cells if not c.agrees]
        print(f"{'ppt':<8} {f'n={n:g}, {len(cells)} cells':<44} {len(bad):>11d} {0:>11d}  "
              f"{'yes' if not bad else 'NO'}")
        for c in bad:
            failures.append(f"ppt n={n:g} g2={c.g2:.6g} theta={c.theta:.6g}: lambda_-="
                            f"{c.lambda_minus:.6g} min eig={c.min_eigenvalue:.3e} {c.message}")
    if failures:
        for f in failures:
            _err(f"violation: {f}")
        return EXIT_VALIDATION
    print("all checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gaussent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="entanglement analysis of recorded counts")
    p.add_argument("--data", required=True)
    p.add_argument("--eta", type=float, default=None,
                   help="detection efficiency (default: sidecar value, else 1)")
    p.add_argument("--override-thermal", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bootstrap", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="sample synthetic counts from a Gaussian state")
    p.add_argument("--n1", type=float, required=True)
    p.add_argument("--n2", type=float, required=True)
    p.add_argument("--mpair", type=float, default=0.0)
    p.add_argument("--mcoh", type=float, default=0.0)
    p.add_argument("--phase-pair", type=float, default=0.0)
    p.add_argument("--phase-coh", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cutoff", type=int, default=None)
    p.add_argument("--tail-bound", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("thresholds", help="two-body witness thresholds")
    p.add_argument("--n1", type=float, required=True)
    p.add_argument("--n2", type=float, required=True)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("regions", help="classification grid as CSV")
    p.add_argument("--fix", type=_fix, required=True, help="n=<value> or theta=<value>")
    p.add_argument("--g2-range", type=_pair, required=True)
    p.add_argument("--other-range", type=_pair, required=True,
                   help="theta range when n is fixed, population range when theta is fixed")
    p.add_argument("--resolution", type=lambda s: _pair(s, int), default=(101, 101))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("oracle-check", help="closed forms against the Fock-space oracle")
    p.add_argument("--grid-resolution", type=int, default=10)
    p.add_argument("--cutoff", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--states", type=int, default=10, help="random states in the Wick sweep")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ppt-populations", type=float, nargs="*", default=[0.3, 0.9])
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
