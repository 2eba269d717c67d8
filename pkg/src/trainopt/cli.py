"""Command-line front end.

Subcommands:
  pilot-opt       optimal pilot fraction for one scenario
  pilot-sweep     sweep one parameter, emit the fixed-header CSV
  comsens-design  run the cyclic training-pair design, write result files
  comsens-verify  load a sequence pair, emit its correlation report
  radar-range     sensing-range calculator

SNR is accepted in dB and distances in km at this boundary only; the
library works in linear SNR and SI units. A key = value config file
(INI sections named after the subcommands) may supply any flag;
explicit flags override file values. Every output file starts with header
comments recording the tool version, the full resolved configuration, and
the seed, so identical invocations produce byte-identical files.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from pathlib import Path

from . import __version__
from .comsens_design import (CORRELATION_CSV_HEADER, correlation_report,
                             design, write_design_files)
from .comsens_model import (ComsensSettings, TrainingPair, build_problem,
                            correlation, load_matrix_text)
from .errors import TrainoptError
from .fading import Fading, PilotScenario
from .pilot_opt import (AlphaMode, SweepSpec, format_number, optimize_alpha,
                        run_sweep, write_sweep_csv)
from .radar import RadarScenario, max_sensing_range

PILOT_OPT_CSV_HEADER = ("alpha_opt,alpha_baseline,rate_opt,rate_at_baseline,"
                        "gain_percent,clamped_flag")

_TRUE_WORDS = {"1", "true", "yes", "on"}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _apply_config_file(argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except TrainoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trainopt",
                                     description="training-overhead optimization "
                                                 "and joint comm/sensing design")
    parser.add_argument("--version", action="version", version=f"trainopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file (INI sections)")
        p.add_argument("--seed", type=int, default=1, help="64-bit RNG seed")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("pilot-opt", help="optimal pilot fraction for one scenario")
    common(p)
    p.add_argument("--n", type=int, required=True, help="packet length in symbols")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--fading", choices=[f.value for f in Fading], default="block")
    p.add_argument("--f-d", type=float, default=0.0, help="normalized Doppler")
    p.add_argument("--alpha-mode", choices=[m.value for m in AlphaMode],
                   default="continuous")
    p.add_argument("--format", choices=["csv", "pretty"], default="pretty")
    p.set_defaults(handler=_cmd_pilot_opt)

    p = sub.add_parser("pilot-sweep", help="sweep one parameter over a grid")
    common(p)
    p.add_argument("--param", choices=["epsilon", "n", "snr_db", "f_d"], required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated grid, strictly monotone")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--fading", choices=[f.value for f in Fading], default="block")
    p.add_argument("--f-d", type=float, default=0.0)
    p.add_argument("--alpha-mode", choices=[m.value for m in AlphaMode],
                   default="continuous")
    p.add_argument("--format", choices=["csv", "pretty"], default="csv")
    p.set_defaults(handler=_cmd_pilot_sweep)

    p = sub.add_parser("comsens-design", help="cyclic training-pair design")
    common(p)
    p.add_argument("--b", type=int, default=8, help="training symbols per antenna")
    p.add_argument("--n-t", type=int, default=4)
    p.add_argument("--n-r", type=int, default=4)
    p.add_argument("--k", type=int, default=4, help="correlation-zone lag count")
    p.add_argument("--eps-corr", type=float, default=1e-5)
    p.add_argument("--eta", type=float, default=1e-6)
    p.add_argument("--mu", type=int, default=20)
    p.add_argument("--max-outer", type=int, default=500)
    p.add_argument("--rho-rt", type=float, default=0.91)
    p.add_argument("--rho-rr", type=float, default=0.60)
    p.add_argument("--rho-mt", type=float, default=0.80)
    p.add_argument("--theta-rt", type=float, default=0.83 * math.pi)
    p.add_argument("--theta-rr", type=float, default=0.42 * math.pi)
    p.add_argument("--theta-mt", type=float, default=0.53 * math.pi)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=_cmd_comsens_design)

    p = sub.add_parser("comsens-verify", help="correlation report for a stored pair")
    common(p)
    p.add_argument("--x", required=True, help="downlink sequence file")
    p.add_argument("--y", required=True, help="uplink sequence file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, default=1e-4, help="in-zone tolerance")
    p.set_defaults(handler=_cmd_comsens_verify)

    p = sub.add_parser("radar-range", help="sensing-range calculator")
    common(p)
    p.add_argument("--d-user-km", type=float, required=True)
    p.add_argument("--symbol-us", type=float, required=True)
    p.add_argument("--tproc-symbols", type=float, default=0.0)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--wave-speed", type=float, default=3.0e8)
    p.add_argument("--d-object-km", type=float, default=None)
    p.set_defaults(handler=_cmd_radar_range)

    return parser


def _apply_config_file(argv: list[str]) -> list[str]:
    """Expand --config FILE into flags inserted right after the subcommand,
    so explicit command-line flags (parsed later) override file values."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv
    path = argv[idx + 1]
    command = next((a for a in argv if not a.startswith("-")), None)
    if command is None:
        return argv
    cfg = configparser.ConfigParser()
    with open(path) as fh:
        cfg.read_file(fh)
    if not cfg.has_section(command):
        return argv
    extra: list[str] = []
    for key, value in cfg.items(command):
        flag = "--" + key.replace("_", "-")
        extra.extend([flag, value])
    pos = argv.index(command) + 1
    return argv[:pos] + extra + argv[pos:]


def _header_lines(args, exclude=("handler", "config", "out", "out_dir")) -> list[str]:
    resolved = {k: v for k, v in sorted(vars(args).items())
                if k not in exclude and v is not None}
    config = " ".join(f"{k}={v!r}" for k, v in resolved.items() if k != "seed")
    return [f"trainopt {__version__}", f"command: {args.command}",
            f"config: {config}", f"seed: {args.seed}"]


class _OutputTarget:
    """stdout or a file opened with '\n' line endings."""

    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.fh = open(self.path, "w", newline="") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()
        return False


def _base_scenario(args) -> PilotScenario:
    fading = Fading(args.fading)
    f_d = args.f_d if fading is Fading.CONTINUOUS else 0.0
    return PilotScenario(n=args.n, alpha=1.0 / args.n, epsilon=args.epsilon,
                         rho=10.0 ** (args.snr_db / 10.0), f_d=f_d, fading=fading)


def _cmd_pilot_opt(args) -> int:
    sol = optimize_alpha(_base_scenario(args), AlphaMode(args.alpha_mode))
    clamped = int(sol.breakdown.estimation.clamped or sol.breakdown.negative_clamped)
    with _OutputTarget(args.out) as fh:
        for line in _header_lines(args):
            fh.write(f"# {line}\n")
        if args.format == "csv":
            fh.write(PILOT_OPT_CSV_HEADER + "\n")
            fh.write(",".join([format_number(sol.alpha_opt),
                               format_number(sol.alpha_baseline),
                               format_number(sol.rate_opt),
                               format_number(sol.rate_at_baseline),
                               format_number(sol.gain_percent),
                               str(clamped)]) + "\n")
        else:
            fh.write(f"alpha_opt        = {format_number(sol.alpha_opt)}\n")
            fh.write(f"rate_opt         = {format_number(sol.rate_opt)} bits/use\n")
            fh.write(f"alpha_baseline   = {format_number(sol.alpha_baseline)}\n")
            fh.write(f"rate_at_baseline = {format_number(sol.rate_at_baseline)} bits/use\n")
            fh.write(f"gain_percent     = {format_number(sol.gain_percent)}\n")
    return 0


def _cmd_pilot_sweep(args) -> int:
    grid = [float(v) for v in args.values.split(",") if v.strip()]
    spec = SweepSpec(swept_parameter=args.param, grid=grid, base=_base_scenario(args))
    rows = run_sweep(spec, AlphaMode(args.alpha_mode), threads=args.threads)
    with _OutputTarget(args.out) as fh:
        if args.format == "csv":
            write_sweep_csv(rows, fh, header_lines=_header_lines(args))
        else:
            for line in _header_lines(args):
                fh.write(f"# {line}\n")
            for r in rows:
                fh.write(f"{r.swept_parameter}={format_number(r.swept_value)}  "
                         f"alpha_opt={format_number(r.alpha_opt)}  "
                         f"rate_opt={format_number(r.rate_opt)}  "
                         f"gain={format_number(r.gain_percent)}%\n")
    return 0


def _cmd_comsens_design(args) -> int:
    settings = ComsensSettings(
        B=args.b, n_t=args.n_t, n_r=args.n_r, k=args.k,
        corr_rt=args.rho_rt * complex(math.cos(-args.theta_rt), math.sin(-args.theta_rt)),
        corr_rr=args.rho_rr * complex(math.cos(-args.theta_rr), math.sin(-args.theta_rr)),
        corr_mt=args.rho_mt * complex(math.cos(-args.theta_mt), math.sin(-args.theta_mt)),
        eps_corr=args.eps_corr, eta=args.eta, mu=args.mu)
    prob = build_problem(settings)
    result = design(prob, seed=args.seed, max_outer=args.max_outer)
    write_design_files(result, args.out_dir, header_lines=_header_lines(args))
    print(f"converged: {result.trace.converged} after "
          f"{result.trace.iterations} outer iterations, "
          f"final MSE {format_number(result.final_mse)}")
    return 0


def _cmd_comsens_verify(args) -> int:
    pair = TrainingPair(X=load_matrix_text(args.x), Y=load_matrix_text(args.y))
    report = correlation_report(pair)
    cross = max((float(abs(v)) for m in range(args.k + 1)
                 for v in correlation(pair.X, pair.Y, m).ravel()), default=0.0)
    auto = max((float(abs(v)) for m in range(1, args.k + 1)
                for v in correlation(pair.X, pair.X, m).diagonal()), default=0.0)
    ok = cross <= args.eps and auto <= args.eps
    with _OutputTarget(args.out) as fh:
        for line in _header_lines(args):
            fh.write(f"# {line}\n")
        fh.write(f"# max_cross_zone: {format_number(cross)}\n")
        fh.write(f"# max_auto_zone: {format_number(auto)}\n")
        fh.write(f"# within_tolerance: {'yes' if ok else 'no'}\n")
        fh.write(CORRELATION_CSV_HEADER + "\n")
        for lag, label, db in report:
            fh.write(f"{lag},{label},{format_number(db)}\n")
    return 0


def _cmd_radar_range(args) -> int:
    scenario = RadarScenario(d_user=args.d_user_km * 1e3,
                             t_proc_symbols=args.tproc_symbols,
                             T_s=args.symbol_us * 1e-6, k=args.k,
                             wave_speed=args.wave_speed)
    range_km = max_sensing_range(scenario) / 1e3
    lines = [f"max sensing range: {format_number(range_km)} km"]
    if args.d_object_km is not None:
        detectable = args.d_object_km * 1e3 <= max_sensing_range(scenario)
        lines.append(f"object at {format_number(args.d_object_km)} km detectable: "
                     f"{'yes' if detectable else 'no'}")
    with _OutputTarget(args.out) as fh:
        if args.out:
            for line in _header_lines(args):
                fh.write(f"# {line}\n")
        for line in lines:
            fh.write(line + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
