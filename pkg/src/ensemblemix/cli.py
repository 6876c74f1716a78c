"""Command-line front end.

    ensemblemix run fig2 --eta 0 --output fig2_eta0.csv
    ensemblemix run fig5 --distribution --output fig5.csv
    ensemblemix sweep fig4 --grid 0,0.5,0.9 --output sweep.csv
    ensemblemix run custom --order 0 --omega 10 --t-end 1 --oracle moments

Exit codes: 0 success, 1 other simulation failure, 2 configuration error,
3 Fock cutoff guard, 4 low-excitation validity guard, 5 numerical blow-up.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .integrator import SimulationError
from .runner import distribution_csv, oracle_compare, run_config, sweep_csv, sweep_eta
from .scenarios import PRESETS, ConfigError, get_scenario, load_config_file

logger = logging.getLogger("ensemblemix")

EXIT_CONFIG = 2

# flag dest -> configuration key
_OVERRIDE_FLAGS = {
    "eta": "eta", "order": "order", "cutoff": "cutoff", "t_end": "t_end", "dt": "dt",
    "sample_interval": "sample_interval", "probe_times": "probe_times", "method": "method",
    "N": "N", "N1": "N1", "N2": "N2", "gamma2": "gamma2",
    "beta": "beta", "beta1": "beta1", "beta2": "beta2",
    "delta": "delta", "delta1": "delta1", "delta2": "delta2",
    "omega": "omega", "omega1": "omega1", "omega2": "omega2",
    "delta_omega": "delta_omega", "phi0": "phi0",
    "cutoff_guard": "cutoff_guard", "validity_guard": "validity_guard",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario_pos", nargs="?", metavar="SCENARIO", help=f"one of {', '.join(PRESETS)}")
    p.add_argument("--scenario", help="same as the positional SCENARIO")
    p.add_argument("--config", metavar="PATH", help="flat key=value file; flags win over it")
    p.add_argument("--variant", help="run only this variant of a multi-variant preset")
    p.add_argument("--output", "-o", metavar="PATH", help="CSV path (stdout if omitted)")
    p.add_argument("--backend", choices=("cython", "python"), help="kernel backend")
    g = p.add_argument_group("numerics")
    g.add_argument("--order", type=int, choices=(0, 1), help="Holstein-Primakoff order")
    g.add_argument("--cutoff", metavar="M", help="Fock cutoff per mode, or 'auto'")
    g.add_argument("--t-end", type=float, dest="t_end")
    g.add_argument("--dt", type=float)
    g.add_argument("--sample-interval", type=float, dest="sample_interval")
    g.add_argument("--probe-times", dest="probe_times", metavar="a,b,c")
    g.add_argument("--method", choices=("rk4", "dopri5"))
    g.add_argument("--cutoff-guard", dest="cutoff_guard", metavar="X", help="number or 'off'")
    g.add_argument("--validity-guard", dest="validity_guard", metavar="X", help="number or 'off'")
    g = p.add_argument_group("physical parameters (units of gamma_1)")
    g.add_argument("--eta", type=float)
    for name in ("N", "N1", "N2"):
        g.add_argument(f"--{name}", type=int)
    for name in ("gamma2", "beta", "beta1", "beta2", "delta", "delta1", "delta2",
                 "omega", "omega1", "omega2", "phi0"):
        g.add_argument(f"--{name}", type=float)
    g.add_argument("--delta-omega", type=float, dest="delta_omega")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ensemblemix", description="Two cross-coupled, laser-driven atomic ensembles.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="evolve one scenario and write the time series")
    _common(run)
    run.add_argument("--distribution", action="store_true",
                     help="also write P_i at the probe times (<output>.dist.csv)")
    run.add_argument("--oracle", choices=("moments", "dicke"),
                     help="compare with an independent oracle (<output>.oracle.csv)")
    run.add_argument("--dicke-max-excitation", type=int, dest="dicke_max_excitation",
                     help="excitation cap for the spin oracle")
    sweep = sub.add_parser("sweep", help="N_e1 at the probe times over a grid of eta")
    _common(sweep)
    sweep.add_argument("--grid", metavar="a,b,c", help="eta values (default: the preset grid)")
    sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    sweep.add_argument("--keep-going", action="store_true",
                       help="record NaN for points whose run trips a guard instead of stopping")
    sub.add_parser("list", help="show the scenario presets")
    return parser


def _overrides(args) -> dict:
    out = {}
    if args.config:
        out.update(load_config_file(args.config))
    for dest, key in _OVERRIDE_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            out[key] = value
    return out


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, newline="\n")
        logger.info("wrote %s", path)


def _derived(path: Path | None, label: str, suffix: str) -> Path | None:
    """fig3.csv -> fig3_N200.csv / fig3_N200.dist.csv"""
    if path is None:
        return None
    stem = path.stem + (f"_{label}" if label else "")
    return path.with_name(stem + suffix + path.suffix)


def _cmd_run(args, scenario) -> int:
    configs = scenario.configs(_overrides(args), args.variant)
    out = Path(args.output) if args.output else None
    if args.oracle == "moments" and any(cfg.order != 0 for _, cfg in configs):
        raise ConfigError("the moment oracle needs --order 0")
    status = 0
    for label, cfg in configs:
        want_dist = args.distribution or scenario.distribution
        result = run_config(cfg, distribution=want_dist, backend=args.backend, raise_errors=False)
        header = result.header(scenario.name, label)
        _emit(result.series.to_csv(header=header), _derived(out, label, ""))
        if want_dist and result.distributions:
            _emit(distribution_csv(result, header), _derived(out, label, ".dist"))
        if result.error is not None:
            print(f"error: {result.error}", file=sys.stderr)
            status = status or result.error.exit_code
            continue
        if args.oracle:
            report = oracle_compare(cfg, args.oracle, result, max_excitation=args.dicke_max_excitation)
            _emit(report.to_csv(header), _derived(out, label, ".oracle"))
            print(f"{args.oracle} oracle: max |dNe| = {report.max_abs_diff:.3e}", file=sys.stderr)
    return status


def _cmd_sweep(args, scenario) -> int:
    configs = scenario.configs(_overrides(args), args.variant)
    if len(configs) != 1:
        raise ConfigError("sweep needs a single-variant scenario; pass --variant")
    label, cfg = configs[0]
    grid = None
    if args.grid:
        try:
            grid = [float(x) for x in args.grid.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"bad --grid {args.grid!r}") from None
    try:
        points, errors = sweep_eta(cfg, grid, jobs=args.jobs, backend=args.backend,
                                   keep_going=args.keep_going)
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    swept = grid if grid is not None else cfg.eta_grid
    header = [f"scenario={scenario.name}"] + cfg.echo()
    header.append("sweep_grid=" + ",".join(repr(float(x)) for x in sorted(swept)) + " (overrides eta)")
    header += [f"eta={eta}: {type(e).__name__}: {e}" for eta, e in sorted(errors.items())]
    _emit(sweep_csv(points, header), Path(args.output) if args.output else None)
    for eta, e in sorted(errors.items()):
        print(f"warning: eta={eta}: {e}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list":
        for name, sc in PRESETS.items():
            print(f"{name:7s} {sc.description}")
        return 0
    name = args.scenario or args.scenario_pos or "custom"
    if args.scenario and args.scenario_pos and args.scenario != args.scenario_pos:
        print("error: conflicting scenario names", file=sys.stderr)
        return EXIT_CONFIG
    try:
        scenario = get_scenario(name)
        if args.command == "run":
            return _cmd_run(args, scenario)
        return _cmd_sweep(args, scenario)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
