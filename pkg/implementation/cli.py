# Command-line interface for the Homodyne Super-Resolution Simulator

import sys
import logging
import argparse
from typing import List, Optional

import pandas as pd
from pydantic import ValidationError

from implementation import settings
from implementation.beam import mode_profile
from implementation.emitters import PlotSpec, emit_csv, emit_modes, emit_plot
from implementation.exceptions import ConfigError, HomodyneError
from implementation.mcsim import McScenario, ShotPlan, validate
from implementation.report_store import save_report
from implementation.scenario import (ScenarioConfig, ScenarioParams, apply_parameters,
                                     evaluate_point, load_config, run_region, run_sweep)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MC_FAILED = 1
EXIT_ERROR = 2


def parse_misalignment(text: str) -> dict:
    """none | fluct:<sigma_d> | fixed:<delta_x> (metres) as scenario overrides"""
    variant, _, value = text.partition(":")
    if variant == "none" and not value:
        return {"misalignment": "none", "sigma_d": 0.0, "delta_x": 0.0}
    if variant in ("fluct", "fixed") and value:
        try:
            amount = float(value)
        except ValueError:
            raise ConfigError(f"'{value}' is not a number", key="misalignment")
        if variant == "fluct":
            return {"misalignment": "fluctuating", "sigma_d": amount, "delta_x": 0.0}
        return {"misalignment": "fixed", "sigma_d": 0.0, "delta_x": amount}
    raise ConfigError(f"expected none, fluct:<sigma_d> or fixed:<delta_x>, got '{text}'", key="misalignment")


def _overrides(params: ScenarioParams, values: dict) -> ScenarioParams:
    try:
        return apply_parameters(params, values)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first["msg"], key=str(first["loc"][0]) if first["loc"] else None)


def _progress(args) -> bool:
    return settings.SHOW_PROGRESS and not args.no_progress


def cmd_dmin(args) -> int:
    params = load_config(args.config).params
    values = {}
    if args.ell is not None:
        values["ell"] = args.ell
    if args.misalignment is not None:
        values.update(parse_misalignment(args.misalignment))
    params = _overrides(params, values)

    check = evaluate_point(params)
    print(f"d_min = {check.d_min!r} m")
    print(f"d_rayleigh = {check.d_rayleigh!r} m")
    print(f"resolved = {str(check.resolved).lower()}")
    print(f"margin = {check.margin!r} m")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    table = run_sweep(config, show_progress=_progress(args), workers=args.workers)
    emit_csv(table, args.out)
    if args.plot:
        # The plot is a rendering of the emitted CSV
        emit_plot(pd.read_csv(args.out), PlotSpec(title=args.title), args.plot)
    print(f"Wrote {len(table)} rows to {args.out}")
    return EXIT_OK


def cmd_region(args) -> int:
    config = load_config(args.config)
    table = run_region(config, args.axis1, args.axis2, show_progress=_progress(args))
    emit_csv(table, args.out)
    print(f"Wrote {len(table)} rows to {args.out} ({int(table['resolved'].sum())} resolved)")
    return EXIT_OK


def build_mc_scenario(config: ScenarioConfig) -> McScenario:
    params = config.params
    return McScenario(
        pair=params.pair(),
        geometry=params.geometry(),
        receiver=params.receiver(),
        legs=params.legs(),
        misalignment=params.misalignment_model(),
    )


def cmd_mc(args) -> int:
    config = load_config(args.config)
    plan = ShotPlan(
        shots=args.shots,
        seed=args.seed,
        jitter=args.jitter,
        batches=args.batches,
        loss_model=args.loss_model,
        jitter_model=args.jitter_model,
        detector=args.detector,
        phase_convention=args.phase_convention,
        variance_scale=args.variance_scale,
    )
    report = validate(build_mc_scenario(config), plan)
    if args.report:
        save_report(report, args.report)
    print(report.model_dump_json(indent=2))

    if not report.passed():
        logger.error(f"Monte Carlo validation failed: mean z={report.mean_z_score}, "
                     f"variance z={report.variance_z_score}, error={report.error}")
        return EXIT_MC_FAILED
    return EXIT_OK


def cmd_modes(args) -> int:
    params = load_config(args.config).params if args.config else ScenarioParams()
    x, intensity = mode_profile(params.geometry(), args.n, args.z, points=args.points)
    emit_modes(x, intensity, args.out)
    print(f"Wrote |u_{args.n}(x, {args.z})|^2 profile to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homodyne",
        description="Homodyne super-resolution of two distant laser sources",
    )
    parser.add_argument('--log-level', type=str, default=None, help='Override HOMODYNE_LOG_LEVEL')
    parser.add_argument('--no-progress', action='store_true', help='Hide sweep progress bars')
    sub = parser.add_subparsers(dest='command', required=True)

    dmin = sub.add_parser('dmin', help='Minimum resolvable separation for one scenario')
    dmin.add_argument('--config', type=str, required=True, help='Scenario config file')
    dmin.add_argument('--ell', type=float, default=None, help='Propagation distance for both sources [m]')
    dmin.add_argument('--misalignment', type=str, default=None,
                      help='none | fluct:<sigma_d> | fixed:<delta_x> (metres)')
    dmin.set_defaults(handler=cmd_dmin)

    sweep = sub.add_parser('sweep', help='Cartesian parameter sweep to CSV (and SVG)')
    sweep.add_argument('--config', type=str, required=True)
    sweep.add_argument('--out', type=str, required=True, help='CSV output path')
    sweep.add_argument('--plot', type=str, default=None, help='SVG output path')
    sweep.add_argument('--title', type=str, default=None, help='Plot title')
    sweep.add_argument('--workers', type=int, default=1, help='Worker threads; output order is unaffected')
    sweep.set_defaults(handler=cmd_sweep)

    region = sub.add_parser('region', help='2D super-resolution map over two sweep axes')
    region.add_argument('--config', type=str, required=True)
    region.add_argument('--axis1', type=str, required=True)
    region.add_argument('--axis2', type=str, required=True)
    region.add_argument('--out', type=str, required=True)
    region.set_defaults(handler=cmd_region)

    mc = sub.add_parser('mc', help='Monte Carlo validation of the closed-form moments')
    mc.add_argument('--config', type=str, required=True)
    mc.add_argument('--shots', type=int, required=True)
    mc.add_argument('--seed', type=int, default=settings.DEFAULT_SEED)
    mc.add_argument('--jitter', type=float, default=None, help='Override sigma_d [m]')
    mc.add_argument('--batches', type=int, default=1)
    mc.add_argument('--loss-model', choices=['lumped', 'independent'], default='lumped')
    mc.add_argument('--jitter-model', choices=['residual', 'amplified'], default='residual')
    mc.add_argument('--detector', choices=['quadrature', 'poisson'], default='quadrature')
    mc.add_argument('--phase-convention', choices=['optimal', 'literal'], default='optimal')
    mc.add_argument('--report', type=str, default=None, help='Also save the report as JSON')
    mc.add_argument('--variance-scale', type=float, default=1.0, help=argparse.SUPPRESS)
    mc.set_defaults(handler=cmd_mc)

    modes = sub.add_parser('modes', help='Sampled |u_n(x, z)|^2 profile')
    modes.add_argument('--n', type=int, required=True)
    modes.add_argument('--z', type=float, required=True)
    modes.add_argument('--out', type=str, required=True)
    modes.add_argument('--points', type=int, default=401)
    modes.add_argument('--config', type=str, default=None, help='Optics config (baseline setup if omitted)')
    modes.set_defaults(handler=cmd_modes)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and return its exit status"""
    args = build_parser().parse_args(argv)
    log_path = settings.configure_logging(level=args.log_level)
    logger.info(f"homodyne {args.command} (log: {log_path})")

    try:
        return args.handler(args)
    except (HomodyneError, OSError, ValidationError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
