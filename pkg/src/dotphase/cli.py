"""Command line entry point: ``dotphase {trajectory,phase,sweep}``."""

from __future__ import annotations

import argparse
import json
import sys

from .domain import REFERENCE_PARAMS, SystemParams
from .errors import DotPhaseError
from .harness import (
    DEFAULT_CGP_T_MAX,
    DEFAULT_RANGES,
    SWEEP_MODES,
    SWEEP_PARAMETERS,
    SweepSpec,
    run_phase,
    run_sweep,
    run_trajectory,
)
from .master_equation import IntegratorConfig
from .phase import PhaseConfig

UNITS = (
    "All energies and rates are in units of s1 (the bare QD1-QD2 coupling); "
    "times are in units of 1/s1."
)


def _common(p: argparse.ArgumentParser, t_max: float, stride: int) -> None:
    g = p.add_argument_group("system (units of s1)")
    g.add_argument("--gamma-l", type=float, default=REFERENCE_PARAMS.gamma_l, help="left lead -> QD0 rate")
    g.add_argument("--gamma-r", type=float, default=REFERENCE_PARAMS.gamma_r, help="QD0 -> right lead rate")
    g.add_argument("--s1", type=float, default=REFERENCE_PARAMS.s1, help="QD1-QD2 coupling, QD0 empty")
    g.add_argument("--s2", type=float, default=REFERENCE_PARAMS.s2, help="QD1-QD2 coupling, QD0 occupied")
    g.add_argument("--eps0", type=float, default=REFERENCE_PARAMS.eps0, help="detuning E1 - E2")

    g = p.add_argument_group("integration (times in 1/s1)")
    g.add_argument("--dt", type=float, default=1e-3, help="RK4 step (default 1e-3)")
    g.add_argument("--t-max", type=float, default=t_max, help=f"final time (default {t_max:g})")
    g.add_argument("--stride", type=int, default=stride, help="record every n-th step")

    g = p.add_argument_group("phase")
    g.add_argument("--freeze-gap", type=float, default=1e-6)
    g.add_argument("--window", type=float, default=5.0, help="saturation window (1/s1)")
    g.add_argument("--tol", type=float, default=1e-4, help="saturation tolerance (rad)")

    p.add_argument("--out", required=True, help="output CSV path; metadata goes to <out>.json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dotphase",
        description="Geometric phase of a double-dot charge qubit coupled to a detector dot. "
        + UNITS,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trajectory", help="Bloch-vector trajectory", description=UNITS)
    _common(p, t_max=30.0, stride=1)

    p = sub.add_parser("phase", help="geometric phase versus time", description=UNITS)
    _common(p, t_max=500.0, stride=1)
    p.add_argument("--wrap", action="store_true", help="write the phase reduced into [0, 2pi)")

    p = sub.add_parser("sweep", help="CGP or gamma(T) versus one parameter", description=UNITS)
    _common(p, t_max=DEFAULT_CGP_T_MAX, stride=1)
    p.add_argument("--param", choices=SWEEP_PARAMETERS, required=True)
    p.add_argument("--from", dest="start", type=float, default=None)
    p.add_argument("--to", dest="stop", type=float, default=None)
    p.add_argument("--steps", type=int, default=30)
    p.add_argument("--mode", choices=SWEEP_MODES, default="cgp")
    p.add_argument("--workers", type=int, default=1, help="parallel processes")
    return parser


def run(args: argparse.Namespace) -> str:
    params = SystemParams(
        gamma_l=args.gamma_l, gamma_r=args.gamma_r, s1=args.s1, s2=args.s2, eps0=args.eps0
    )
    cfg = IntegratorConfig(dt=args.dt, t_max=args.t_max, sample_stride=args.stride)
    phase_cfg = PhaseConfig(
        freeze_gap=args.freeze_gap, saturation_window=args.window, saturation_tol=args.tol
    )
    if args.command == "trajectory":
        return str(run_trajectory(params, cfg, args.out, phase_cfg))
    if args.command == "phase":
        return str(run_phase(params, cfg, args.out, phase_cfg, wrap=args.wrap))

    lo, hi = DEFAULT_RANGES[args.param]
    spec = SweepSpec(
        parameter=args.param,
        start=lo if args.start is None else args.start,
        stop=hi if args.stop is None else args.stop,
        steps=args.steps,
        mode=args.mode,
        base=params,
        integrator=cfg,
        phase=phase_cfg,
    )
    return str(run_sweep(spec, args.out, workers=args.workers))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        path = run(args)
    except (DotPhaseError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
