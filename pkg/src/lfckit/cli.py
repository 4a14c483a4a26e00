"""Batch command line: run, compare, and validate scenarios.

    lfckit run --preset paper-three-area --controller lqg --out results/
    lfckit run myconfig.json --seed 7
    lfckit compare --preset paper-three-area --out results/
    lfckit validate myconfig.json

Exit codes: 0 success; 1 validation found errors (``validate`` only);
2 config/parse error; 3 controller synthesis failure; 4 simulation
divergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis
from .config import (Config, ConfigError, load_config, parse_config,
                     resolve_matrix, write_report_json, write_trace_csv)
from .model import (PlantModel, augment_integrators, build_plant,
                    validate_params)
from .numerics import CareError, NumericsError
from .presets import PRESETS, preset_config
from .simulation import (Scenario, SimulationDivergence, render_disturbance,
                         simulate)
from .synthesis import (ClosedLoopSystem, LqrWeights, NoiseModel,
                        SynthesisError, assemble_closed_loop, default_noise,
                        default_weights, design_lqg, make_droop_baseline)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_SYNTHESIS = 3
EXIT_DIVERGENCE = 4


def _load(args) -> Config:
    if args.preset is not None and args.config is not None:
        raise ConfigError("pass either a config file or --preset, not both")
    if args.preset is not None:
        return parse_config(preset_config(args.preset), f"preset:{args.preset}")
    if args.config is not None:
        return load_config(args.config)
    raise ConfigError("a config file or --preset is required")


def _controller_weights(config: Config, plant: PlantModel,
                        plant_aug: PlantModel) -> tuple[LqrWeights, NoiseModel]:
    spec = config.controller
    wdef = default_weights(plant_aug)
    ndef = default_noise(plant)
    weights = LqrWeights(
        q=resolve_matrix(spec.q, plant_aug.n_states, wdef.q, "controller.q"),
        r=resolve_matrix(spec.r, plant_aug.n_inputs, wdef.r, "controller.r"))
    noise = NoiseModel(
        w=resolve_matrix(spec.w, plant.n_disturbances, ndef.w, "controller.w"),
        v=resolve_matrix(spec.v, plant.n_outputs, ndef.v, "controller.v"))
    return weights, noise


def _build_system(config: Config, controller: str) -> tuple[ClosedLoopSystem,
                                                            NoiseModel]:
    plant = build_plant(config.areas, config.ties)
    if controller == "droop":
        return make_droop_baseline(plant), default_noise(plant)
    plant_aug = augment_integrators(plant)
    weights, noise = _controller_weights(config, plant, plant_aug)
    ctrl = design_lqg(plant, weights, noise,
                      estimate_disturbances=config.controller.estimate_disturbances)
    return assemble_closed_loop(plant, ctrl), noise


def _default_signals(system: ClosedLoopSystem) -> tuple[str, ...]:
    p = system.plant.n_outputs
    return tuple(f"y_{lbl}" for lbl in system.output_labels[:p])


def _stability_dict(system: ClosedLoopSystem) -> dict:
    rep = analysis.stability_report(system)
    return {
        "spectral_abscissa": rep.spectral_abscissa,
        "regulated_abscissa": rep.regulated_abscissa,
        "n_frozen_modes": rep.n_frozen_modes,
        "dominant_eigenvalue": rep.dominant_eigenvalue,
        "least_damped_eigenvalue": rep.least_damped_eigenvalue,
        "damping_ratio": rep.damping_ratio,
        "stable": rep.stable,
    }


def _metrics_dict(m: analysis.TransientMetrics) -> dict:
    return {
        "peak_deviation": m.peak_deviation,
        "peak_time": m.peak_time,
        "settling_time": m.settling_time,
        "settled": m.settled,
        "steady_state": m.steady_state,
        "ise": m.ise,
        "band": m.band,
    }


def _scenario_from_args(config: Config, args,
                        system: ClosedLoopSystem) -> Scenario:
    return config.scenario(seed=args.seed, horizon=args.horizon, dt=args.dt,
                           n_system_states=system.n_states)


def cmd_run(args) -> int:
    config = _load(args)
    controller = args.controller or config.controller.kind
    out_dir = Path(args.out)
    system, noise = _build_system(config, controller)
    scenario = _scenario_from_args(config, args, system)
    trace = simulate(system, scenario,
                     noise=noise if config.measurement_noise else None)

    trace_path = out_dir / (config.outputs.trace_csv
                            or f"trace_{controller}.csv")
    report_path = out_dir / (config.outputs.report_json or "report.json")
    write_trace_csv(trace, trace_path)

    signals = config.outputs.signals or _default_signals(system)
    report = {
        "schema": 1,
        "controller": controller,
        "description": config.description,
        "seed": trace.metadata["seed"],
        "scenario_hash": trace.metadata["scenario_hash"],
        "horizon_s": scenario.horizon,
        "dt_s": scenario.dt,
        "stability": _stability_dict(system),
        "metrics": {name: _metrics_dict(analysis.metrics(trace, name))
                    for name in signals},
        "trace_csv": trace_path.name,
    }
    write_report_json(report, report_path)
    print(f"wrote {trace_path} and {report_path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    config = _load(args)
    out_dir = Path(args.out)

    droop_sys, _ = _build_system(config, "droop")
    lqg_sys, lqg_noise = _build_system(config, "lqg")
    droop_scenario = _scenario_from_args(config, args, droop_sys)
    lqg_scenario = _scenario_from_args(config, args, lqg_sys)
    # One shared disturbance realization drives both controllers.
    samples = render_disturbance(droop_scenario.disturbances,
                                 droop_scenario.times())
    droop_trace = simulate(droop_sys, droop_scenario,
                           disturbance_samples=samples)
    lqg_trace = simulate(lqg_sys, lqg_scenario, disturbance_samples=samples,
                         noise=lqg_noise if config.measurement_noise else None)

    droop_path = out_dir / "trace_droop.csv"
    lqg_path = out_dir / "trace_lqg.csv"
    write_trace_csv(droop_trace, droop_path)
    write_trace_csv(lqg_trace, lqg_path)

    signals = config.outputs.signals or _default_signals(lqg_sys)
    comparison = analysis.compare(droop_trace, lqg_trace, signals,
                                  baseline_system=droop_sys,
                                  lqg_system=lqg_sys)
    report = {
        "schema": 1,
        "description": config.description,
        "seed": droop_trace.metadata["seed"],
        "scenario_hash": droop_trace.metadata["scenario_hash"],
        "stability": {"droop": _stability_dict(droop_sys),
                      "lqg": _stability_dict(lqg_sys)},
        "signals": {
            row.signal: {
                "baseline": _metrics_dict(row.baseline),
                "lqg": _metrics_dict(row.lqg),
                "ise_ratio": row.ise_ratio,
                "peak_ratio": row.peak_ratio,
                "steady_state_ratio": row.steady_state_ratio,
                "lqg_improves_ise": row.lqg_improves_ise,
            } for row in comparison.signals
        },
        "regressions": list(comparison.regressions),
        "traces": {"droop": droop_path.name, "lqg": lqg_path.name},
    }
    report_path = out_dir / (config.outputs.report_json or "compare.json")
    write_report_json(report, report_path)
    print(f"wrote {droop_path}, {lqg_path} and {report_path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _load(args)
    diagnostics = list(validate_params(config.areas, config.ties))
    feasible = True
    if not any(d.severity == "error" for d in diagnostics):
        try:
            _build_system(config, config.controller.kind)
        except (SynthesisError, CareError, NumericsError) as exc:
            feasible = False
            print(f"error: synthesis: {exc}")
    for diag in diagnostics:
        print(str(diag))
    errors = sum(d.severity == "error" for d in diagnostics) + (not feasible)
    warnings_ = sum(d.severity == "warning" for d in diagnostics)
    print(f"{errors} error(s), {warnings_} warning(s)")
    return EXIT_OK if errors == 0 else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lfckit",
        description="Multi-area load-frequency control: synthesize "
                    "controllers, simulate disturbances, emit CSV traces "
                    "and JSON reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_run_flags=True):
        p.add_argument("config", nargs="?", default=None,
                       help="path to a JSON configuration file")
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="use a bundled configuration instead of a file")
        if with_run_flags:
            p.add_argument("--seed", type=int, default=None, metavar="U64",
                           help="override the scenario seed")
            p.add_argument("--out", default=".", metavar="DIR",
                           help="output directory (created if missing)")
            p.add_argument("--horizon", type=float, default=None, metavar="S",
                           help="override the scenario horizon, seconds")
            p.add_argument("--dt", type=float, default=None, metavar="S",
                           help="override the integration step, seconds")

    p_run = sub.add_parser("run", help="simulate one controller, write "
                                       "trace CSV + metrics JSON")
    common(p_run)
    p_run.add_argument("--controller", choices=("droop", "lqg"), default=None,
                       help="override the controller selection")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run droop and LQG on identical "
                                           "disturbances, write both traces "
                                           "+ comparison JSON")
    common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_val = sub.add_parser("validate", help="check a configuration and "
                                            "synthesis feasibility")
    common(p_val, with_run_flags=False)
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (KeyError, ValueError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SynthesisError, CareError, NumericsError) as exc:
        print(f"error: synthesis: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS
    except SimulationDivergence as exc:
        print(f"error: simulation: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
