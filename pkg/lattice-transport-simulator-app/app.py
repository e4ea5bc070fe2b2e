# app.py - Command-line front-end for lattice transport runs
import argparse
import logging
import math
import os
import sys
from typing import Dict, List, Optional

import pandas as pd

from analysis_engine import AnalysisEngine
from chart_components import plot_fidelity_curves, plot_trajectory
from config import DEFAULT_SWEEP, FIGURE_DISTANCES_L_X, FIGURE_PANELS, LATTICE_PERIOD, PANEL_DEPTH_SCALE
from configuration_manager import ConfigurationManager, RunConfig
from data_processing import DataExporter, DataProcessor
from errors import LatticeTransportError, UnstableAxis
from ground_state import imaginary_time_evolve
from lattice_potential import (
    LatticePresetManager, evaluate_potential_batch, find_minimum, harmonic_approximation,
    harmonic_potential_batch, potential_field_frame, scale_depths,
)
from reports import generate_pdf_report
from sta_trajectory import TransportSpec, trajectory_2d
from transport_experiment import (
    acceleration_ceiling, figure_config, reproduce_figure, robustness_sweep, run_transport, snap_distance,
    sweep_tf,
)
from utils import characteristic_scales, er_to_internal, format_depths, internal_to_er

logger = logging.getLogger(__name__)


def parse_grid(text: str):
    try:
        nx, ny = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected <nx>x<ny>, got '{text}'")
    return nx, ny


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (a sidecar .meta.json also works)")
    common.add_argument("--out", default=".", help="Output directory")
    common.add_argument("--jobs", type=int, default=None, help="Worker processes (default: all cores)")
    common.add_argument("--grid", type=parse_grid, default=None, help="Grid points as <nx>x<ny>")
    common.add_argument("--tol", type=float, default=None, help="Relative step-doubling tolerance")
    common.add_argument("--pdf", action="store_true", help="Also write a PDF report")
    common.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging verbosity (stderr)")
    common.add_argument("--quiet", action="store_true", help="Disable progress bars")

    parser = argparse.ArgumentParser(description="STA transport of atoms in tunable 2D optical lattices.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("presets", parents=[common], help="List lattice presets and their harmonic scales")
    sub.add_parser("ground-state", parents=[common], help="Ground-state density and energy")
    sub.add_parser("trajectory", parents=[common], help="STA lattice trajectory and AOM program")
    sub.add_parser("transport", parents=[common], help="Single transport run at t_f_T_x")
    sub.add_parser("sweep", parents=[common], help="Fidelity versus transport time")
    sub.add_parser("robustness", parents=[common], help="Fidelity under mismatched control")

    figure = sub.add_parser("figure", parents=[common], help="Reproduce one fidelity figure panel")
    figure.add_argument("--figure", type=int, required=True, choices=sorted(FIGURE_PANELS))
    figure.add_argument("--panel", required=True, choices=sorted(PANEL_DEPTH_SCALE))
    figure.add_argument("--distance", type=float, default=FIGURE_DISTANCES_L_X[0],
                        help="Transport distance in l_x")

    plot = sub.add_parser("plot", parents=[common], help="Render CSV results to PNG")
    plot.add_argument("kind", choices=["fidelity", "trajectory"])
    plot.add_argument("csv", nargs="+", help="Input CSV file(s)")
    plot.add_argument("--png", required=True, help="Output image path")
    return parser


def flag_overrides(args) -> Dict[str, object]:
    overrides = {"stepper.rel_tol": args.tol, "jobs": args.jobs}
    if args.grid is not None:
        overrides["grid.nx"], overrides["grid.ny"] = args.grid
    return overrides


def cmd_presets(args) -> List[str]:
    rows = []
    for entry in LatticePresetManager.get_all_presets():
        params = LatticePresetManager.build_params(entry.name)
        row = {"name": entry.name, "depths": format_depths(entry.depths_E_R)}
        try:
            hp = harmonic_approximation(params)
            scales = characteristic_scales(hp)
            row.update(omega_x=hp.omega_x, omega_y=hp.omega_y, T_x=scales.T_x, l_x=scales.l_x, status="stable")
        except UnstableAxis:
            row.update(omega_x=float("nan"), omega_y=float("nan"), T_x=float("nan"), l_x=float("nan"),
                       status="experimental: no confining omega_x at theta=0")
        rows.append(row)
    print(pd.DataFrame(rows).to_string(index=False))
    return []


def _outputs(args, name: str) -> str:
    return os.path.join(args.out, name)


def cmd_ground_state(run: RunConfig, args) -> List[str]:
    transport = run.transport_config()
    params = scale_depths(transport.lattice, transport.depth_scale)
    grid = transport.grid.build(LATTICE_PERIOD)
    if transport.harmonic_mode:
        hp = harmonic_approximation(params)
        potential = er_to_internal(harmonic_potential_batch(hp, grid))
        center = (-hp.a_x / hp.omega_x ** 2, 0.0)
    else:
        potential = er_to_internal(evaluate_potential_batch(params, grid))
        center = find_minimum(params, (0.0, 0.0))
    psi, energy = imaginary_time_evolve(potential, grid, transport.ite, center=center)
    energy_er = internal_to_er(energy)
    density_path = DataExporter.write_csv(DataProcessor.density_frame(psi), _outputs(args, "ground_state_density.csv"))
    potential_path = DataExporter.write_csv(potential_field_frame(params, grid), _outputs(args, "potential.csv"))
    DataExporter.write_sidecar(density_path, run.document, {"E0_E_R": energy_er, "center": list(center)})
    print(f"E0 = {energy_er:.17g} E_R")
    return [density_path, potential_path]


def cmd_trajectory(run: RunConfig, args) -> List[str]:
    transport = run.transport_config()
    hp = harmonic_approximation(scale_depths(transport.lattice, transport.depth_scale))
    scales = characteristic_scales(hp)
    spec = TransportSpec(
        d_x=snap_distance(transport.distance_x_l_x * scales.l_x),
        d_y=snap_distance(transport.distance_y_l_x * scales.l_x),
        t_f=transport.t_f_T_x * scales.T_x,
    )
    paths = []
    trajectories = trajectory_2d(spec, hp)
    for traj in trajectories:
        if traj.d == 0 and traj.axis.value == "y":
            continue
        suffix = traj.axis.value
        path = DataExporter.write_csv(DataProcessor.trajectory_frame(traj, scales.T_x, scales.l_x),
                                      _outputs(args, f"trajectory_{suffix}.csv"))
        aom_path = DataExporter.write_csv(DataProcessor.aom_frame(traj, scales.T_x),
                                          _outputs(args, f"aom_{suffix}.csv"))
        DataExporter.write_sidecar(path, run.document, {
            "axis": suffix, "d_actual_l_x": traj.d / scales.l_x,
            "collocation_q0_l_x": list(traj.collocation_samples() / scales.l_x),
        })
        paths.extend([path, aom_path])
    return paths


def _summary(run: RunConfig) -> dict:
    transport = run.transport_config()
    hp = harmonic_approximation(scale_depths(transport.lattice, transport.depth_scale))
    scales = characteristic_scales(hp)
    return {"lattice": run.document["lattice"], "depths_E_R": run.document["depths_E_R"],
            "depth_scale": transport.depth_scale, "omega_x": hp.omega_x, "omega_y": hp.omega_y,
            "T_x": scales.T_x, "l_x": scales.l_x, "max_lattice_accel": acceleration_ceiling(transport)}


def cmd_transport(run: RunConfig, args) -> List[str]:
    transport = run.transport_config()
    transport.stepper.record_trace = True
    result = run_transport(transport)
    path = DataExporter.write_csv(pd.DataFrame([result.to_row()]), _outputs(args, "transport.csv"))
    trace_path = DataExporter.write_csv(result.trace, _outputs(args, "transport_trace.csv"))
    DataExporter.write_sidecar(path, run.document, {
        "d_actual_r_l_x": math.hypot(result.d_actual_x, result.d_actual_y),
        "max_lattice_accel": acceleration_ceiling(transport),
    })
    print(f"fidelity = {result.fidelity:.17g}")
    return [path, trace_path]


def cmd_sweep(run: RunConfig, args) -> List[str]:
    doc = run.document
    curve = sweep_tf(run.transport_config(), doc["t_f_list_T_x"], jobs=doc["jobs"], progress=not args.quiet)
    path = DataExporter.write_csv(curve, _outputs(args, "sweep.csv"))
    DataExporter.write_sidecar(path, doc, {"max_lattice_accel": acceleration_ceiling(run.transport_config())})
    outputs = [path]
    if args.pdf:
        outputs.append(generate_pdf_report("sweep", curve, _summary(run), _outputs(args, "sweep.pdf"),
                                           doc["threshold"]))
    for line in AnalysisEngine.generate_curve_insights(curve, doc["threshold"]):
        print(line)
    return outputs


def cmd_robustness(run: RunConfig, args) -> List[str]:
    doc = run.document
    table = robustness_sweep(run.transport_config(), doc["perturbation"], doc["magnitudes_pct"],
                             jobs=doc["jobs"], progress=not args.quiet)
    path = DataExporter.write_csv(table, _outputs(args, f"robustness_{doc['perturbation']}.csv"))
    DataExporter.write_sidecar(path, doc)
    outputs = [path]
    if args.pdf:
        outputs.append(generate_pdf_report("robustness", table, _summary(run),
                                           _outputs(args, f"robustness_{doc['perturbation']}.pdf")))
    return outputs


def cmd_figure(run: RunConfig, args) -> List[str]:
    doc = run.document
    base = run.transport_config()
    os.makedirs(args.out, exist_ok=True)
    path = reproduce_figure(args.figure, args.panel, args.distance, args.out, t_f_list=doc["t_f_list_T_x"],
                            jobs=doc["jobs"], base=base, progress=not args.quiet,
                            resolved_config=doc)
    outputs = [path]
    if args.pdf:
        curve = pd.read_csv(path)
        config = figure_config(args.figure, args.panel, args.distance, base)
        hp = harmonic_approximation(scale_depths(config.lattice, config.depth_scale))
        scales = characteristic_scales(hp)
        summary = {"lattice": FIGURE_PANELS[args.figure]["preset"], "depths_E_R": config.lattice.depths,
                   "depth_scale": config.depth_scale, "omega_x": hp.omega_x, "omega_y": hp.omega_y,
                   "T_x": scales.T_x, "l_x": scales.l_x}
        outputs.append(generate_pdf_report("figure", curve, summary,
                                           os.path.splitext(path)[0] + ".pdf", doc["threshold"]))
    return outputs


def cmd_plot(args) -> List[str]:
    if args.kind == "fidelity":
        threshold = DEFAULT_SWEEP["threshold"]
        curves = [pd.read_csv(path) for path in args.csv]
        for path, curve in zip(args.csv[1:], curves[1:]):
            shift = AnalysisEngine.compare_curves(curves[0], curve, threshold)["breakdown_shift"]
            text = f"{shift:+.4f} T_x" if shift is not None else "not bracketed"
            print(f"breakdown shift of {os.path.basename(path)} vs {os.path.basename(args.csv[0])}: {text}")
        return [plot_fidelity_curves(args.csv, args.png, threshold)]
    return [plot_trajectory(args.csv[0], args.png)]


COMMANDS = {
    "ground-state": cmd_ground_state,
    "trajectory": cmd_trajectory,
    "transport": cmd_transport,
    "sweep": cmd_sweep,
    "robustness": cmd_robustness,
    "figure": cmd_figure,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), stream=sys.stderr,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        if args.command == "presets":
            outputs = cmd_presets(args)
        elif args.command == "plot":
            outputs = cmd_plot(args)
        else:
            # Parse and validate everything before any file is written
            run = ConfigurationManager.build_run_config(args.command, args.config, flag_overrides(args))
            os.makedirs(args.out, exist_ok=True)
            outputs = COMMANDS[args.command](run, args)
    except LatticeTransportError as exc:
        print(f"error: {type(exc).__name__}: {' '.join(str(exc).split())}", file=sys.stderr)
        return exc.exit_code
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
