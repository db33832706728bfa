"""Command-line entry point: ``fibermortar run <config-file>``."""
import argparse
import logging
import sys
from pathlib import Path

from .beam import BeamMaterial
from .config import load_config, validate
from .errors import ConvergenceError, FiberMortarError, ParseError
from .mesh import load_meshes
from .output import RunReport, write_report, write_vtk
from .solver import build_problem, newton_solve

log = logging.getLogger("fibermortar")


def run(config_path, output_dir=None, steps=None):
    """Execute one simulation; returns a process exit code."""
    try:
        config = load_config(config_path).with_overrides(output_dir, steps)
        validate(config)
        solid, beam, dofs = load_meshes(config)
        if config.beam is None and beam.n_elements:
            raise ParseError("mesh has beam elements but the config gives no beam section",
                             None, str(config_path))
        # any positive section will do when there is no beam to evaluate
        beam_material = config.beam or BeamMaterial(1.0, 1.0, 1.0)
        problem = build_problem(
            solid, beam, config.solid, beam_material, kappa=config.kappa,
            n_gauss_mortar=config.n_gauss_mortar, dofs=dofs,
        )
    except (FiberMortarError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport()

    def on_step(state):
        report.add(state)
        if state.step % config.output_every == 0:
            write_vtk(out, state.step, solid, beam, state.d_solid, state.d_beam, state.multipliers)

    code = 0
    try:
        newton_solve(problem, config.newton, callback=on_step)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.last_state is not None:
            report.add(exc.last_state)
        code = 1
    except FiberMortarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 1
    if report.records:
        write_report(report, out / "report.csv")
    return code


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="fibermortar",
        description="Embedded beam fibers in hyperelastic solids, mortar-coupled.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a simulation from a config file")
    p_run.add_argument("config", help="path to the run configuration")
    p_run.add_argument("--output-dir", default=None, help="override output_dir")
    p_run.add_argument("--steps", type=int, default=None, help="override n_load_steps")
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return run(args.config, args.output_dir, args.steps)
    return 2  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
