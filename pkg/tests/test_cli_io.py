import csv
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fibermortar.cli import main, run
from fibermortar.config import load_config, parse_config
from fibermortar.errors import ParseError
from fibermortar.mesh import format_mesh, hermite_eval, make_beam_mesh, make_solid_mesh
from fibermortar.mortar import multiplier_at
from fibermortar.output import REPORT_HEADER, RunReport, read_vtk, write_report, write_vtk
from fibermortar.scenarios import clamped_stretch
from fibermortar.solver import NewtonSettings, assemble_global, newton_solve

CONFIG = """\
[mesh]
mesh_file = block.mesh

[solid]
solid_youngs = 1.0
solid_poisson = 0.3

[beam]
beam_youngs = 10.0
beam_area = 0.00785398
beam_inertia = 4.9087e-6

[coupling]
kappa = 100.0
n_gauss_mortar = 6

[solver]
n_load_steps = {steps}
newton_abs_tol = 1e-8
newton_rel_tol = 1e-10
max_iterations = {max_iterations}

[output]
output_every = 1
output_dir = out
"""


def write_case(tmp_path, stretch=0.05, steps=2, max_iterations=20):
    problem = clamped_stretch(stretch)
    (tmp_path / "block.mesh").write_text(format_mesh(problem.solid, problem.beam))
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CONFIG.format(steps=steps, max_iterations=max_iterations))
    return cfg


def read_report(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestRun:
    def test_happy_path(self, tmp_path):
        cfg = write_case(tmp_path)
        assert run(cfg) == 0
        out = tmp_path / "out"
        assert sorted(p.name for p in out.iterdir()) == [
            "beam_0001.vtk", "beam_0002.vtk", "report.csv", "solid_0001.vtk", "solid_0002.vtk",
        ]
        rows = read_report(out / "report.csv")
        assert tuple(rows[0]) == REPORT_HEADER
        assert len(rows) == 3
        assert float(rows[2][1]) == 1.0

    def test_overrides(self, tmp_path):
        cfg = write_case(tmp_path)
        other = tmp_path / "elsewhere"
        assert main(["run", str(cfg), "--output-dir", str(other), "--steps", "3"]) == 0
        assert len(read_report(other / "report.csv")) == 4
        assert not (tmp_path / "out").exists()

    def test_missing_mesh(self, tmp_path, capsys):
        cfg = write_case(tmp_path)
        (tmp_path / "block.mesh").unlink()
        assert run(cfg) != 0
        assert "mesh file not found" in capsys.readouterr().err
        assert not (tmp_path / "out").exists()

    def test_non_convergent_step_keeps_earlier_output(self, tmp_path, capsys):
        cfg = write_case(tmp_path, stretch=-0.7, steps=3, max_iterations=6)
        assert run(cfg) != 0
        assert "load step 3" in capsys.readouterr().err
        out = tmp_path / "out"
        names = sorted(p.name for p in out.iterdir())
        assert names == ["beam_0001.vtk", "beam_0002.vtk", "report.csv", "solid_0001.vtk", "solid_0002.vtk"]
        rows = read_report(out / "report.csv")
        # one record per attempted step, the failed one included
        assert [r[0] for r in rows[1:]] == ["1", "2", "3"]

    def test_fiber_mesh_without_beam_section(self, tmp_path, capsys):
        cfg = write_case(tmp_path)
        text = cfg.read_text()
        start, end = text.index("[beam]"), text.index("[coupling]")
        cfg.write_text(text[:start] + text[end:])
        assert run(cfg) == 2
        assert "no beam section" in capsys.readouterr().err
        assert not (tmp_path / "out").exists()

    def test_module_entry_point(self, tmp_path):
        cfg = write_case(tmp_path, steps=1)
        proc = subprocess.run(
            [sys.executable, "-m", "fibermortar", "run", str(cfg)], capture_output=True, text=True
        )
        assert proc.returncode == 0, proc.stderr

    def test_deterministic_outputs(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        cfg = write_case(tmp_path)
        assert run(cfg, output_dir=a) == 0
        assert run(cfg, output_dir=b) == 0
        for name in ("report.csv", "solid_0002.vtk", "beam_0002.vtk"):
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestConfig:
    def test_defaults_and_paths(self, tmp_path):
        cfg = write_case(tmp_path)
        doc = load_config(cfg)
        assert doc.mesh_file == tmp_path / "block.mesh"
        assert doc.output_dir == tmp_path / "out"
        assert doc.newton.n_load_steps == 2
        assert doc.kappa == 100.0

    def test_default_kappa(self):
        doc = parse_config("mesh_file = m\nsolid_youngs = 3.0\nsolid_poisson = 0.2\n")
        assert doc.kappa == 300.0
        assert doc.beam is None

    @pytest.mark.parametrize(
        "text",
        [
            "mesh_file = m\nsolid_youngs = 1\n",
            "mesh_file = m\nsolid_youngs = 1\nsolid_poisson = 0.6\n",
            "mesh_file = m\nsolid_youngs = one\nsolid_poisson = 0.3\n",
            "mesh_file = m\nsolid_youngs = 1\nsolid_poisson = 0.3\ncolour = red\n",
            "mesh_file = m\nsolid_youngs = 1\nsolid_poisson = 0.3\nkappa = -1\n",
            "mesh_file = m\nsolid_youngs = 1\nsolid_poisson = 0.3\nbeam_youngs = 5\n",
        ],
    )
    def test_invalid(self, text):
        with pytest.raises(ParseError):
            parse_config(text)


@pytest.fixture(scope="module")
def stretched():
    problem = clamped_stretch(0.05)
    states = newton_solve(problem, NewtonSettings(n_load_steps=2))
    return problem, states


class TestVtk:
    def test_reference_step(self, tmp_path):
        problem = clamped_stretch(0.05)
        n = problem.dofs
        solid_path, beam_path = write_vtk(
            tmp_path, 0, problem.solid, problem.beam, np.zeros(n.n_solid), np.zeros(n.n_beam)
        )
        solid = read_vtk(solid_path)
        assert_allclose(solid["points"], problem.solid.nodes, rtol=0, atol=0)
        beam = read_vtk(beam_path)
        expected = [hermite_eval(problem.beam.element_dofs(e), problem.beam.lengths[e], t)[0]
                    for e in range(problem.beam.n_elements) for t in np.linspace(0, 1, 5)]
        assert_allclose(beam["points"], expected, rtol=0, atol=1e-15)

    def test_format_contract(self, tmp_path, stretched):
        problem, states = stretched
        s = states[-1]
        sp, bp = write_vtk(tmp_path, 2, problem.solid, problem.beam, s.d_solid, s.d_beam, s.multipliers)
        text = sp.read_text().splitlines()
        assert text[0] == "# vtk DataFile Version 3.0"
        solid = read_vtk(sp)
        beam = read_vtk(bp)
        assert len(solid["cells"]) == problem.solid.n_elements
        assert set(solid["cell_types"]) == {12}
        assert len(beam["points"]) == 5 * problem.beam.n_elements
        assert set(beam["cell_types"]) == {4}
        assert_allclose(solid["points"], problem.solid.nodes + s.d_solid.reshape(-1, 3), rtol=1e-15)
        assert_allclose(solid["point_data"]["displacement"], s.d_solid.reshape(-1, 3), rtol=1e-15)

    def test_multiplier_round_trip(self, tmp_path, stretched):
        problem, states = stretched
        s = states[-1]
        assert np.abs(s.multipliers).max() > 0
        _, bp = write_vtk(tmp_path, 2, problem.solid, problem.beam, s.d_solid, s.d_beam, s.multipliers)
        lam = read_vtk(bp)["point_data"]["lambda"]
        expected = [multiplier_at(s.multipliers, problem.beam, e, t)
                    for e in range(problem.beam.n_elements) for t in np.linspace(0, 1, 5)]
        assert_allclose(lam, expected, rtol=1e-15, atol=1e-300)

    def test_unwritable_directory(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        problem = clamped_stretch(0.05)
        with pytest.raises(OSError):
            write_vtk(blocker / "sub", 1, problem.solid, problem.beam,
                      np.zeros(problem.dofs.n_solid), np.zeros(problem.dofs.n_beam))


class TestReport:
    def test_rows_and_resummed_reactions(self, tmp_path, stretched):
        problem, states = stretched
        report = RunReport()
        for s in states:
            report.add(s)
        path = write_report(report, tmp_path / "r.csv")
        rows = read_report(path)[1:]
        assert len(rows) == 2
        for row, s in zip(rows, states):
            # independent re-summation from a fresh residual evaluation
            residual = assemble_global(problem, s.d, s.load_factor).residual
            total = np.zeros(3)
            for idx, value in zip(problem.dofs.constrained, problem.u_prescribed[problem.dofs.constrained]):
                if value != 0.0:
                    total[problem.dofs.lookup(int(idx))[2]] += residual[idx]
            assert_allclose([float(v) for v in row[5:]], total, rtol=1e-12)
            assert float(row[5]) > 0.0

    def test_zero_load_rows(self, tmp_path):
        problem = clamped_stretch(0.0)
        report = RunReport()
        for s in newton_solve(problem, NewtonSettings(n_load_steps=2)):
            report.add(s)
        rows = read_report(write_report(report, tmp_path / "r.csv"))[1:]
        assert all(float(v) == 0.0 for row in rows for v in row[5:])

    def test_seventeen_digits(self, tmp_path, stretched):
        _, states = stretched
        report = RunReport()
        report.add(states[0])
        row = read_report(write_report(report, tmp_path / "r.csv"))[1]
        assert float(row[5]) == states[0].reaction_resultant()[0]

    def test_empty_report(self, tmp_path):
        with pytest.raises(ValueError):
            write_report(RunReport(), tmp_path / "r.csv")
