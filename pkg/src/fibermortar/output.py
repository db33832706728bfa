"""Legacy ASCII VTK and CSV writers, plus a minimal VTK reader."""
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mesh import hermite_eval
from .mortar import multiplier_at

BEAM_SAMPLES = 5
VTK_HEXAHEDRON = 12
VTK_POLY_LINE = 4
REPORT_HEADER = ("step", "load_factor", "iterations", "residual", "max_gap", "rx", "ry", "rz")


def _fmt(x):
    return format(float(x), ".17g")


def _vectors(name, data):
    lines = [f"VECTORS {name} double"]
    lines += [" ".join(_fmt(v) for v in row) for row in data]
    return lines


def beam_samples(beam, d_beam, multipliers=None, n=BEAM_SAMPLES):
    """Deformed points, displacements and line loads sampled along each element."""
    d = np.asarray(d_beam, dtype=float).reshape(-1, 6)
    ts = np.linspace(0.0, 1.0, n)
    pts, disp, lam = [], [], []
    for e in range(beam.n_elements):
        a, b = beam.elements[e]
        q0 = beam.element_dofs(e)
        q = q0 + np.array([d[a, :3], d[a, 3:], d[b, :3], d[b, 3:]])
        L0 = float(beam.lengths[e])
        for t in ts:
            r, _, _ = hermite_eval(q, L0, t)
            r0, _, _ = hermite_eval(q0, L0, t)
            pts.append(r)
            disp.append(r - r0)
            lam.append(np.zeros(3) if multipliers is None else multiplier_at(multipliers, beam, e, t))
    return np.array(pts).reshape(-1, 3), np.array(disp).reshape(-1, 3), np.array(lam).reshape(-1, 3)


def write_vtk(directory, step, solid, beam, d_solid, d_beam, multipliers=None):
    """Write ``solid_XXXX.vtk`` and ``beam_XXXX.vtk``; returns both paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    u = np.asarray(d_solid, dtype=float).reshape(-1, 3)
    x = solid.nodes + u
    ne = solid.n_elements
    lines = [
        "# vtk DataFile Version 3.0",
        f"solid step {step}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {len(x)} double",
    ]
    lines += [" ".join(_fmt(v) for v in row) for row in x]
    lines.append(f"CELLS {ne} {9 * ne}")
    lines += ["8 " + " ".join(str(int(n)) for n in conn) for conn in solid.elements]
    lines.append(f"CELL_TYPES {ne}")
    lines += [str(VTK_HEXAHEDRON)] * ne
    lines.append(f"POINT_DATA {len(x)}")
    lines += _vectors("displacement", u)
    solid_path = directory / f"solid_{step:04d}.vtk"
    solid_path.write_text("\n".join(lines) + "\n", encoding="ascii")

    pts, disp, lam = beam_samples(beam, d_beam, multipliers)
    nb = beam.n_elements
    lines = [
        "# vtk DataFile Version 3.0",
        f"beam step {step}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {len(pts)} double",
    ]
    lines += [" ".join(_fmt(v) for v in row) for row in pts]
    lines.append(f"CELLS {nb} {nb * (BEAM_SAMPLES + 1)}")
    for e in range(nb):
        ids = range(e * BEAM_SAMPLES, (e + 1) * BEAM_SAMPLES)
        lines.append(f"{BEAM_SAMPLES} " + " ".join(str(i) for i in ids))
    lines.append(f"CELL_TYPES {nb}")
    lines += [str(VTK_POLY_LINE)] * nb
    lines.append(f"POINT_DATA {len(pts)}")
    lines += _vectors("displacement", disp)
    lines += _vectors("lambda", lam)
    beam_path = directory / f"beam_{step:04d}.vtk"
    beam_path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return solid_path, beam_path


def read_vtk(path):
    """Parse files produced by :func:`write_vtk`.

    Returns a dict with ``points``, ``cells`` (list of id lists),
    ``cell_types`` and ``point_data`` (name -> (n, 3) array).
    """
    tokens = Path(path).read_text(encoding="ascii").split("\n")
    it = iter(tokens[4:])
    out = {"point_data": {}}
    for line in it:
        parts = line.split()
        if not parts:
            continue
        key = parts[0]
        if key == "POINTS":
            n = int(parts[1])
            out["points"] = np.array([[float(v) for v in next(it).split()] for _ in range(n)])
            out["points"] = out["points"].reshape(n, 3)
        elif key == "CELLS":
            m = int(parts[1])
            out["cells"] = [[int(v) for v in next(it).split()[1:]] for _ in range(m)]
        elif key == "CELL_TYPES":
            m = int(parts[1])
            out["cell_types"] = [int(next(it)) for _ in range(m)]
        elif key == "POINT_DATA":
            npd = int(parts[1])
        elif key == "VECTORS":
            data = [[float(v) for v in next(it).split()] for _ in range(npd)]
            out["point_data"][parts[1]] = np.array(data).reshape(npd, 3)
    return out


@dataclass
class StepRecord:
    step: int
    load_factor: float
    converged: bool
    iterations: int
    residual: float
    max_gap: float
    reaction: np.ndarray


@dataclass
class RunReport:
    records: list = field(default_factory=list)

    def add(self, state):
        self.records.append(
            StepRecord(
                step=state.step,
                load_factor=state.load_factor,
                converged=state.converged,
                iterations=state.iterations,
                residual=state.residual_history[-1],
                max_gap=state.max_gap,
                reaction=state.reaction_resultant(),
            )
        )

    @property
    def all_converged(self):
        return bool(self.records) and all(r.converged for r in self.records)


def write_report(report, path):
    if not report.records:
        raise ValueError("cannot write an empty report")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for r in report.records:
            writer.writerow(
                [r.step, _fmt(r.load_factor), r.iterations, _fmt(r.residual), _fmt(r.max_gap)]
                + [_fmt(v) for v in r.reaction]
            )
    return path
