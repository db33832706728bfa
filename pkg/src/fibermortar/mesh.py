"""Reference geometry, shape functions and dof numbering for solid and beam.

Solid: 8-node trilinear hexahedra, node ordering

    3---2        7---6
    |   |  z=-1  |   |  z=+1
    0---1        4---5

Beam: two-node cubic Hermite elements with a position and a tangent vector
per node. Beam dofs per node are ``(ux, uy, uz, tx, ty, tz)`` where the last
three are increments of the nodal tangent.
"""
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._jit import njit
from .errors import GeometryError, ParseError
from .quadrature import gauss_hex, gauss_unit_interval

HEX8_CORNERS = np.array(
    [
        [-1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0],
        [1.0, 1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
        [1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0],
        [-1.0, 1.0, 1.0],
    ]
)

SOLID = "solid"
BEAM = "beam"
_FIELD_ALIASES = {"solid": SOLID, "s": SOLID, "beam": BEAM, "b": BEAM}


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


@njit
def hex8_shape_kernel(xi, corners):
    values = np.empty(8)
    grads = np.empty((8, 3))
    for a in range(8):
        fx = 1.0 + corners[a, 0] * xi[0]
        fy = 1.0 + corners[a, 1] * xi[1]
        fz = 1.0 + corners[a, 2] * xi[2]
        values[a] = 0.125 * fx * fy * fz
        grads[a, 0] = 0.125 * corners[a, 0] * fy * fz
        grads[a, 1] = 0.125 * fx * corners[a, 1] * fz
        grads[a, 2] = 0.125 * fx * fy * corners[a, 2]
    return values, grads


@njit
def hermite_basis_kernel(t, L0):
    """Coefficients of (pos_a, tan_a, pos_b, tan_b) for r, dr/ds, d2r/ds2."""
    h0 = np.empty(4)
    h1 = np.empty(4)
    h2 = np.empty(4)
    t2 = t * t
    t3 = t2 * t
    h0[0] = 1.0 - 3.0 * t2 + 2.0 * t3
    h0[1] = L0 * (t - 2.0 * t2 + t3)
    h0[2] = 3.0 * t2 - 2.0 * t3
    h0[3] = L0 * (t3 - t2)
    h1[0] = (-6.0 * t + 6.0 * t2) / L0
    h1[1] = 1.0 - 4.0 * t + 3.0 * t2
    h1[2] = (6.0 * t - 6.0 * t2) / L0
    h1[3] = 3.0 * t2 - 2.0 * t
    h2[0] = (-6.0 + 12.0 * t) / (L0 * L0)
    h2[1] = (-4.0 + 6.0 * t) / L0
    h2[2] = (6.0 - 12.0 * t) / (L0 * L0)
    h2[3] = (6.0 * t - 2.0) / L0
    return h0, h1, h2


def hex8_shape(xi):
    """Trilinear shape values ``(8,)`` and gradients ``(8, 3)`` w.r.t. xi."""
    xi = np.asarray(xi, dtype=float)
    return hex8_shape_kernel(xi, HEX8_CORNERS)


def hermite_basis(t, L0):
    return hermite_basis_kernel(float(t), float(L0))


def hermite_eval(q, L0, t):
    """Evaluate a Hermite centerline element.

    Parameters
    ----------
    q : array_like, shape (4, 3)
        ``(pos_a, tan_a, pos_b, tan_b)``.
    L0 : float
        Reference length; tangents are scaled by it.
    t : float
        Local coordinate in [0, 1].

    Returns
    -------
    r, dr_ds, d2r_ds2 : ndarray, shape (3,)
    """
    if L0 <= 0:
        raise GeometryError(f"beam reference length must be positive, got {L0}")
    q = np.asarray(q, dtype=float).reshape(4, 3)
    h0, h1, h2 = hermite_basis(t, L0)
    return h0 @ q, h1 @ q, h2 @ q


# --------------------------------------------------------------------------
# meshes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SolidMesh:
    nodes: np.ndarray
    elements: np.ndarray
    dirichlet: tuple = ()
    neumann: tuple = ()

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_elements(self):
        return len(self.elements)

    def element_coords(self, e):
        return self.nodes[self.elements[e]]

    def element_diameter(self, e):
        x = self.element_coords(e)
        return float(np.max(np.linalg.norm(x[:, None, :] - x[None, :, :], axis=-1)))


@dataclass(frozen=True)
class BeamMesh:
    positions: np.ndarray
    tangents: np.ndarray
    elements: np.ndarray
    lengths: np.ndarray
    dirichlet: tuple = ()
    neumann: tuple = ()

    @property
    def n_nodes(self):
        return len(self.positions)

    @property
    def n_elements(self):
        return len(self.elements)

    def element_dofs(self, e):
        """Reference ``(pos_a, tan_a, pos_b, tan_b)`` of element ``e``."""
        a, b = self.elements[e]
        return np.array(
            [self.positions[a], self.tangents[a], self.positions[b], self.tangents[b]]
        )

    @property
    def total_length(self):
        return float(np.sum(self.lengths))


def _validate_solid(mesh):
    nn = mesh.n_nodes
    if not np.all(np.isfinite(mesh.nodes)):
        raise GeometryError("solid node coordinates must be finite")
    pts, _ = gauss_hex(2)
    for e, conn in enumerate(mesh.elements):
        if np.any(conn < 0) or np.any(conn >= nn):
            raise GeometryError(f"solid element {e} references a node outside 0..{nn - 1}")
        if len(set(conn.tolist())) != 8:
            raise GeometryError(f"solid element {e} repeats a node index")
        X = mesh.nodes[conn]
        for xi in pts:
            _, dN = hex8_shape(xi)
            det = np.linalg.det(X.T @ dN)
            if not det > 0.0:
                raise GeometryError(
                    f"solid element {e} is inverted or degenerate (det J = {det:.3e})"
                )
    for node, comp, _ in mesh.dirichlet + mesh.neumann:
        if not (0 <= node < nn and 0 <= comp < 3):
            raise GeometryError(f"solid boundary entry ({node}, {comp}) out of range")


def hermite_arc_length(q, L0, n=12):
    t, w = gauss_unit_interval(n)
    total = 0.0
    for ti, wi in zip(t, w):
        _, dr, _ = hermite_eval(q, L0, ti)
        total += wi * L0 * np.linalg.norm(dr)
    return total


def _validate_beam(mesh, rtol=1e-6):
    nn = mesh.n_nodes
    if not (np.all(np.isfinite(mesh.positions)) and np.all(np.isfinite(mesh.tangents))):
        raise GeometryError("beam node data must be finite")
    for e, (a, b) in enumerate(mesh.elements):
        if not (0 <= a < nn and 0 <= b < nn):
            raise GeometryError(f"beam element {e} references a node outside 0..{nn - 1}")
        if a == b:
            raise GeometryError(f"beam element {e} repeats a node index")
        L0 = mesh.lengths[e]
        if not L0 > 0.0:
            raise GeometryError(f"beam element {e} has non-positive reference length {L0}")
        arc = hermite_arc_length(mesh.element_dofs(e), L0)
        if abs(arc - L0) > rtol * L0:
            raise GeometryError(
                f"beam element {e}: reference length {L0} inconsistent with "
                f"Hermite arc length {arc}"
            )
    for node, comp, _ in mesh.dirichlet + mesh.neumann:
        if not (0 <= node < nn and 0 <= comp < 6):
            raise GeometryError(f"beam boundary entry ({node}, {comp}) out of range")


def make_solid_mesh(nodes, elements, dirichlet=(), neumann=()):
    mesh = SolidMesh(
        np.asarray(nodes, dtype=float).reshape(-1, 3),
        np.asarray(elements, dtype=np.int64).reshape(-1, 8),
        tuple((int(n), int(c), float(v)) for n, c, v in dirichlet),
        tuple((int(n), int(c), float(v)) for n, c, v in neumann),
    )
    _validate_solid(mesh)
    return mesh


def make_beam_mesh(positions, tangents, elements, lengths=None, dirichlet=(), neumann=()):
    """Build and validate a beam mesh.

    ``lengths`` defaults to the chord lengths, which is exact for straight
    elements only.
    """
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    tangents = np.asarray(tangents, dtype=float).reshape(-1, 3)
    elements = np.asarray(elements, dtype=np.int64).reshape(-1, 2)
    if lengths is None:
        lengths = np.linalg.norm(positions[elements[:, 1]] - positions[elements[:, 0]], axis=1)
    mesh = BeamMesh(
        positions,
        tangents,
        elements,
        np.asarray(lengths, dtype=float).reshape(-1),
        tuple((int(n), int(c), float(v)) for n, c, v in dirichlet),
        tuple((int(n), int(c), float(v)) for n, c, v in neumann),
    )
    _validate_beam(mesh)
    return mesh


def empty_beam_mesh():
    return BeamMesh(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 2), np.int64), np.zeros(0))


# --------------------------------------------------------------------------
# dof numbering
# --------------------------------------------------------------------------


class DofMap:
    """Global equation numbering: solid displacements first, then beam dofs.

    Solid node ``n`` owns ``3n .. 3n+2``; beam node ``m`` owns
    ``3 N_s + 6m .. 3 N_s + 6m + 5``.
    """

    def __init__(self, solid, beam):
        self.n_solid_nodes = solid.n_nodes
        self.n_beam_nodes = beam.n_nodes
        self.n_solid = 3 * self.n_solid_nodes
        self.n_beam = 6 * self.n_beam_nodes
        self.n_dofs = self.n_solid + self.n_beam
        constrained = set()
        for node, comp, _ in solid.dirichlet:
            constrained.add(self.index(SOLID, node, comp))
        for node, comp, _ in beam.dirichlet:
            constrained.add(self.index(BEAM, node, comp))
        self.constrained = np.array(sorted(constrained), dtype=np.int64)
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.constrained] = False
        self.free = np.flatnonzero(mask)

    def index(self, field, node, comp):
        field = _FIELD_ALIASES.get(field, field)
        if field == SOLID:
            if not (0 <= node < self.n_solid_nodes and 0 <= comp < 3):
                raise KeyError((field, node, comp))
            return 3 * node + comp
        if field == BEAM:
            if not (0 <= node < self.n_beam_nodes and 0 <= comp < 6):
                raise KeyError((field, node, comp))
            return self.n_solid + 6 * node + comp
        raise KeyError((field, node, comp))

    def lookup(self, idx):
        """Inverse of :meth:`index`."""
        if not 0 <= idx < self.n_dofs:
            raise KeyError(idx)
        if idx < self.n_solid:
            return SOLID, idx // 3, idx % 3
        j = idx - self.n_solid
        return BEAM, j // 6, j % 6

    @property
    def solid_slice(self):
        return slice(0, self.n_solid)

    @property
    def beam_slice(self):
        return slice(self.n_solid, self.n_dofs)

    def beam_position_dofs(self, comp=None):
        """Global indices of beam positional dofs (optionally one component)."""
        comps = range(3) if comp is None else [comp]
        return np.array(
            sorted(self.n_solid + 6 * m + c for m in range(self.n_beam_nodes) for c in comps),
            dtype=np.int64,
        )


# --------------------------------------------------------------------------
# text format
# --------------------------------------------------------------------------

_SECTIONS = {
    "NODES": 4,
    "HEX8": 8,
    "BEAM_NODES": 7,
    "BEAM_ELEMS": 4,
    "DIRICHLET": 4,
    "NEUMANN": 4,
}


def _strip(line):
    return line.split("#", 1)[0].strip()


def parse_mesh_text(text, path=None):
    """Parse the sectioned mesh format into raw section tables.

    Returns a dict mapping section name to a list of ``(lineno, tokens)``.
    """
    lines = text.splitlines()
    sections = {}
    i = 0
    while i < len(lines):
        content = _strip(lines[i])
        i += 1
        if not content:
            continue
        head = content.split()
        name = head[0].upper()
        if name not in _SECTIONS:
            raise ParseError(f"unknown section header {head[0]!r}", i, path)
        if len(head) != 2:
            raise ParseError(f"section {name} expects a single count", i, path)
        try:
            count = int(head[1])
        except ValueError:
            raise ParseError(f"bad count {head[1]!r} for section {name}", i, path) from None
        if count < 0:
            raise ParseError(f"negative count for section {name}", i, path)
        if name in sections:
            raise ParseError(f"duplicate section {name}", i, path)
        rows = []
        while len(rows) < count:
            if i >= len(lines):
                raise ParseError(f"section {name} ended after {len(rows)} of {count} rows", i, path)
            content = _strip(lines[i])
            i += 1
            if not content:
                continue
            toks = content.split()
            if len(toks) != _SECTIONS[name]:
                raise ParseError(
                    f"section {name} expects {_SECTIONS[name]} fields, got {len(toks)}", i, path
                )
            rows.append((i, toks))
        sections[name] = rows
    return sections


def _num(tok, kind, lineno, path):
    try:
        return kind(tok)
    except ValueError:
        raise ParseError(f"cannot parse {tok!r} as {kind.__name__}", lineno, path) from None


def _ids_to_rows(rows, path, what):
    """Map file ids to dense row indices, checking uniqueness."""
    ids = {}
    for k, (lineno, toks) in enumerate(rows):
        nid = _num(toks[0], int, lineno, path)
        if nid in ids:
            raise ParseError(f"duplicate {what} id {nid}", lineno, path)
        ids[nid] = k
    return ids


def meshes_from_text(text, path=None):
    """Build validated ``(SolidMesh, BeamMesh)`` from mesh-format text."""
    sec = parse_mesh_text(text, path)
    if "NODES" not in sec or "HEX8" not in sec:
        raise ParseError("mesh needs NODES and HEX8 sections", None, path)

    solid_rows = sec["NODES"]
    sid = _ids_to_rows(solid_rows, path, "node")
    nodes = [[_num(t, float, ln, path) for t in toks[1:]] for ln, toks in solid_rows]

    def solid_node(tok, ln):
        nid = _num(tok, int, ln, path)
        if nid not in sid:
            raise ParseError(f"unknown solid node id {nid}", ln, path)
        return sid[nid]

    elements = [[solid_node(t, ln) for t in toks] for ln, toks in sec["HEX8"]]

    beam_rows = sec.get("BEAM_NODES", [])
    bid = _ids_to_rows(beam_rows, path, "beam node")
    positions = [[_num(t, float, ln, path) for t in toks[1:4]] for ln, toks in beam_rows]
    tangents = [[_num(t, float, ln, path) for t in toks[4:7]] for ln, toks in beam_rows]

    def beam_node(tok, ln):
        nid = _num(tok, int, ln, path)
        if nid not in bid:
            raise ParseError(f"unknown beam node id {nid}", ln, path)
        return bid[nid]

    belems, lengths = [], []
    for ln, toks in sec.get("BEAM_ELEMS", []):
        belems.append([beam_node(toks[1], ln), beam_node(toks[2], ln)])
        lengths.append(_num(toks[3], float, ln, path))

    bcs = {("DIRICHLET", SOLID): [], ("DIRICHLET", BEAM): [],
           ("NEUMANN", SOLID): [], ("NEUMANN", BEAM): []}
    for kind in ("DIRICHLET", "NEUMANN"):
        for ln, toks in sec.get(kind, []):
            fld = _FIELD_ALIASES.get(toks[0].lower())
            if fld is None:
                raise ParseError(f"unknown field {toks[0]!r} (expected solid or beam)", ln, path)
            node = solid_node(toks[1], ln) if fld == SOLID else beam_node(toks[1], ln)
            comp = _num(toks[2], int, ln, path)
            if not 0 <= comp < (3 if fld == SOLID else 6):
                raise ParseError(f"component {comp} out of range for {fld}", ln, path)
            bcs[(kind, fld)].append((node, comp, _num(toks[3], float, ln, path)))

    solid = make_solid_mesh(
        nodes, elements, bcs[("DIRICHLET", SOLID)], bcs[("NEUMANN", SOLID)]
    )
    if beam_rows:
        beam = make_beam_mesh(
            positions, tangents, belems, lengths,
            bcs[("DIRICHLET", BEAM)], bcs[("NEUMANN", BEAM)],
        )
    else:
        beam = empty_beam_mesh()
    return solid, beam


def read_mesh_file(path):
    path = Path(path)
    return meshes_from_text(path.read_text(encoding="ascii"), str(path))


def load_meshes(config):
    """Load meshes named by a config document (or a mesh path) and number dofs."""
    path = getattr(config, "mesh_file", config)
    solid, beam = read_mesh_file(path)
    return solid, beam, DofMap(solid, beam)


def format_mesh(solid, beam):
    """Serialize meshes back into the text format (ids are row indices)."""
    out = [f"NODES {solid.n_nodes}"]
    out += [f"{i} {x!r} {y!r} {z!r}" for i, (x, y, z) in enumerate(solid.nodes.tolist())]
    out.append(f"HEX8 {solid.n_elements}")
    out += [" ".join(str(n) for n in conn) for conn in solid.elements.tolist()]
    if beam.n_nodes:
        out.append(f"BEAM_NODES {beam.n_nodes}")
        for i in range(beam.n_nodes):
            vals = list(beam.positions[i]) + list(beam.tangents[i])
            out.append(f"{i} " + " ".join(repr(float(v)) for v in vals))
        out.append(f"BEAM_ELEMS {beam.n_elements}")
        for e, (a, b) in enumerate(beam.elements.tolist()):
            out.append(f"{e} {a} {b} {float(beam.lengths[e])!r}")
    for kind, attr in (("DIRICHLET", "dirichlet"), ("NEUMANN", "neumann")):
        rows = [(SOLID, *r) for r in getattr(solid, attr)] + [(BEAM, *r) for r in getattr(beam, attr)]
        if rows:
            out.append(f"{kind} {len(rows)}")
            out += [f"{f} {n} {c} {v!r}" for f, n, c, v in rows]
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# structured helpers
# --------------------------------------------------------------------------


def box_mesh(nx, ny, nz, lower=(0.0, 0.0, 0.0), upper=(1.0, 1.0, 1.0)):
    """Node array and hex connectivity for a structured box."""
    xs = np.linspace(lower[0], upper[0], nx + 1)
    ys = np.linspace(lower[1], upper[1], ny + 1)
    zs = np.linspace(lower[2], upper[2], nz + 1)
    nodes = np.array([[x, y, z] for z in zs for y in ys for x in xs])

    def nid(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    elems = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                elems.append([
                    nid(i, j, k), nid(i + 1, j, k), nid(i + 1, j + 1, k), nid(i, j + 1, k),
                    nid(i, j, k + 1), nid(i + 1, j, k + 1), nid(i + 1, j + 1, k + 1),
                    nid(i, j + 1, k + 1),
                ])
    return nodes, np.array(elems, dtype=np.int64)


def straight_beam(start, end, n_elements):
    """Positions, unit tangents, connectivity and lengths of a straight fiber."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    direction = end - start
    length = np.linalg.norm(direction)
    tangent = direction / length
    s = np.linspace(0.0, 1.0, n_elements + 1)
    positions = start + s[:, None] * direction
    tangents = np.tile(tangent, (n_elements + 1, 1))
    elements = np.array([[i, i + 1] for i in range(n_elements)], dtype=np.int64)
    lengths = np.full(n_elements, length / n_elements)
    return positions, tangents, elements, lengths
