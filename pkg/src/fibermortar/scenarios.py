"""Small reference problems used by the test suite and the benchmark."""
import numpy as np

from .beam import BeamMaterial
from .mesh import DofMap, box_mesh, make_beam_mesh, make_solid_mesh, straight_beam
from .solid import SolidMaterial
from .solver import Problem, build_problem


def _face(nodes, axis, value, tol=1e-12):
    return np.flatnonzero(np.abs(nodes[:, axis] - value) < tol)


def _boundary(nodes, lower=(0, 0, 0), upper=(1, 1, 1), tol=1e-12):
    on = np.zeros(len(nodes), dtype=bool)
    for ax in range(3):
        on |= np.abs(nodes[:, ax] - lower[ax]) < tol
        on |= np.abs(nodes[:, ax] - upper[ax]) < tol
    return np.flatnonzero(on)


def clamped_end(node, axis):
    """Dirichlet entries clamping a beam node whose reference tangent is along ``axis``.

    The tangent component along the fiber stays free: it carries the axial
    stretch of a Hermite centerline, not a rotation.
    """
    return [(node, c, 0.0) for c in range(3)] + [
        (node, 3 + c, 0.0) for c in range(3) if c != axis
    ]


def circular_section(radius):
    """Area and second moment of a solid circular cross-section."""
    return np.pi * radius**2, np.pi * radius**4 / 4.0


def single_hex_single_beam(kappa=None, E_solid=1.0, nu=0.3, E_beam=10.0, radius=0.05):
    """Unit-cube hex with one inclined beam element inside; no boundary conditions."""
    nodes, elems = box_mesh(1, 1, 1)
    solid = make_solid_mesh(nodes, elems)
    pos, tan, bel, L = straight_beam((0.2, 0.3, 0.25), (0.75, 0.6, 0.7), 1)
    beam = make_beam_mesh(pos, tan, bel, L)
    A, I = circular_section(radius)
    return build_problem(
        solid, beam, SolidMaterial(E_solid, nu), BeamMaterial(E_beam, A, I), kappa=kappa
    )


PATCH_GRADIENT = np.array(
    [[0.010, 0.002, 0.000], [0.000, -0.003, 0.001], [0.0005, 0.000, 0.004]]
)


def patch_test(kappa_factor=1e4, E_solid=1.0, E_beam=100.0, radius=0.01, gradient=PATCH_GRADIENT,
               n_beam_elements=4):
    """2x2x2 block crossed by an inclined fiber, affine displacement on the boundary.

    The fiber runs from face x=0 to face x=1; its end positions belong to the
    boundary and receive the affine field as well.
    """
    nodes, elems = box_mesh(2, 2, 2)
    dirichlet = [
        (int(n), c, float((gradient @ nodes[n])[c])) for n in _boundary(nodes) for c in range(3)
    ]
    solid = make_solid_mesh(nodes, elems, dirichlet)
    pos, tan, bel, L = straight_beam((0.0, 0.15, 0.2), (1.0, 0.8, 0.75), n_beam_elements)
    ends = (0, n_beam_elements)
    beam_bc = [(n, c, float((gradient @ pos[n])[c])) for n in ends for c in range(3)]
    beam = make_beam_mesh(pos, tan, bel, L, beam_bc)
    A, I = circular_section(radius)
    return build_problem(
        solid, beam, SolidMaterial(E_solid, 0.3), BeamMaterial(E_beam, A, I),
        kappa=kappa_factor * E_solid,
    )


def clamped_stretch(stretch, fiber_axis=0, kappa_factor=1e2, E_solid=1.0, E_beam=10.0,
                    radius=0.05, n_cells=2, n_beam_elements=4):
    """Block clamped at x=0 and pulled by ``stretch`` (m) in x at x=1.

    ``fiber_axis`` 0 places the fiber along the stretch direction, 1 places it
    transverse (along y).
    """
    nodes, elems = box_mesh(n_cells, n_cells, n_cells)
    dirichlet = [(int(n), c, 0.0) for n in _face(nodes, 0, 0.0) for c in range(3)]
    dirichlet += [(int(n), c, stretch if c == 0 else 0.0) for n in _face(nodes, 0, 1.0) for c in range(3)]
    solid = make_solid_mesh(nodes, elems, dirichlet)
    if fiber_axis == 0:
        start, end = (0.05, 0.3, 0.4), (0.95, 0.3, 0.4)
    else:
        start, end = (0.3, 0.05, 0.4), (0.3, 0.95, 0.4)
    pos, tan, bel, L = straight_beam(start, end, n_beam_elements)
    beam = make_beam_mesh(pos, tan, bel, L)
    A, I = circular_section(radius)
    return build_problem(
        solid, beam, SolidMaterial(E_solid, 0.3), BeamMaterial(E_beam, A, I),
        kappa=kappa_factor * E_solid,
    )


def cantilever(n_elements, tip_load, E=1.0, radius=0.05, length=1.0):
    """Clamped beam along x with a transverse tip force and no coupling.

    A fully fixed dummy hex far away keeps the solid block of the system
    non-singular.
    """
    pos, tan, bel, L = straight_beam((0.0, 0.0, 0.0), (length, 0.0, 0.0), n_elements)
    beam = make_beam_mesh(pos, tan, bel, L, clamped_end(0, axis=0), [(n_elements, 1, tip_load)])
    nodes, elems = box_mesh(1, 1, 1, (2.0, 2.0, 2.0), (3.0, 3.0, 3.0))
    solid = make_solid_mesh(nodes, elems, [(n, c, 0.0) for n in range(8) for c in range(3)])
    A, I = circular_section(radius)
    return Problem(solid, beam, SolidMaterial(1.0, 0.3), BeamMaterial(E, A, I), mortar=None)


def prestressed_fiber_unloading(n_steps=20, E_beam=200.0, E_solid=None, radius=0.02,
                                prestrain=0.01, kappa_factor=1e2, settings=None):
    """Pre-stretched fiber tied into a soft coating, then released.

    Stage one loads a clamped fiber axially on its own. Stage two ties the
    stretched fiber into an undeformed coating block (``E_solid = E_beam /
    200`` by default) and reduces the end load linearly to zero over
    ``n_steps`` steps. Returns ``(stage1_states, stage2_problem, stage2_states)``.
    """
    from .solver import NewtonSettings, newton_solve

    if E_solid is None:
        E_solid = E_beam / 200.0
    settings = settings or NewtonSettings(max_iterations=25)
    A, I = circular_section(radius)
    beam_material = BeamMaterial(E_beam, A, I)
    force = prestrain * beam_material.EA
    n_el = 4
    pos, tan, bel, L = straight_beam((0.0, 0.1, 0.1), (0.8, 0.1, 0.1), n_el)
    clamp = clamped_end(0, axis=0)

    nodes, elems = box_mesh(5, 1, 1, (0.0, 0.0, 0.0), (1.0, 0.2, 0.2))
    coating = make_solid_mesh(
        nodes, elems, [(int(n), c, 0.0) for n in _face(nodes, 0, 0.0) for c in range(3)]
    )
    solid_material = SolidMaterial(E_solid, 0.3)

    # stage one: fiber alone under its end load
    loaded = make_beam_mesh(pos, tan, bel, L, clamp, [(n_el, 0, force)])
    stage1 = Problem(coating, loaded, solid_material, beam_material, mortar=None)
    states1 = newton_solve(
        stage1, NewtonSettings(settings.max_iterations, settings.abs_tol, settings.rel_tol, 2)
    )
    tie = states1[-1].d_beam.copy()

    # stage two: tie into the coating, hold the load and ramp it off
    releasing = make_beam_mesh(pos, tan, bel, L, clamp, [(n_el, 0, -force)])
    dofs = DofMap(coating, releasing)
    f_fixed = np.zeros(dofs.n_dofs)
    f_fixed[dofs.index("beam", n_el, 0)] = force
    d0 = np.zeros(dofs.n_dofs)
    d0[dofs.beam_slice] = tie
    stage2 = build_problem(
        coating, releasing, solid_material, beam_material, kappa=kappa_factor * E_solid,
        beam_tie_state=tie, dofs=dofs, f_fixed=f_fixed, d0=d0,
    )
    states2 = newton_solve(
        stage2,
        NewtonSettings(settings.max_iterations, settings.abs_tol, settings.rel_tol, n_steps),
    )
    return states1, stage2, states2
