"""Mortar-coupled beam fibers embedded in hyperelastic solids."""
from ._jit import backend
from .beam import BeamMaterial, axial_strain, beam_element_force_stiffness, curvature
from .errors import (
    AssemblyError,
    ConvergenceError,
    EmbeddingError,
    FiberMortarError,
    GeometryError,
    KinematicsError,
    ParseError,
    SolverError,
)
from .mesh import (
    BeamMesh,
    DofMap,
    SolidMesh,
    hermite_eval,
    hex8_shape,
    load_meshes,
    make_beam_mesh,
    make_solid_mesh,
)
from .mortar import (
    CouplingPoint,
    MortarSystem,
    assemble_mortar,
    constraint_gap,
    generate_coupling_points,
    penalty_condense,
    project_point_to_solid,
)
from .solid import (
    SolidMaterial,
    deformation_gradient,
    green_lagrange,
    pk2_stvk,
    solid_element_force_stiffness,
)
from .solver import (
    NewtonSettings,
    Problem,
    SolverState,
    assemble_global,
    build_problem,
    linear_solve,
    newton_solve,
)

__version__ = "0.1.0"
