"""Global assembly and load-stepped Newton-Raphson for the coupled problem."""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .beam import BeamMaterial, assemble_beam
from .errors import ConvergenceError, SolverError
from .mesh import DofMap
from .mortar import (
    SolidLocator,
    assemble_mortar,
    constraint_gap,
    generate_coupling_points,
    penalty_condense,
)
from .solid import SolidMaterial, assemble_solid

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NewtonSettings:
    max_iterations: int = 20
    abs_tol: float = 1e-8
    rel_tol: float = 1e-10
    n_load_steps: int = 1

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("Newton tolerances must be positive")
        if self.n_load_steps < 1:
            raise ValueError("n_load_steps must be >= 1")


@dataclass
class Problem:
    """Everything needed to evaluate the coupled residual.

    Loads follow ``f(l) = f_fixed + l * f_ext`` and prescribed values
    ``d_c(l) = d0_c + l * u_c`` for load factor ``l``.
    """

    solid: object
    beam: object
    solid_material: SolidMaterial
    beam_material: BeamMaterial
    mortar: object = None
    dofs: DofMap = None
    n_gauss_solid: int = 2
    n_gauss_beam: int = 6
    f_fixed: np.ndarray = None
    d0: np.ndarray = None
    f_ext: np.ndarray = field(init=False)
    u_prescribed: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.dofs is None:
            self.dofs = DofMap(self.solid, self.beam)
        n = self.dofs.n_dofs
        self.f_ext = np.zeros(n)
        self.u_prescribed = np.zeros(n)
        for fld, mesh in (("solid", self.solid), ("beam", self.beam)):
            for node, comp, value in mesh.neumann:
                self.f_ext[self.dofs.index(fld, node, comp)] += value
            for node, comp, value in mesh.dirichlet:
                self.u_prescribed[self.dofs.index(fld, node, comp)] = value
        self.f_fixed = np.zeros(n) if self.f_fixed is None else np.asarray(self.f_fixed, float)
        self.d0 = np.zeros(n) if self.d0 is None else np.asarray(self.d0, float).copy()

    def external_force(self, load_factor):
        return self.f_fixed + load_factor * self.f_ext

    @property
    def driven(self):
        """Mask over constrained dofs that carry a load-scaled prescribed value.

        Falls back to all constrained dofs when nothing is driven.
        """
        mask = self.u_prescribed[self.dofs.constrained] != 0.0
        return mask if mask.any() else np.ones_like(mask)

    def prescribed(self, load_factor):
        c = self.dofs.constrained
        return self.d0[c] + load_factor * self.u_prescribed[c]


def build_problem(solid, beam, solid_material, beam_material, kappa=None,
                  n_gauss_mortar=6, beam_tie_state=None, **kwargs):
    """Locate coupling points, assemble the mortar system and wrap a Problem.

    ``kappa`` defaults to ``100 * E_solid``. ``beam_tie_state`` is the beam
    displacement at which the fiber is tied to the (undeformed) solid.
    """
    if kappa is None:
        kappa = 100.0 * solid_material.youngs_modulus
    mortar = None
    if beam.n_elements:
        points = generate_coupling_points(
            beam, solid, n_gauss_mortar, beam_disp=beam_tie_state, locator=SolidLocator(solid)
        )
        mortar = assemble_mortar(points, beam, solid, kappa, beam_reference=beam_tie_state)
    return Problem(solid, beam, solid_material, beam_material, mortar, **kwargs)


@dataclass
class GlobalSystem:
    residual: np.ndarray
    tangent: sp.csr_matrix
    energy: float
    coupling: object
    free: np.ndarray
    constrained: np.ndarray

    @property
    def free_residual(self):
        return self.residual[self.free]

    @property
    def free_tangent(self):
        return self.tangent[self.free][:, self.free]


def _coo(triplets, n):
    rows, cols, vals = triplets
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n))


def assemble_global(problem, d, load_factor):
    """Residual, tangent and total potential energy at full dof vector ``d``."""
    dm = problem.dofs
    n = dm.n_dofs
    d = np.asarray(d, dtype=float)
    d_S = d[dm.solid_slice]
    d_B = d[dm.beam_slice]
    residual = np.zeros(n)
    f_S, trip_S, W_S = assemble_solid(problem.solid, d_S, problem.solid_material, problem.n_gauss_solid)
    residual[dm.solid_slice] += f_S
    K = _coo(trip_S, n).tocsr()
    energy = W_S
    coupling = None
    if problem.beam.n_elements:
        f_B, trip_B, W_B = assemble_beam(
            problem.beam, d_B, problem.beam_material, problem.n_gauss_beam, offset=dm.n_solid
        )
        residual[dm.beam_slice] += f_B
        K = K + _coo(trip_B, n).tocsr()
        energy += W_B
    if problem.mortar is not None:
        coupling = penalty_condense(problem.mortar, d_B, d_S)
        residual[dm.solid_slice] += coupling.force_solid
        residual[dm.beam_slice] += coupling.force_beam
        K = K + sp.bmat(
            [[coupling.K_SS, coupling.K_SB], [coupling.K_BS, coupling.K_BB]], format="csr"
        )
        energy += coupling.energy
    f = problem.external_force(load_factor)
    residual -= f
    energy -= float(f @ d)
    return GlobalSystem(residual, K.tocsr(), energy, coupling, dm.free, dm.constrained)


# --------------------------------------------------------------------------
# linear algebra
# --------------------------------------------------------------------------

# pivots below this fraction of the largest pivot are treated as singular
PIVOT_RTOL = 1e3 * np.finfo(float).eps


def linear_solve(tangent, rhs):
    """Direct sparse LU solve with a pivot check and one refinement step."""
    A = sp.csc_matrix(tangent)
    b = np.asarray(rhs, dtype=float)
    if A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
        raise ValueError(f"incompatible system: matrix {A.shape}, rhs {b.shape}")
    if A.shape[0] == 0:
        return np.zeros(0)
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SolverError(f"sparse factorization failed: {exc}") from exc
    pivots = np.abs(lu.U.diagonal())
    pmax = pivots.max()
    if not pmax > 0 or pivots.min() < PIVOT_RTOL * pmax:
        k = int(np.argmin(pivots))
        raise SolverError(
            f"singular tangent: pivot {k} has magnitude {pivots[k]:.3e} "
            f"(largest {pmax:.3e}, ratio {pivots[k] / pmax if pmax else 0.0:.3e})"
        )
    x = lu.solve(b)
    r = b - A @ x
    x += lu.solve(r)
    if not np.all(np.isfinite(x)):
        raise SolverError("linear solve produced non-finite values")
    return x


def backward_error(A, x, b):
    A = sp.csr_matrix(A)
    norm_A = spla.norm(A, np.inf)
    return np.linalg.norm(A @ x - b, np.inf) / (
        norm_A * np.linalg.norm(x, np.inf) + np.linalg.norm(b, np.inf)
    )


# --------------------------------------------------------------------------
# Newton driver
# --------------------------------------------------------------------------


@dataclass
class SolverState:
    step: int
    load_factor: float
    d: np.ndarray
    multipliers: np.ndarray
    residual_history: list
    reactions: np.ndarray
    max_gap: float
    converged: bool
    dofs: DofMap
    driven: np.ndarray = None

    @property
    def iterations(self):
        return len(self.residual_history) - 1

    @property
    def d_solid(self):
        return self.d[self.dofs.solid_slice]

    @property
    def d_beam(self):
        return self.d[self.dofs.beam_slice]

    def reaction_resultant(self, which="driven"):
        """Summed reactions at constrained translational dofs, per component.

        ``which`` is ``"driven"`` (dofs with a nonzero prescribed increment,
        or all of them when none is driven), ``"all"``, or a boolean mask
        over the constrained dofs.
        """
        if isinstance(which, str):
            if which == "all" or self.driven is None:
                mask = np.ones(len(self.reactions), dtype=bool)
            elif which == "driven":
                mask = self.driven
            else:
                raise ValueError(f"unknown reaction set {which!r}")
        else:
            mask = np.asarray(which, dtype=bool)
        total = np.zeros(3)
        for idx, value, keep in zip(self.dofs.constrained, self.reactions, mask):
            _, _, comp = self.dofs.lookup(int(idx))
            if keep and comp < 3:
                total[comp] += value
        return total


def _snapshot(problem, system, d, step, load_factor, history, converged):
    coupling = system.coupling
    if coupling is not None:
        lam = coupling.multipliers.copy()
        gap = float(np.max(np.abs(coupling.gap))) if coupling.gap.size else 0.0
    else:
        lam = np.zeros((problem.beam.n_nodes, 3))
        gap = 0.0
    return SolverState(
        step=step,
        load_factor=load_factor,
        d=d.copy(),
        multipliers=lam,
        residual_history=list(history),
        reactions=system.residual[system.constrained].copy(),
        max_gap=gap,
        converged=converged,
        dofs=problem.dofs,
        driven=problem.driven,
    )


def newton_solve(problem, settings, callback=None, initial=None):
    """Uniform load stepping with full Newton-Raphson per step.

    Returns the list of converged :class:`SolverState` (one per step).
    ``callback(state)`` is invoked after every converged step. A step that
    exhausts ``max_iterations`` raises :class:`ConvergenceError` carrying the
    failed step's residual history and all previously converged states.
    """
    dm = problem.dofs
    free, cons = dm.free, dm.constrained
    d = problem.d0.copy() if initial is None else np.asarray(initial, float).copy()
    states = []
    n = settings.n_load_steps
    for step in range(1, n + 1):
        load_factor = step / n
        d[cons] = problem.prescribed(load_factor)
        history = []
        r_first = None
        while True:
            system = assemble_global(problem, d, load_factor)
            r = system.free_residual
            norm = float(np.linalg.norm(r))
            history.append(norm)
            if r_first is None:
                r_first = norm
            log.debug("step %d iter %d |r| = %.3e", step, len(history) - 1, norm)
            if norm <= settings.abs_tol or norm <= settings.rel_tol * r_first:
                break
            if len(history) > settings.max_iterations:
                raise ConvergenceError(
                    f"load step {step} did not converge in {settings.max_iterations} "
                    f"iterations (last |r| = {norm:.3e})",
                    step=step, history=history, states=states,
                    last_state=_snapshot(problem, system, d, step, load_factor, history, False),
                )
            d[free] += linear_solve(system.free_tangent, -r)
        state = _snapshot(problem, system, d, step, load_factor, history, True)
        log.info("step %d converged in %d iterations, |r| = %.3e",
                 step, state.iterations, history[-1])
        states.append(state)
        if callback is not None:
            callback(state)
    return states


# --------------------------------------------------------------------------
# explicit saddle-point form (debug)
# --------------------------------------------------------------------------


def assemble_saddle_point(problem, d, load_factor):
    """Unregularized block system in the unknowns (dd_S, dd_B, lambda).

    Constrained dofs are eliminated and only multiplier rows touched by a
    coupling point are kept. Returns ``(A, rhs, n_free_solid, lambda_rows)``
    where the unknown vector is ``[dd_free, lambda_active]``.
    """
    ms = problem.mortar
    if ms is None:
        raise ValueError("problem has no coupling")
    dm = problem.dofs
    d = np.asarray(d, dtype=float)
    d_S = d[dm.solid_slice]
    d_B = d[dm.beam_slice]
    n = dm.n_dofs
    residual = -problem.external_force(load_factor)
    f_S, trip_S, _ = assemble_solid(problem.solid, d_S, problem.solid_material, problem.n_gauss_solid)
    f_B, trip_B, _ = assemble_beam(
        problem.beam, d_B, problem.beam_material, problem.n_gauss_beam, offset=dm.n_solid
    )
    residual[dm.solid_slice] += f_S
    residual[dm.beam_slice] += f_B
    K = (_coo(trip_S, n) + _coo(trip_B, n)).tocsr()
    # coupling operator acting on the full dof vector: g = C d
    C = sp.hstack([-ms.M, ms.D], format="csr")
    rows = np.flatnonzero(ms.V > 0.0)
    C = C[rows]
    free = dm.free
    A = sp.bmat([[K[free][:, free], C[:, free].T], [C[:, free], None]], format="csr")
    gap = constraint_gap(ms, d_B, d_S)[rows]
    rhs = np.concatenate([-residual[free], -gap])
    return A, rhs, len(free), rows
