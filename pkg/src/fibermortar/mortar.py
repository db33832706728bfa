"""Beam-to-solid mortar coupling with weighted penalty regularization.

The beam is the slave side: multipliers live at beam nodes (three components
per node, linear along each element) and are paired with the Hermite
positional interpolation (matrix ``D``) and with the trilinear solid
interpolation at the projected points (matrix ``M``).
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._jit import njit
from .errors import AssemblyError, EmbeddingError
from .mesh import HEX8_CORNERS, hermite_basis, hermite_eval, hex8_shape, hex8_shape_kernel
from .quadrature import gauss_unit_interval

XI_TOL = 1e-8
PROJECTION_RTOL = 1e-10


@dataclass(frozen=True)
class CouplingPoint:
    beam_elem: int
    t: float
    gauss_weight: float
    jacobian: float
    solid_elem: int
    xi: np.ndarray


# --------------------------------------------------------------------------
# point location
# --------------------------------------------------------------------------


@njit
def _newton_inverse_map(X, x, tol, max_iter, corners):
    """Solve map(xi) = x on one hex; returns (xi, converged)."""
    xi = np.zeros(3)
    for _ in range(max_iter):
        N, dN = hex8_shape_kernel(xi, corners)
        r = N @ X - x
        if np.sqrt(r @ r) <= tol:
            return xi, True
        J = X.T @ dN
        if abs(np.linalg.det(J)) < 1e-300:
            return xi, False
        xi = xi - np.linalg.solve(J, r)
        if np.max(np.abs(xi)) > 10.0:
            return xi, False
    N, _ = hex8_shape_kernel(xi, corners)
    r = N @ X - x
    return xi, np.sqrt(r @ r) <= tol


class SolidLocator:
    """Bounding-box candidate search plus Newton inverse mapping."""

    def __init__(self, mesh, inflate=0.1):
        self.mesh = mesh
        coords = mesh.nodes[mesh.elements]  # (ne, 8, 3)
        lo = coords.min(axis=1)
        hi = coords.max(axis=1)
        self.diameters = np.array([mesh.element_diameter(e) for e in range(mesh.n_elements)])
        pad = inflate * self.diameters[:, None]
        self.lo = lo - pad
        self.hi = hi + pad
        self.coords = np.ascontiguousarray(coords)

    def candidates(self, x):
        inside = np.all((self.lo <= x) & (x <= self.hi), axis=1)
        return np.flatnonzero(inside)

    def locate(self, x, max_iter=50):
        x = np.asarray(x, dtype=float)
        best = None
        for e in self.candidates(x):
            tol = PROJECTION_RTOL * self.diameters[e]
            xi, ok = _newton_inverse_map(self.coords[e], x, tol, max_iter, HEX8_CORNERS)
            if not ok:
                continue
            size = float(np.max(np.abs(xi)))
            if size > 1.0 + XI_TOL:
                continue
            if best is None or size < best[2] - 1e-12:
                best = (int(e), xi, size)
        if best is None:
            return None
        return best[0], best[1]


def project_point_to_solid(x, mesh, locator=None):
    """Host element index and local coordinates of a point inside ``mesh``."""
    locator = locator or SolidLocator(mesh)
    hit = locator.locate(x)
    if hit is None:
        raise EmbeddingError(f"point {np.asarray(x).tolist()} is not inside the solid mesh")
    return hit


def generate_coupling_points(beam, solid, n_gauss=6, beam_disp=None, locator=None):
    """Gauss points along every beam element, each paired with its host hex.

    ``beam_disp`` optionally shifts the beam dofs before projecting, so that a
    pre-deformed fiber can be tied into an undeformed solid.
    """
    locator = locator or SolidLocator(solid)
    t_pts, t_wts = gauss_unit_interval(n_gauss)
    d = None if beam_disp is None else np.asarray(beam_disp, dtype=float).reshape(-1, 6)
    points = []
    for e in range(beam.n_elements):
        q = beam.element_dofs(e)
        if d is not None:
            a, b = beam.elements[e]
            q = q + np.array([d[a, :3], d[a, 3:], d[b, :3], d[b, 3:]])
        L0 = float(beam.lengths[e])
        for t, w in zip(t_pts, t_wts):
            x, _, _ = hermite_eval(q, L0, t)
            hit = locator.locate(x)
            if hit is None:
                raise EmbeddingError(
                    f"beam element {e} point t={t:.6f} at {x.tolist()} lies outside the solid"
                )
            points.append(CouplingPoint(e, float(t), float(w), L0, hit[0], hit[1]))
    return points


# --------------------------------------------------------------------------
# mortar matrices
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MortarSystem:
    """Mortar matrices and diagonal weighting.

    ``D`` is (n_lambda, n_beam_dofs), ``M`` is (n_lambda, n_solid_dofs) and
    ``V`` holds the integrated multiplier shape of each multiplier dof.
    ``beam_reference`` is the beam displacement at which the fiber was tied
    (zero for fibers embedded in the reference configuration).
    """

    D: sp.csr_matrix
    M: sp.csr_matrix
    V: np.ndarray
    kappa: float
    beam_reference: np.ndarray = None

    @property
    def n_lambda(self):
        return self.D.shape[0]

    @property
    def active(self):
        return self.V > 0.0

    def with_kappa(self, kappa):
        return MortarSystem(self.D, self.M, self.V, float(kappa), self.beam_reference)


def assemble_mortar(points, beam, solid, kappa=1.0, beam_reference=None):
    n_lam = 3 * beam.n_nodes
    rows_d, cols_d, vals_d = [], [], []
    rows_m, cols_m, vals_m = [], [], []
    V = np.zeros(n_lam)
    for cp in points:
        a, b = beam.elements[cp.beam_elem]
        L0 = float(beam.lengths[cp.beam_elem])
        phi = (1.0 - cp.t, cp.t)
        h0, _, _ = hermite_basis(cp.t, L0)
        # Hermite shapes act on (pos_a, tan_a, pos_b, tan_b)
        beam_cols = (6 * a, 6 * a + 3, 6 * b, 6 * b + 3)
        N, _ = hex8_shape(cp.xi)
        snodes = solid.elements[cp.solid_elem]
        wj = cp.gauss_weight * cp.jacobian
        for r, node in enumerate((a, b)):
            c = wj * phi[r]
            V[3 * node:3 * node + 3] += c
            for k in range(3):
                row = 3 * node + k
                for j in range(4):
                    rows_d.append(row)
                    cols_d.append(beam_cols[j] + k)
                    vals_d.append(c * h0[j])
                for s in range(8):
                    rows_m.append(row)
                    cols_m.append(3 * snodes[s] + k)
                    vals_m.append(c * N[s])
    D = sp.csr_matrix((vals_d, (rows_d, cols_d)), shape=(n_lam, 6 * beam.n_nodes))
    M = sp.csr_matrix((vals_m, (rows_m, cols_m)), shape=(n_lam, 3 * solid.n_nodes))
    D.sum_duplicates()
    M.sum_duplicates()
    if beam_reference is not None:
        beam_reference = np.asarray(beam_reference, dtype=float).reshape(-1).copy()
    return MortarSystem(D, M, V, float(kappa), beam_reference)


def constraint_gap(ms, d_B, d_S):
    """g = D d_B - M d_S (relative to the tie-in beam state, if any)."""
    d_B = np.asarray(d_B, dtype=float).reshape(-1)
    d_S = np.asarray(d_S, dtype=float).reshape(-1)
    if d_B.shape[0] != ms.D.shape[1] or d_S.shape[0] != ms.M.shape[1]:
        raise ValueError(
            f"dof vectors of size {d_B.shape[0]}/{d_S.shape[0]} do not match mortar "
            f"matrices ({ms.D.shape[1]}/{ms.M.shape[1]})"
        )
    if ms.beam_reference is not None:
        d_B = d_B - ms.beam_reference
    return ms.D @ d_B - ms.M @ d_S


@dataclass
class CouplingContribution:
    multipliers: np.ndarray  # (n_beam_nodes, 3), line load
    gap: np.ndarray
    force_beam: np.ndarray
    force_solid: np.ndarray
    K_BB: sp.csr_matrix
    K_BS: sp.csr_matrix
    K_SB: sp.csr_matrix
    K_SS: sp.csr_matrix
    energy: float


def _inverse_weights(ms):
    touched = (np.asarray(abs(ms.D).sum(axis=1)).ravel() > 0) | (
        np.asarray(abs(ms.M).sum(axis=1)).ravel() > 0
    )
    if np.any(touched & ~(ms.V > 0.0)):
        bad = np.flatnonzero(touched & ~(ms.V > 0.0))
        raise AssemblyError(f"zero weight on active multiplier rows {bad.tolist()}")
    inv = np.zeros_like(ms.V)
    inv[ms.V > 0.0] = 1.0 / ms.V[ms.V > 0.0]
    return inv


def penalty_condense(ms, d_B, d_S):
    """Eliminate the multipliers with lambda = kappa V^-1 g."""
    if not ms.kappa > 0.0:
        raise AssemblyError(f"penalty parameter must be positive, got {ms.kappa}")
    inv = _inverse_weights(ms)
    g = constraint_gap(ms, d_B, d_S)
    lam = ms.kappa * inv * g
    W = sp.diags(ms.kappa * inv)
    DT = ms.D.T.tocsr()
    MT = ms.M.T.tocsr()
    return CouplingContribution(
        multipliers=lam.reshape(-1, 3),
        gap=g,
        force_beam=DT @ lam,
        force_solid=-(MT @ lam),
        K_BB=(DT @ W @ ms.D).tocsr(),
        K_BS=-(DT @ W @ ms.M).tocsr(),
        K_SB=-(MT @ W @ ms.D).tocsr(),
        K_SS=(MT @ W @ ms.M).tocsr(),
        energy=0.5 * float(g @ (lam)),
    )


def multiplier_at(multipliers, beam, e, t):
    """Linear interpolation of nodal multipliers on beam element ``e``."""
    a, b = beam.elements[e]
    return (1.0 - t) * multipliers[a] + t * multipliers[b]
