"""St. Venant-Kirchhoff hexahedron in total Lagrangian form."""
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .errors import GeometryError
from .mesh import HEX8_CORNERS, hex8_shape, hex8_shape_kernel
from .quadrature import gauss_hex


@dataclass(frozen=True)
class SolidMaterial:
    youngs_modulus: float
    poissons_ratio: float

    def __post_init__(self):
        if not self.youngs_modulus > 0:
            raise ValueError(f"Young's modulus must be positive, got {self.youngs_modulus}")
        if not -1.0 < self.poissons_ratio < 0.5:
            raise ValueError(f"Poisson's ratio must lie in (-1, 0.5), got {self.poissons_ratio}")

    @property
    def lame_lambda(self):
        E, nu = self.youngs_modulus, self.poissons_ratio
        return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))

    @property
    def lame_mu(self):
        return self.youngs_modulus / (2.0 * (1.0 + self.poissons_ratio))


def reference_gradients(X, xi):
    """Shape gradients w.r.t. reference coordinates, and det J."""
    _, dN = hex8_shape(xi)
    J = np.asarray(X).T @ dN
    det = np.linalg.det(J)
    if not det > 0.0:
        raise GeometryError(f"non-positive reference Jacobian (det J = {det:.3e})")
    return dN @ np.linalg.inv(J), det


def deformation_gradient(X, u, xi):
    """F = I + sum_a u_a (x) grad_X N_a at local point ``xi``.

    ``X`` and ``u`` are the (8, 3) reference coordinates and nodal
    displacements of one element.
    """
    dNdX, _ = reference_gradients(X, xi)
    return np.eye(3) + np.asarray(u, dtype=float).T @ dNdX


def green_lagrange(F):
    F = np.asarray(F, dtype=float)
    return 0.5 * (F.T @ F - np.eye(3))


def pk2_stvk(E, mat):
    E = np.asarray(E, dtype=float)
    return mat.lame_lambda * np.trace(E) * np.eye(3) + 2.0 * mat.lame_mu * E


def stvk_energy_density(E, mat):
    E = np.asarray(E, dtype=float)
    tr = np.trace(E)
    return 0.5 * mat.lame_lambda * tr * tr + mat.lame_mu * np.sum(E * E)


@njit
def solid_element_kernel(X, u, lam, mu, pts, wts, corners):
    """Internal force (24,), tangent (24, 24) and strain energy of one hex.

    Returns ``det_min`` as the last value; a non-positive value flags an
    inverted reference element.
    """
    f = np.zeros(24)
    K = np.zeros((24, 24))
    energy = 0.0
    det_min = np.inf
    for q in range(pts.shape[0]):
        _, dN = hex8_shape_kernel(pts[q], corners)
        J = X.T @ dN
        det = np.linalg.det(J)
        if det < det_min:
            det_min = det
        if det <= 0.0:
            continue
        g = dN @ np.linalg.inv(J)
        F = np.eye(3) + u.T @ g
        C = F.T @ F
        E = 0.5 * (C - np.eye(3))
        trE = E[0, 0] + E[1, 1] + E[2, 2]
        S = 2.0 * mu * E
        for i in range(3):
            S[i, i] += lam * trE
        dv = wts[q] * det
        energy += dv * (0.5 * lam * trE * trE + mu * np.sum(E * E))
        P = F @ S
        h = g @ F.T  # h[a] = F grad N_a
        gSg = g @ S @ g.T
        gg = g @ g.T
        B = F @ F.T
        for a in range(8):
            for i in range(3):
                fa = 0.0
                for j in range(3):
                    fa += P[i, j] * g[a, j]
                f[3 * a + i] += dv * fa
        for a in range(8):
            for b in range(8):
                geo = dv * gSg[a, b]
                for i in range(3):
                    K[3 * a + i, 3 * b + i] += geo
                    for k in range(3):
                        K[3 * a + i, 3 * b + k] += dv * (
                            lam * h[a, i] * h[b, k]
                            + mu * (B[i, k] * gg[a, b] + h[b, i] * h[a, k])
                        )
    return f, K, energy, det_min


def solid_element_force_stiffness(X, u, mat, n_gauss=2):
    """Return ``(f_int (24,), K (24, 24), energy)`` for one hexahedron.

    Element dofs are node-major: ``3 a + i`` is component ``i`` of node ``a``.
    """
    pts, wts = gauss_hex(n_gauss)
    X = np.ascontiguousarray(X, dtype=float)
    u = np.ascontiguousarray(u, dtype=float).reshape(8, 3)
    f, K, energy, det_min = solid_element_kernel(
        X, u, mat.lame_lambda, mat.lame_mu, pts, wts, HEX8_CORNERS
    )
    if not det_min > 0.0:
        raise GeometryError(f"non-positive reference Jacobian (det J = {det_min:.3e})")
    return f, K, energy


def solid_element_energy(X, u, mat, n_gauss=2):
    """Strain energy by direct quadrature of the energy density (no kernel)."""
    pts, wts = gauss_hex(n_gauss)
    total = 0.0
    for xi, w in zip(pts, wts):
        dNdX, det = reference_gradients(X, xi)
        F = np.eye(3) + np.asarray(u).reshape(8, 3).T @ dNdX
        total += w * det * stvk_energy_density(green_lagrange(F), mat)
    return total


@njit
def assemble_solid_kernel(nodes, elements, u_nodes, lam, mu, pts, wts, corners):
    """Element loop producing COO triplets, the force vector and energy."""
    ne = elements.shape[0]
    rows = np.empty(ne * 576, dtype=np.int64)
    cols = np.empty(ne * 576, dtype=np.int64)
    vals = np.empty(ne * 576)
    f = np.zeros(3 * nodes.shape[0])
    energy = 0.0
    det_min = np.inf
    dofs = np.empty(24, dtype=np.int64)
    X = np.empty((8, 3))
    u = np.empty((8, 3))
    for e in range(ne):
        for a in range(8):
            n = elements[e, a]
            for i in range(3):
                X[a, i] = nodes[n, i]
                u[a, i] = u_nodes[n, i]
                dofs[3 * a + i] = 3 * n + i
        fe, Ke, we, de = solid_element_kernel(X, u, lam, mu, pts, wts, corners)
        if de < det_min:
            det_min = de
        energy += we
        base = e * 576
        for p in range(24):
            f[dofs[p]] += fe[p]
            for r in range(24):
                k = base + 24 * p + r
                rows[k] = dofs[p]
                cols[k] = dofs[r]
                vals[k] = Ke[p, r]
    return rows, cols, vals, f, energy, det_min


def assemble_solid(mesh, d_solid, mat, n_gauss=2):
    """Global solid force vector, COO stiffness triplets and total energy."""
    pts, wts = gauss_hex(n_gauss)
    u_nodes = np.ascontiguousarray(np.asarray(d_solid, dtype=float).reshape(-1, 3))
    rows, cols, vals, f, energy, det_min = assemble_solid_kernel(
        np.ascontiguousarray(mesh.nodes), np.ascontiguousarray(mesh.elements), u_nodes,
        mat.lame_lambda, mat.lame_mu, pts, wts, HEX8_CORNERS,
    )
    if mesh.n_elements and not det_min > 0.0:
        raise GeometryError(f"non-positive reference Jacobian in solid mesh (det J = {det_min:.3e})")
    return f, (rows, cols, vals), energy
