"""Torsion-free Euler-Bernoulli beam on a cubic Hermite centerline.

Stored energy per unit reference length is

    psi = 1/2 EA (|r'| - 1)^2 + 1/2 EI |r' x r''|^2 / |r'|^6

with derivatives taken with respect to the reference arc length.
"""
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .errors import KinematicsError
from .mesh import hermite_basis_kernel, hermite_eval
from .quadrature import gauss_unit_interval

# below this |r'| the centerline is considered degenerate
TANGENT_FLOOR = 1e-12


@dataclass(frozen=True)
class BeamMaterial:
    youngs_modulus: float
    area: float
    inertia: float

    def __post_init__(self):
        for name in ("youngs_modulus", "area", "inertia"):
            if not getattr(self, name) > 0:
                raise ValueError(f"beam {name} must be positive, got {getattr(self, name)}")

    @property
    def EA(self):
        return self.youngs_modulus * self.area

    @property
    def EI(self):
        return self.youngs_modulus * self.inertia


def _derivatives(q, L0, t):
    _, a, b = hermite_eval(q, L0, t)
    n = np.linalg.norm(a)
    if not n > TANGENT_FLOOR:
        raise KinematicsError(f"degenerate centerline tangent at t={t} (|r'| = {n:.3e})")
    return a, b, n


def axial_strain(q, L0, t):
    """Axial strain |r'| - 1 of the current element dofs ``q`` (4, 3) at ``t``."""
    _, _, n = _derivatives(q, L0, t)
    return n - 1.0


def curvature(q, L0, t):
    """Space-curve curvature |r' x r''| / |r'|^3 at ``t``."""
    a, b, n = _derivatives(q, L0, t)
    return np.linalg.norm(np.cross(a, b)) / n**3


@njit
def _cross(a, b):
    c = np.empty(3)
    c[0] = a[1] * b[2] - a[2] * b[1]
    c[1] = a[2] * b[0] - a[0] * b[2]
    c[2] = a[0] * b[1] - a[1] * b[0]
    return c


@njit
def energy_density_derivatives(a, b, EA, EI):
    """psi and its gradient / Hessian blocks w.r.t. ``a = r'`` and ``b = r''``."""
    I3 = np.eye(3)
    m = a @ a
    n = np.sqrt(m)
    # axial part
    psi = 0.5 * EA * (n - 1.0) ** 2
    ga = EA * (n - 1.0) / n * a
    gb = np.zeros(3)
    Haa = EA * (np.outer(a, a) / (m * n) + (1.0 - 1.0 / n) * I3)
    Hab = np.zeros((3, 3))
    Hbb = np.zeros((3, 3))
    # bending part: 1/2 EI c q with c = |a x b|^2 and q = m^-3
    ab = a @ b
    bb = b @ b
    cr = _cross(a, b)
    c = cr @ cr
    q = m ** -3
    qa = -6.0 * m ** -4 * a
    qaa = -6.0 * m ** -4 * I3 + 48.0 * m ** -5 * np.outer(a, a)
    ca = 2.0 * bb * a - 2.0 * ab * b
    cb = 2.0 * m * b - 2.0 * ab * a
    caa = 2.0 * bb * I3 - 2.0 * np.outer(b, b)
    cbb = 2.0 * m * I3 - 2.0 * np.outer(a, a)
    cab = 4.0 * np.outer(a, b) - 2.0 * np.outer(b, a) - 2.0 * ab * I3
    h = 0.5 * EI
    psi += h * c * q
    ga += h * (q * ca + c * qa)
    gb += h * q * cb
    Haa += h * (q * caa + np.outer(qa, ca) + np.outer(ca, qa) + c * qaa)
    Hab += h * (q * cab + np.outer(qa, cb))
    Hbb += h * q * cbb
    return psi, ga, gb, Haa, Hab, Hbb


@njit
def beam_element_kernel(q, L0, EA, EI, t_pts, t_wts):
    """Force (12,), tangent (12, 12), energy and min |r'| of one element.

    ``q`` holds the current (4, 3) dofs ``(pos_a, tan_a, pos_b, tan_b)``.
    """
    f = np.zeros(12)
    K = np.zeros((12, 12))
    energy = 0.0
    nmin = np.inf
    for p in range(t_pts.shape[0]):
        _, s1, s2 = hermite_basis_kernel(t_pts[p], L0)
        a = s1 @ q
        b = s2 @ q
        n = np.sqrt(a @ a)
        if n < nmin:
            nmin = n
        if n <= 1e-12:
            continue
        psi, ga, gb, Haa, Hab, Hbb = energy_density_derivatives(a, b, EA, EI)
        w = t_wts[p] * L0
        energy += w * psi
        for i in range(4):
            for k in range(3):
                f[3 * i + k] += w * (s1[i] * ga[k] + s2[i] * gb[k])
        for i in range(4):
            for j in range(4):
                for k in range(3):
                    for l in range(3):
                        K[3 * i + k, 3 * j + l] += w * (
                            s1[i] * s1[j] * Haa[k, l]
                            + s1[i] * s2[j] * Hab[k, l]
                            + s2[i] * s1[j] * Hab[l, k]
                            + s2[i] * s2[j] * Hbb[k, l]
                        )
    return f, K, energy, nmin


def beam_element_force_stiffness(q, mat, L0, n_gauss=6):
    """Return ``(f_int (12,), K (12, 12), energy)`` of one beam element.

    ``q`` is the current configuration ``(pos_a, tan_a, pos_b, tan_b)``
    as a (4, 3) array or flat 12-vector.
    """
    t, w = gauss_unit_interval(n_gauss)
    q = np.ascontiguousarray(q, dtype=float).reshape(4, 3)
    f, K, energy, nmin = beam_element_kernel(q, float(L0), mat.EA, mat.EI, t, w)
    if not nmin > TANGENT_FLOOR:
        raise KinematicsError(f"degenerate centerline tangent (|r'| = {nmin:.3e})")
    return f, K, energy


@njit
def assemble_beam_kernel(ref_pos, ref_tan, elements, lengths, d_nodes, EA, EI, t_pts, t_wts, offset):
    ne = elements.shape[0]
    rows = np.empty(ne * 144, dtype=np.int64)
    cols = np.empty(ne * 144, dtype=np.int64)
    vals = np.empty(ne * 144)
    f = np.zeros(6 * ref_pos.shape[0])
    energy = 0.0
    nmin = np.inf
    q = np.empty((4, 3))
    dofs = np.empty(12, dtype=np.int64)
    for e in range(ne):
        for s in range(2):
            n = elements[e, s]
            for k in range(3):
                q[2 * s, k] = ref_pos[n, k] + d_nodes[n, k]
                q[2 * s + 1, k] = ref_tan[n, k] + d_nodes[n, 3 + k]
                dofs[6 * s + k] = 6 * n + k
                dofs[6 * s + 3 + k] = 6 * n + 3 + k
        fe, Ke, we, ne_min = beam_element_kernel(q, lengths[e], EA, EI, t_pts, t_wts)
        if ne_min < nmin:
            nmin = ne_min
        energy += we
        base = e * 144
        for p in range(12):
            f[dofs[p]] += fe[p]
            for r in range(12):
                k = base + 12 * p + r
                rows[k] = dofs[p] + offset
                cols[k] = dofs[r] + offset
                vals[k] = Ke[p, r]
    return rows, cols, vals, f, energy, nmin


def assemble_beam(mesh, d_beam, mat, n_gauss=6, offset=0):
    """Beam force vector (local numbering), COO triplets (shifted by ``offset``) and energy."""
    t, w = gauss_unit_interval(n_gauss)
    d_nodes = np.ascontiguousarray(np.asarray(d_beam, dtype=float).reshape(-1, 6))
    rows, cols, vals, f, energy, nmin = assemble_beam_kernel(
        np.ascontiguousarray(mesh.positions), np.ascontiguousarray(mesh.tangents),
        np.ascontiguousarray(mesh.elements), np.ascontiguousarray(mesh.lengths),
        d_nodes, mat.EA, mat.EI, t, w, offset,
    )
    if mesh.n_elements and not nmin > TANGENT_FLOOR:
        raise KinematicsError(f"degenerate centerline tangent (|r'| = {nmin:.3e})")
    return f, (rows, cols, vals), energy
