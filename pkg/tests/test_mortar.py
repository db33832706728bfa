import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from fibermortar.errors import AssemblyError, EmbeddingError
from fibermortar.mesh import (
    HEX8_CORNERS,
    box_mesh,
    hex8_shape,
    make_beam_mesh,
    make_solid_mesh,
    straight_beam,
)
from fibermortar.mortar import (
    MortarSystem,
    assemble_mortar,
    constraint_gap,
    generate_coupling_points,
    penalty_condense,
    project_point_to_solid,
)

from oracles import dense_mortar_oracle


def one_hex(lower=(0.0, 0.0, 0.0), upper=(1.0, 1.0, 1.0)):
    nodes, elems = box_mesh(1, 1, 1, lower, upper)
    return make_solid_mesh(nodes, elems)


def beam_between(a, b, n=1):
    return make_beam_mesh(*straight_beam(a, b, n))


def curved_beam():
    """Single quarter-ish arc element with consistent reference length."""
    R, L0 = 0.6, 0.5
    th = L0 / R
    c = np.array([0.2, 0.2, 0.45])
    pos = [c, c + [R * np.sin(th), R * (1 - np.cos(th)), 0.0]]
    tan = [[1.0, 0.0, 0.0], [np.cos(th), np.sin(th), 0.0]]
    from fibermortar.mesh import hermite_arc_length

    q = np.array([pos[0], tan[0], pos[1], tan[1]])
    # a Hermite arc is not exactly a circle; use its own arc length
    L = L0
    for _ in range(5):
        L = hermite_arc_length(q, L)
    return make_beam_mesh(pos, tan, [[0, 1]], [L])


class TestProjection:
    def test_center(self):
        e, xi = project_point_to_solid([0.5, 0.5, 0.5], one_hex())
        assert e == 0
        assert_allclose(xi, 0.0, atol=1e-12)

    @pytest.mark.parametrize("k", range(8))
    def test_node(self, k):
        mesh = one_hex()
        e, xi = project_point_to_solid(mesh.nodes[mesh.elements[0, k]], mesh)
        assert_allclose(xi, HEX8_CORNERS[k], atol=1e-10)

    def test_distorted_forward_map(self, rng):
        X = (HEX8_CORNERS + 1) / 2 + 0.08 * rng.standard_normal((8, 3))
        mesh = make_solid_mesh(X, [list(range(8))])
        for _ in range(10):
            target = rng.uniform(-0.95, 0.95, 3)
            x = hex8_shape(target)[0] @ X
            e, xi = project_point_to_solid(x, mesh)
            assert_allclose(xi, target, atol=1e-9)

    def test_outside(self):
        with pytest.raises(EmbeddingError):
            project_point_to_solid([1.5, 0.5, 0.5], one_hex())

    def test_shared_face_prefers_smaller_coordinates(self):
        nodes, elems = box_mesh(2, 1, 1, (0, 0, 0), (2, 1, 1))
        mesh = make_solid_mesh(nodes, elems)
        e, xi = project_point_to_solid([1.2, 0.5, 0.5], mesh)
        assert e == 1
        assert_allclose(xi, [-0.6, 0, 0], atol=1e-12)


class TestCouplingPoints:
    def test_single_host(self):
        pts = generate_coupling_points(beam_between((0.2, 0.3, 0.4), (0.8, 0.6, 0.5)), one_hex(), 6)
        assert len(pts) == 6
        assert all(p.solid_elem == 0 for p in pts)
        assert all(p.jacobian == pytest.approx(np.sqrt(0.36 + 0.09 + 0.01)) for p in pts)

    def test_two_hosts_partition(self):
        nodes, elems = box_mesh(2, 1, 1, (0, 0, 0), (2, 1, 1))
        mesh = make_solid_mesh(nodes, elems)
        beam = beam_between((0.3, 0.4, 0.5), (1.9, 0.6, 0.5))
        pts = generate_coupling_points(beam, mesh, 6)
        for p in pts:
            x = hex8_shape(p.xi)[0] @ mesh.nodes[mesh.elements[p.solid_elem]]
            # point-in-box oracle on the reference geometry
            expected = 0 if x[0] < 1.0 else 1
            assert p.solid_elem == expected
            xb = (1 - p.t) * np.array([0.3, 0.4, 0.5]) + p.t * np.array([1.9, 0.6, 0.5])
            assert_allclose(x, xb, atol=1e-12)
        assert {p.solid_elem for p in pts} == {0, 1}

    def test_beam_outside(self):
        with pytest.raises(EmbeddingError, match="beam element 0"):
            generate_coupling_points(beam_between((0.5, 0.5, 0.5), (1.5, 0.5, 0.5)), one_hex(), 6)


class TestAssembly:
    def test_seven_twentieths(self):
        solid = one_hex((0, 0, 0), (2, 2, 2))
        beam = beam_between((0.5, 1.0, 1.0), (1.5, 1.0, 1.0))
        ms = assemble_mortar(generate_coupling_points(beam, solid, 6), beam, solid)
        D = ms.D.toarray()
        for k in range(3):
            assert D[k, k] == pytest.approx(7 / 20, abs=1e-12)

    @pytest.mark.parametrize("n_el", [1, 3])
    def test_weights_sum_to_length(self, n_el):
        solid = one_hex()
        beam = beam_between((0.1, 0.2, 0.3), (0.9, 0.7, 0.6), n_el)
        ms = assemble_mortar(generate_coupling_points(beam, solid, 6), beam, solid)
        assert ms.V[0::3].sum() == pytest.approx(beam.total_length, abs=1e-12)
        assert np.all(ms.V > 0)

    @pytest.mark.parametrize("make_beam", ["straight", "curved"])
    def test_dense_quadrature_oracle(self, make_beam):
        lower, upper = (0.0, 0.0, 0.0), (1.2, 1.0, 0.9)
        solid = one_hex(lower, upper)
        beam = beam_between((0.2, 0.3, 0.4), (1.0, 0.6, 0.5)) if make_beam == "straight" else curved_beam()
        ms = assemble_mortar(generate_coupling_points(beam, solid, 6), beam, solid)
        D, M, V = dense_mortar_oracle(beam, lower, upper, solid.elements[0], solid.n_nodes)
        # integrands are polynomials of degree <= 10 in t, so 6-point Gauss is exact
        assert_allclose(ms.D.toarray(), D, rtol=0, atol=1e-10 * np.abs(D).max())
        assert_allclose(ms.M.toarray(), M, rtol=0, atol=1e-10 * np.abs(M).max())
        assert_allclose(ms.V, V, rtol=1e-10)

    def test_translation_has_zero_gap(self, rng):
        nodes, elems = box_mesh(2, 2, 1)
        solid = make_solid_mesh(nodes, elems)
        beam = beam_between((0.1, 0.2, 0.3), (0.9, 0.85, 0.6), 3)
        ms = assemble_mortar(generate_coupling_points(beam, solid, 6), beam, solid)
        c = rng.standard_normal(3)
        d_S = np.tile(c, solid.n_nodes)
        d_B = np.tile(np.concatenate([c, np.zeros(3)]), beam.n_nodes)
        g = constraint_gap(ms, d_B, d_S)
        assert np.abs(g).max() <= 1e-12 * np.linalg.norm(c)


class TestGapAndPenalty:
    @pytest.fixture
    def system(self):
        solid = one_hex()
        beam = beam_between((0.2, 0.3, 0.4), (0.8, 0.6, 0.5))
        return solid, beam, assemble_mortar(generate_coupling_points(beam, solid, 6), beam, solid, 5.0)

    def test_zero_state(self, system):
        _, _, ms = system
        assert np.all(constraint_gap(ms, np.zeros(12), np.zeros(24)) == 0)

    def test_beam_shift_gap_matches_quadrature(self, system):
        _, beam, ms = system
        delta = 1e-3
        d_B = np.zeros(12)
        d_B[[0, 6]] = delta
        g = constraint_gap(ms, d_B, np.zeros(24))
        # dense oracle: integral of phi_r * delta along the element = delta * L0 / 2
        L0 = beam.lengths[0]
        expected = np.zeros(6)
        expected[[0, 3]] = delta * L0 / 2
        assert_allclose(g, expected, atol=1e-15)

    def test_dimension_mismatch(self, system):
        _, _, ms = system
        with pytest.raises(ValueError):
            constraint_gap(ms, np.zeros(11), np.zeros(24))

    def test_zero_gap_zero_forces(self, system):
        _, _, ms = system
        c = penalty_condense(ms, np.zeros(12), np.zeros(24))
        assert not c.multipliers.any() and not c.force_beam.any() and not c.force_solid.any()

    def test_linearity(self, system, rng):
        _, _, ms = system
        d_B, d_S = rng.standard_normal(12), rng.standard_normal(24)
        c1 = penalty_condense(ms, d_B, d_S)
        c2 = penalty_condense(ms, 2 * d_B, 2 * d_S)
        assert_allclose(c2.multipliers, 2 * c1.multipliers, rtol=1e-14)
        assert_allclose(c2.force_beam, 2 * c1.force_beam, rtol=1e-14)
        assert_allclose(c2.force_solid, 2 * c1.force_solid, rtol=1e-14)

    def test_force_balance(self, system, rng):
        _, _, ms = system
        c = penalty_condense(ms, rng.standard_normal(12), rng.standard_normal(24))
        fb = c.force_beam.reshape(-1, 6)[:, :3].sum(axis=0)
        fs = c.force_solid.reshape(-1, 3).sum(axis=0)
        assert_allclose(fb, -fs, rtol=1e-12, atol=1e-12 * np.abs(fb).max())

    def test_multipliers_are_weighted_gap(self, system, rng):
        _, _, ms = system
        d_B, d_S = rng.standard_normal(12), rng.standard_normal(24)
        c = penalty_condense(ms, d_B, d_S)
        assert_allclose(c.multipliers.ravel(), ms.kappa * c.gap / ms.V, rtol=1e-14)

    def test_stiffness_is_force_derivative(self, system, rng):
        _, _, ms = system
        d_B, d_S = rng.standard_normal(12), rng.standard_normal(24)
        c = penalty_condense(ms, d_B, d_S)
        K = sp.bmat([[c.K_SS, c.K_SB], [c.K_BS, c.K_BB]]).toarray()
        assert np.abs(K - K.T).max() <= 1e-14 * np.abs(K).max()
        # linear operator: K d reproduces the forces exactly
        f = K @ np.concatenate([d_S, d_B])
        assert_allclose(f, np.concatenate([c.force_solid, c.force_beam]), atol=1e-12 * np.abs(f).max())

    def test_zero_weight_on_active_row(self, system):
        _, _, ms = system
        bad = MortarSystem(ms.D, ms.M, np.zeros_like(ms.V), ms.kappa)
        with pytest.raises(AssemblyError):
            penalty_condense(bad, np.zeros(12), np.zeros(24))

    def test_non_positive_kappa(self, system):
        _, _, ms = system
        with pytest.raises(AssemblyError):
            penalty_condense(ms.with_kappa(0.0), np.zeros(12), np.zeros(24))
