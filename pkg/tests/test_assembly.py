"""Assembly tests: closed-form element matrices, partition of unity,
spectral structure, and over-integration / finite-difference oracles for
the nonlinear terms."""

import numpy as np
import numpy.testing as npt
import pytest

from escher.assembly import (
    assemble_mass,
    assemble_nonlinear_jacobian,
    assemble_nonlinear_load,
    assemble_operators,
    assemble_stiffness,
    integrate_composed,
)
from escher.errors import DegenerateTriangle
from escher.meshing import SurfaceMesh, advance_mesh, build_icosphere, surface_area
from escher.potentials import quartic_potential
from escher.surfaces import OscillatingSphere, StaticSphere


def single_triangle(p0, p1, p2):
    nodes = np.array([p0, p1, p2], dtype=float)
    return SurfaceMesh(nodes, np.array([[0, 1, 2]]), surface=None)


@pytest.fixture(scope="module")
def icosphere():
    return build_icosphere(StaticSphere(), 2)


@pytest.fixture(scope="module")
def pot():
    return quartic_potential()


class TestMass:
    def test_unit_area_element_matrix(self):
        mesh = single_triangle([0, 0, 0], [1, 0, 0], [0, 2, 0])  # area 1
        M = assemble_mass(mesh).toarray()
        npt.assert_allclose(M, (np.ones((3, 3)) + np.eye(3)) / 12.0, atol=1e-15)

    def test_row_sums_are_lumped_areas(self, icosphere):
        M = assemble_mass(icosphere)
        total = float(M.sum())
        assert total == pytest.approx(surface_area(icosphere), rel=1e-13)

    def test_total_mass_close_to_sphere_area(self):
        m = build_icosphere(StaticSphere(), 5)
        M = assemble_mass(m)
        ones = np.ones(m.node_count)
        assert ones @ (M @ ones) == pytest.approx(4 * np.pi, rel=1e-3)

    def test_positive_definite_on_small_mesh(self):
        m = build_icosphere(StaticSphere(), 1)  # 42 nodes
        eigs = np.linalg.eigvalsh(assemble_mass(m).toarray())
        assert eigs.min() > 0

    def test_symmetry(self, icosphere):
        M = assemble_mass(icosphere)
        assert abs(M - M.T).max() == 0.0


class TestStiffness:
    def test_unit_right_triangle(self):
        mesh = single_triangle([0, 0, 0], [1, 0, 0], [0, 1, 0])
        A = assemble_stiffness(mesh).toarray()
        expected = 0.5 * np.array([[2, -1, -1], [-1, 1, 0], [-1, 0, 1]], dtype=float)
        npt.assert_allclose(A, expected, atol=1e-15)

    def test_embedding_invariance(self):
        # same triangle rigidly rotated out of the z=0 plane
        rng = np.random.default_rng(2)
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        base = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
        rotated = single_triangle(*(base @ q.T))
        flat = single_triangle(*base)
        npt.assert_allclose(assemble_stiffness(rotated).toarray(),
                            assemble_stiffness(flat).toarray(), atol=1e-14)

    def test_constants_in_kernel(self, icosphere):
        A = assemble_stiffness(icosphere)
        ones = np.ones(icosphere.node_count)
        assert np.abs(A @ ones).max() <= 1e-12 * abs(A).max()

    def test_positive_semidefinite(self, icosphere):
        A = assemble_stiffness(icosphere)
        rng = np.random.default_rng(3)
        for x in rng.normal(size=(100, icosphere.node_count)):
            assert x @ (A @ x) >= -1e-12

    def test_kernel_is_exactly_constants(self):
        m = build_icosphere(StaticSphere(), 1)
        eigs = np.linalg.eigvalsh(assemble_stiffness(m).toarray())
        assert abs(eigs[0]) < 1e-12
        assert eigs[1] > 1e-6


class TestNonlinearLoad:
    def test_zero_for_zero_state(self, icosphere, pot):
        load = assemble_nonlinear_load(icosphere, np.zeros(icosphere.node_count), pot)
        npt.assert_array_equal(load, 0.0)

    def test_constant_state_matches_mass(self, icosphere, pot):
        c = 1.7
        alpha = np.full(icosphere.node_count, c)
        load = assemble_nonlinear_load(icosphere, alpha, pot)
        lumped = assemble_mass(icosphere) @ np.ones(icosphere.node_count)
        npt.assert_allclose(load, c**3 * lumped, rtol=1e-13)

    def test_over_integration_oracle(self, icosphere, pot):
        rng = np.random.default_rng(4)
        alpha = rng.normal(size=icosphere.node_count)
        load4 = assemble_nonlinear_load(icosphere, alpha, pot, degree=4)
        load10 = assemble_nonlinear_load(icosphere, alpha, pot, degree=10)
        npt.assert_allclose(load4, load10, rtol=1e-13, atol=1e-16)


class TestNonlinearJacobian:
    def test_zero_for_zero_state(self, icosphere, pot):
        J = assemble_nonlinear_jacobian(icosphere, np.zeros(icosphere.node_count), pot)
        assert abs(J).max() == 0.0

    def test_constant_one_gives_three_mass(self, icosphere, pot):
        J = assemble_nonlinear_jacobian(icosphere, np.ones(icosphere.node_count), pot)
        M = assemble_mass(icosphere)
        assert abs(J - 3.0 * M).max() <= 1e-13 * abs(M).max()

    def test_symmetry(self, icosphere, pot):
        rng = np.random.default_rng(5)
        J = assemble_nonlinear_jacobian(icosphere, rng.normal(size=icosphere.node_count), pot)
        assert abs(J - J.T).max() <= 1e-15

    def test_matches_finite_differences(self, icosphere, pot):
        rng = np.random.default_rng(6)
        alpha = rng.normal(size=icosphere.node_count)
        v = rng.normal(size=icosphere.node_count)
        J = assemble_nonlinear_jacobian(icosphere, alpha, pot)
        d = 1e-6
        fd = (assemble_nonlinear_load(icosphere, alpha + d * v, pot)
              - assemble_nonlinear_load(icosphere, alpha - d * v, pot)) / (2 * d)
        scale = abs(J).max() * np.linalg.norm(v)
        assert np.linalg.norm(J @ v - fd) <= 1e-6 * scale


class TestGeometryOnly:
    def test_assembly_depends_only_on_node_positions(self):
        surface = OscillatingSphere()
        m = build_icosphere(surface, 2)
        advanced = advance_mesh(m, 0.03)
        rebuilt = SurfaceMesh(advanced.nodes, advanced.triangles, surface,
                              current_time=0.03)
        Ma, Mr = assemble_mass(advanced), assemble_mass(rebuilt)
        Aa, Ar = assemble_stiffness(advanced), assemble_stiffness(rebuilt)
        assert abs(Ma - Mr).max() == 0.0
        assert abs(Aa - Ar).max() == 0.0

    def test_shared_pattern_after_advancement(self):
        m = build_icosphere(OscillatingSphere(), 1)
        assemble_mass(m)
        m2 = advance_mesh(m, 0.01)
        assert m2._cache["pattern"] is m._cache["pattern"]
        npt.assert_array_equal(assemble_mass(m2).indices, assemble_mass(m).indices)

    def test_operators_cached(self, icosphere):
        ops1 = assemble_operators(icosphere)
        ops2 = assemble_operators(icosphere)
        assert ops1 is ops2
        assert ops1.node_count == icosphere.node_count

    def test_degenerate_triangle_rejected(self):
        mesh = single_triangle([0, 0, 0], [1, 0, 0], [2, 0, 0])
        with pytest.raises(DegenerateTriangle):
            assemble_mass(mesh)


def test_integrate_composed_constant(icosphere):
    area = integrate_composed(icosphere, np.full(icosphere.node_count, 2.0),
                              lambda u: u**2)
    assert area == pytest.approx(4.0 * surface_area(icosphere), rel=1e-13)
