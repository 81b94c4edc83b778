import unittest

import numpy as np

from tangent_llg import assembly
from tangent_llg import mesh
from tangent_llg import physics
from tangent_llg.errors import InvalidArgument


def _box():
    return mesh.generate_type1((2, 2, 1), (2.0, 1.0, 1.5))


def _nodal(box, f):
    return assembly.interpolate_nodal(f, box).ravel()


class QuadratureTests(unittest.TestCase):
    def test_weights_sum_to_one(self):
        points, weights = assembly.tetrahedron_rule(2)
        self.assertEqual(points.shape, (8, 4))
        self.assertAlmostEqual(weights.sum(), 1.0)
        np.testing.assert_allclose(points.sum(axis=1), 1.0)

    def test_exact_for_cubic_monomials(self):
        points, weights = assembly.tetrahedron_rule(2)
        self.assertAlmostEqual(float(weights @ (points[:, 1] * points[:, 2] * points[:, 3])), 1.0 / 120.0)
        self.assertAlmostEqual(float(weights @ points[:, 0] ** 3), 1.0 / 20.0)

    def test_triple_table(self):
        self.assertAlmostEqual(assembly.TRIPLE[0, 0, 0], 1.0 / 20.0)
        self.assertAlmostEqual(assembly.TRIPLE[0, 0, 1], 1.0 / 60.0)
        self.assertAlmostEqual(assembly.TRIPLE[0, 1, 2], 1.0 / 120.0)
        self.assertAlmostEqual(assembly.TRIPLE.sum(), 1.0)


class FormTests(unittest.TestCase):
    def setUp(self):
        self.box = _box()
        self.forms = assembly.assemble_static(self.box)

    def test_mass_integrates_constants(self):
        ones = np.ones(self.box.n_vertices)
        self.assertAlmostEqual(float(ones @ self.forms.scalar_mass @ ones), 3.0)
        self.assertAlmostEqual(self.forms.lumped.sum(), 3.0)

    def test_stiffness_of_linear_field(self):
        u = self.box.vertices[:, 0]
        self.assertAlmostEqual(float(u @ self.forms.scalar_stiffness @ u), 3.0)

    def test_vector_forms_are_kronecker(self):
        m = _nodal(self.box, lambda x: (x[0], 0.0, 0.0))
        n = _nodal(self.box, lambda x: (0.0, x[0], 0.0))
        self.assertAlmostEqual(float(m @ self.forms.vector_stiffness @ m), 3.0)
        self.assertAlmostEqual(float(m @ self.forms.vector_stiffness @ n), 0.0)

    def test_bulk_dmi_is_curl(self):
        u = _nodal(self.box, lambda x: (0.0, x[0], 0.0))
        v = _nodal(self.box, lambda x: (0.0, 0.0, 1.0))
        self.assertAlmostEqual(float(v @ self.forms.dmi_blocks @ u), 3.0)

    def test_interfacial_dmi(self):
        forms = assembly.assemble_static(self.box, dmi_form="interfacial")
        ez = _nodal(self.box, lambda x: (0.0, 0.0, 1.0))
        ex = _nodal(self.box, lambda x: (1.0, 0.0, 0.0))
        divergence = _nodal(self.box, lambda x: (x[0], x[1], 0.0))
        tilt = _nodal(self.box, lambda x: (0.0, 0.0, x[0]))
        self.assertAlmostEqual(float(ez @ forms.dmi_blocks @ divergence), 6.0)
        self.assertAlmostEqual(float(ex @ forms.dmi_blocks @ tilt), -3.0)

    def test_chirality_flips_sign(self):
        flipped = assembly.assemble_static(self.box, chirality=-1)
        np.testing.assert_allclose(flipped.dmi_blocks.toarray(), -self.forms.dmi_blocks.toarray())
        with self.assertRaises(InvalidArgument):
            assembly.assemble_static(self.box, chirality=2)

    def test_no_dmi(self):
        forms = assembly.assemble_static(self.box, dmi_form="none")
        self.assertEqual(forms.dmi_blocks.nnz, 0)

    def test_unknown_dmi_form(self):
        with self.assertRaises(InvalidArgument):
            assembly.dmi_tensor("helical")

    def test_cross_matrix(self):
        m = _nodal(self.box, lambda x: (0.0, np.sin(x[0]), np.cos(x[0])))
        cross = assembly.assemble_cross(self.box, m)
        np.testing.assert_allclose((cross + cross.T).toarray(), 0.0, atol=1e-14)
        ez = _nodal(self.box, lambda x: (0.0, 0.0, 1.0))
        ex = _nodal(self.box, lambda x: (1.0, 0.0, 0.0))
        ey = _nodal(self.box, lambda x: (0.0, 1.0, 0.0))
        const = assembly.assemble_cross(self.box, ez)
        self.assertAlmostEqual(float(ey @ const @ ex), 3.0)

    def test_weighted_mass_with_unit_weight(self):
        weighted = assembly.assemble_weighted_mass(self.box, 1.0)
        np.testing.assert_allclose(weighted.toarray(), self.forms.vector_mass.toarray(), atol=1e-14)

    def test_cutoff_weight_of_helix_is_integrated_exactly(self):
        # lambda is affine per cell and stays in (0, M): W is affine, the rule is exact
        params = physics.MaterialParams(10.0, ldm=20.0, alpha=0.08)
        k = 0.0221
        M = physics.M_of_k(k)
        m = assembly.interpolate_nodal(assembly.helix(params.ldm / (2.0 * params.lex**2)), self.box)
        fine_points, fine_weights = assembly.tetrahedron_rule(5)
        lam = physics.lambda_at_quadrature(m, self.box, params)
        lam_fine = physics.lambda_at_quadrature(m, self.box, params, fine_points)
        for values in (lam, lam_fine):
            self.assertTrue((values > 0.0).all())
            self.assertTrue((values < M).all())
        a = assembly.assemble_weighted_mass(self.box, physics.cutoff_W(lam, M, k, params.alpha))
        b = assembly.assemble_weighted_mass(
            self.box, physics.cutoff_W(lam_fine, M, k, params.alpha), fine_points, fine_weights
        )
        np.testing.assert_allclose(a.toarray(), b.toarray(), atol=1e-12)

    def test_weighted_mass_is_bounded_by_weight_range(self):
        rng = np.random.default_rng(5)
        weight = rng.uniform(0.03, 0.2, size=(self.box.n_cells, len(assembly.QUAD_WEIGHTS)))
        A = assembly.assemble_weighted_mass(self.box, weight).toarray()
        mass = self.forms.vector_mass.toarray()
        lower = np.linalg.eigvalsh(A - 0.03 * mass)
        upper = np.linalg.eigvalsh(0.2 * mass - A)
        self.assertGreaterEqual(lower.min(), -1e-12)
        self.assertGreaterEqual(upper.min(), -1e-12)

    def test_curl_is_bounded_by_gradient(self):
        rng = np.random.default_rng(8)
        volumes = self.box.volumes()
        for _ in range(100):
            u = rng.normal(size=(self.box.n_vertices, 3))
            curl = assembly.apply_dmi_operator(assembly.cell_gradients(u, self.box), "bulk")
            curl_sq = float(volumes @ np.einsum("ca,ca->c", curl, curl))
            grad_sq = float(u.ravel() @ (self.forms.vector_stiffness @ u.ravel()))
            self.assertLessEqual(curl_sq, 2.0 * grad_sq * (1.0 + 1e-12))

    def test_curl_integrates_by_parts_away_from_boundary(self):
        cube = mesh.generate_type1((3, 3, 3), (3.0, 3.0, 3.0))
        C = assembly.assemble_dmi(cube, "bulk")
        inside = np.all((cube.vertices > 1e-9) & (cube.vertices < 3.0 - 1e-9), axis=1)
        self.assertEqual(int(inside.sum()), 8)
        rng = np.random.default_rng(9)
        for _ in range(10):
            u = rng.normal(size=(cube.n_vertices, 3)) * inside[:, None]
            v = rng.normal(size=(cube.n_vertices, 3)) * inside[:, None]
            forward = float(v.ravel() @ (C @ u.ravel()))
            backward = float(u.ravel() @ (C @ v.ravel()))
            self.assertAlmostEqual(forward, backward, delta=1e-12 * max(1.0, abs(forward)))

    def test_weighted_mass_shape_check(self):
        with self.assertRaises(InvalidArgument):
            assembly.assemble_weighted_mass(self.box, np.ones((2, 2)))


class ProfileTests(unittest.TestCase):
    def test_helix_curl(self):
        q = 0.3
        profile = assembly.helix(q)
        np.testing.assert_allclose(profile((0.0, 0.0, 1.0)), (np.cos(q), np.sin(q), 0.0))
        shifted = assembly.helix(q, axis=0)
        np.testing.assert_allclose(shifted((1.0, 0.0, 0.0)), (0.0, np.cos(q), np.sin(q)))

    def test_skyrmion_like(self):
        profile = assembly.skyrmion_like(2.0, centre=(5.0, 5.0))
        self.assertEqual(profile((5.5, 5.0, 0.0)), (0.0, 0.0, -1.0))
        self.assertEqual(profile((0.0, 0.0, 0.0)), (0.0, 0.0, 1.0))


if __name__ == "__main__":
    unittest.main()
