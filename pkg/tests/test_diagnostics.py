import unittest

import numpy as np

from tangent_llg import assembly
from tangent_llg import diagnostics
from tangent_llg import integrators
from tangent_llg import mesh
from tangent_llg import physics
from tangent_llg.errors import DiagnosticUnavailable
from tangent_llg.errors import InvalidArgument

UNIT_TET = mesh.Mesh([(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)], [[0, 1, 2, 3]])


def _field_with_defect(g):
    """Nodal field along z with |m|^2 - 1 = g."""
    m = np.zeros((4, 3))
    m[:, 2] = np.sqrt(1.0 + np.asarray(g, dtype=float))
    return m


class ConstraintTests(unittest.TestCase):
    def test_unit_field_has_no_violation(self):
        m = _field_with_defect([0.0, 0.0, 0.0, 0.0])
        self.assertEqual(diagnostics.constraint_violation_L1(m, UNIT_TET), 0.0)

    def test_single_sign(self):
        m = _field_with_defect([0.1, 0.2, 0.3, 0.4])
        self.assertAlmostEqual(diagnostics.constraint_violation_L1(m, UNIT_TET), 0.25 / 6.0)

    def test_one_positive_vertex(self):
        # |g| for g = 4 lambda_0 - 1, scaled by 1/4
        m = _field_with_defect([0.75, -0.25, -0.25, -0.25])
        self.assertAlmostEqual(diagnostics.constraint_violation_L1(m, UNIT_TET), 162.0 / 1024.0 / 6.0)

    def test_three_positive_vertices(self):
        m = _field_with_defect([0.25, 0.25, -0.75, 0.25])
        self.assertAlmostEqual(diagnostics.constraint_violation_L1(m, UNIT_TET), 162.0 / 1024.0 / 6.0)

    def test_two_positive_vertices(self):
        for g in ([0.5, 0.5, -0.5, -0.5], [-0.5, 0.5, -0.5, 0.5], [0.5, -0.5, -0.5, 0.5]):
            m = _field_with_defect(g)
            self.assertAlmostEqual(diagnostics.constraint_violation_L1(m, UNIT_TET), 3.0 / 16.0 / 6.0)

    def test_matches_sampling_on_box(self):
        box = mesh.generate_type1((2, 1, 1), (2.0, 1.0, 1.0))
        rng = np.random.default_rng(4)
        g = rng.uniform(-0.5, 0.5, size=box.n_vertices)
        m = np.zeros((box.n_vertices, 3))
        m[:, 0] = np.sqrt(1.0 + g)
        exact = diagnostics.constraint_violation_L1(m, box)
        points, weights = assembly.tetrahedron_rule(12)
        values = np.abs(np.einsum("qj,cj->cq", points, g[box.cells]))
        sampled = float(np.sum(box.volumes()[:, None] * weights[None, :] * values))
        self.assertAlmostEqual(exact, sampled, places=2)


class SeriesTests(unittest.TestCase):
    def test_times_must_increase(self):
        series = diagnostics.TimeSeries()
        series.add_sample({"t": 0.0})
        with self.assertRaises(InvalidArgument):
            series.add_sample({"t": 0.0})

    def test_residual_needs_steps(self):
        with self.assertRaises(DiagnosticUnavailable):
            diagnostics.energy_law_residual(
                diagnostics.TimeSeries(), integrators.SchemeChoice("tps1"), physics.MaterialParams(1.0)
            )

    def test_residual_needs_keys(self):
        series = diagnostics.TimeSeries()
        series.add_step({"k": 0.1})
        with self.assertRaises(DiagnosticUnavailable):
            diagnostics.energy_law_residual(series, integrators.SchemeChoice("tps1"), physics.MaterialParams(1.0))

    def test_loglog_slope(self):
        xs = [0.1, 0.05, 0.025]
        self.assertAlmostEqual(diagnostics.loglog_slope(xs, [3.0 * x**2 for x in xs]), 2.0)
        with self.assertRaises(DiagnosticUnavailable):
            diagnostics.loglog_slope([0.1], [1.0])


class RecordTests(unittest.TestCase):
    def setUp(self):
        self.box = mesh.generate_type1((2, 2, 1), (40.0, 40.0, 10.0))
        self.forms = assembly.assemble_static(self.box)
        self.params = physics.MaterialParams(10.0, ldm=20.0, alpha=0.08)

    def test_average_of_uniform_state(self):
        m = assembly.interpolate_nodal(assembly.uniform((0.6, 0.0, 0.8)), self.box)
        np.testing.assert_allclose(diagnostics.avg_magnetization(m, self.forms), (0.6, 0.0, 0.8))

    def test_average_of_unit_fields_stays_in_ball(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            m = rng.normal(size=(self.box.n_vertices, 3))
            m /= np.linalg.norm(m, axis=1)[:, None]
            self.assertLessEqual(float(np.linalg.norm(diagnostics.avg_magnetization(m, self.forms))), 1.0 + 1e-12)

    def test_sample_and_step_records(self):
        m0 = assembly.interpolate_nodal(assembly.uniform((0.0, 0.0, 1.0)), self.box)
        state = integrators.initial_state(m0, integrators.SchemeChoice("tps1"))
        sample = diagnostics.sample_record(state, self.forms, self.params)
        for key in diagnostics.SAMPLE_KEYS:
            self.assertIn(key, sample)
        self.assertEqual(sample["v_l2"], 0.0)
        v, after = integrators.tps1_step(state, self.forms, self.params, 0.0221, solver_tol=1e-12)
        step = diagnostics.step_record(state, after, v, self.forms, self.params)
        self.assertTrue(diagnostics.stability_holds(step))
        self.assertGreater(step["v_sq"], 0.0)

    def test_tps1_energy_law_without_dmi(self):
        params = physics.MaterialParams(10.0, alpha=0.08)
        forms = assembly.assemble_static(self.box, dmi_form="none")
        m0 = assembly.interpolate_nodal(assembly.helix(0.05, axis=0), self.box) + (0.0, 0.0, 0.5)
        state = integrators.initial_state(m0, integrators.SchemeChoice("tps1"))
        series = diagnostics.TimeSeries()
        for _ in range(5):
            v, after = integrators.tps1_step(state, forms, params, 0.1, solver_tol=1e-12)
            series.add_step(diagnostics.step_record(state, after, v, forms, params))
            state = after
        residuals = diagnostics.energy_law_residual(series, integrators.SchemeChoice("tps1"), params)
        scale = max(step["E_before"] for step in series.steps)
        self.assertTrue((residuals <= 1e-9 * scale).all())
        h = mesh.analyze_mesh(self.box).h_max
        self.assertLess(diagnostics.energy_law_constant(series, residuals, h), 1e-3)

    def test_tps2_energy_law_without_dmi(self):
        params = physics.MaterialParams(10.0, alpha=0.08)
        forms = assembly.assemble_static(self.box, dmi_form="none")
        m0 = assembly.interpolate_nodal(assembly.helix(0.05, axis=0), self.box) + (0.0, 0.0, 0.5)
        scheme = integrators.SchemeChoice("tps2")
        state = integrators.initial_state(m0, scheme)
        series = diagnostics.TimeSeries()
        for _ in range(5):
            v, after = integrators.tps2_step(state, forms, params, 0.1, solver_tol=1e-12)
            series.add_step(diagnostics.step_record(state, after, v, forms, params))
            state = after
        self.assertTrue(all(step["rho"] == physics.rho_of_k(0.1) for step in series.steps))
        self.assertTrue(all(step["weighted_vv"] > 0.0 for step in series.steps))
        residuals = diagnostics.energy_law_residual(series, scheme, params)
        scale = max(step["E_before"] for step in series.steps)
        self.assertTrue((residuals <= 1e-9 * scale).all())

    def test_tps2_residual_needs_weighted_term(self):
        m0 = assembly.interpolate_nodal(assembly.uniform((0.0, 0.0, 1.0)), self.box)
        state = integrators.initial_state(m0, integrators.SchemeChoice("tps1"))
        v, after = integrators.tps1_step(state, self.forms, self.params, 0.0221, solver_tol=1e-12)
        series = diagnostics.TimeSeries()
        series.add_step(diagnostics.step_record(state, after, v, self.forms, self.params))
        with self.assertRaises(DiagnosticUnavailable):
            diagnostics.energy_law_residual(series, integrators.SchemeChoice("tps2"), self.params)


if __name__ == "__main__":
    unittest.main()
