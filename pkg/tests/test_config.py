import os
import tempfile
import unittest

import numpy as np

from tangent_llg import config
from tangent_llg import output
from tangent_llg import physics
from tangent_llg.errors import ConfigError

MINIMAL = """\
scheme = tps1
k = 0.05
T = 1.0
lex = 1.0
alpha = 0.5
mesh_cells = 2, 2, 1
mesh_size = 2.0, 2.0, 1.0
"""


class ParseTests(unittest.TestCase):
    def test_defaults(self):
        cfg = config.parse_config_text(MINIMAL)
        self.assertEqual(cfg.scheme.kind, "tps1")
        self.assertEqual(cfg.scheme.theta, 1.0)
        self.assertEqual(cfg.get("dmi_form"), "bulk")
        self.assertEqual(cfg.get("output_every"), 10)
        self.assertEqual(cfg.material.ldm, 0.0)
        self.assertFalse(cfg.si_mode)

    def test_comments_and_blank_lines(self):
        cfg = config.parse_config_text("# header\n\n" + MINIMAL.replace("alpha = 0.5", "alpha = 0.5  # damping"))
        self.assertEqual(cfg.material.alpha, 0.5)

    def test_emit_round_trip(self):
        for name in sorted(config.PRESETS):
            cfg = config.preset(name)
            self.assertEqual(config.parse_config_text(config.emit_config(cfg)), cfg)

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as ctx:
            config.parse_config_text(MINIMAL + "stray_field = true\n")
        self.assertIn("unknown key stray_field", str(ctx.exception))

    def test_duplicate_key(self):
        with self.assertRaises(ConfigError):
            config.parse_config_text(MINIMAL + "k = 0.1\n")

    def test_missing_key(self):
        with self.assertRaises(ConfigError) as ctx:
            config.parse_config_text(MINIMAL.replace("alpha = 0.5\n", ""))
        self.assertIn("missing key alpha", str(ctx.exception))

    def test_bad_values(self):
        with self.assertRaises(ConfigError):
            config.parse_config_text(MINIMAL.replace("k = 0.05", "k = fast"))
        with self.assertRaises(ConfigError):
            config.parse_config_text(MINIMAL.replace("k = 0.05", "k = -0.05"))
        with self.assertRaises(ConfigError):
            config.parse_config_text(MINIMAL.replace("alpha = 0.5", "alpha = 2.0"))
        with self.assertRaises(ConfigError):
            config.parse_config_text(MINIMAL.replace("scheme = tps1", "scheme = rk4"))

    def test_conflicting_keys(self):
        with self.assertRaises(ConfigError):
            config.parse_config_text(MINIMAL + "time_step_s = 1e-13\nMs = 1e6\n")

    def test_si_keys_need_ms(self):
        with self.assertRaises(ConfigError):
            config.parse_config_text(MINIMAL.replace("lex = 1.0", "A = 1e-11"))

    def test_with_overrides(self):
        cfg = config.parse_config_text(MINIMAL)
        other = cfg.with_overrides(k=0.01)
        self.assertEqual(other.k, 0.01)
        self.assertEqual(cfg.k, 0.05)
        with self.assertRaises(ConfigError):
            cfg.with_overrides(bogus=1)


class PresetTests(unittest.TestCase):
    def test_cuboid(self):
        cfg = config.preset("cuboid")
        self.assertEqual(cfg.k, 0.0221)
        self.assertEqual(cfg.material.lex, 10.0)
        self.assertEqual(cfg.material.ldm, 20.0)

    def test_nanodisk_is_rescaled(self):
        cfg = config.preset("nanodisk")
        self.assertTrue(cfg.si_mode)
        lex, ldm, k = physics.rescale(1.5e-11, 3e-3, 5.8e5, time_step_s=1e-13)
        self.assertAlmostEqual(cfg.material.lex, lex)
        self.assertAlmostEqual(cfg.material.ldm, ldm)
        self.assertAlmostEqual(cfg.k, k)
        self.assertAlmostEqual(cfg.material.anisotropy_q, physics.anisotropy_strength(8e5, 5.8e5))
        self.assertEqual(cfg.material.dmi_form, "interfacial")

    def test_fege_pulse(self):
        cfg = config.preset("fege-pulse")
        pulse = cfg.material.pulse
        self.assertIsNotNone(pulse)
        self.assertAlmostEqual(pulse.h_max, physics.field_from_tesla(5e-3, 3.84e5))
        self.assertAlmostEqual(pulse.t_hold, physics.time_from_seconds(70e-12, 3.84e5))
        self.assertEqual(cfg.scheme.kind, "tps1")

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError):
            config.preset("permalloy")


class BuilderTests(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tempdir.cleanup()

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            config.parse_config(os.path.join(self.tempdir.name, "missing.cfg"))

    def test_output_dir_from_source(self):
        path = os.path.join(self.tempdir.name, "relax.cfg")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(MINIMAL)
        cfg = config.parse_config(path)
        self.assertEqual(os.path.basename(cfg.output_dir()), "relax")
        self.assertEqual(cfg.output_dir("elsewhere"), "elsewhere")

    def test_uniform_initial_is_normalized(self):
        cfg = config.parse_config_text(MINIMAL + "initial_m = 0.0, 3.0, 4.0\n")
        m0 = config.initial_field(cfg, config.build_mesh(cfg))
        np.testing.assert_allclose(m0, np.tile([0.0, 0.6, 0.8], (m0.shape[0], 1)))

    def test_skyrmion_centre_defaults_to_box_centre(self):
        cfg = config.parse_config_text(MINIMAL + "initial = skyrmion\ninitial_radius = 0.1\n")
        box = config.build_mesh(cfg)
        m0 = config.initial_field(cfg, box)
        centre = np.flatnonzero(np.all(box.vertices[:, :2] == (1.0, 1.0), axis=1))
        np.testing.assert_allclose(m0[centre], [[0.0, 0.0, -1.0]] * len(centre))
        self.assertEqual(int((m0[:, 2] < 0).sum()), len(centre))

    def test_initial_from_vtk(self):
        cfg = config.parse_config_text(MINIMAL)
        box = config.build_mesh(cfg)
        m = config.initial_field(cfg.with_overrides(initial="helix", initial_q=0.5), box)
        path = os.path.join(self.tempdir.name, "m.vtk")
        output.write_vtk(box, m, path)
        loaded = config.initial_field(cfg.with_overrides(initial="file", initial_file=path), box)
        np.testing.assert_allclose(loaded, m)

    def test_initial_from_vtk_must_match_mesh(self):
        cfg = config.parse_config_text(MINIMAL)
        small = config.build_mesh(cfg.with_overrides(mesh_cells=(1, 1, 1)))
        path = os.path.join(self.tempdir.name, "m.vtk")
        output.write_vtk(small, np.tile([0.0, 0.0, 1.0], (small.n_vertices, 1)), path)
        with self.assertRaises(ConfigError):
            config.initial_field(cfg.with_overrides(initial="file", initial_file=path), config.build_mesh(cfg))


if __name__ == "__main__":
    unittest.main()
