"""Flat "key = value" simulation configs, presets, and mesh/initial-state builders."""

import os

import numpy as np

from tangent_llg import assembly
from tangent_llg import constants
from tangent_llg import fs
from tangent_llg import integrators
from tangent_llg import mesh as mesh_mod
from tangent_llg import output
from tangent_llg import physics
from tangent_llg.errors import ConfigError
from tangent_llg.errors import InvalidArgument

# key -> (kind, default); None means optional without default
SCHEMA = {
    "scheme": (("choice",) + integrators.SCHEMES, None),
    "theta": ("float", 1.0),
    "stabilization": ("bool", True),
    "k": ("float", None),
    "time_step_s": ("float", None),
    "T": ("float", None),
    "final_time_s": ("float", None),
    "lex": ("float", None),
    "ldm": ("float", None),
    "alpha": ("float", None),
    "A": ("float", None),
    "D": ("float", None),
    "Ms": ("float", None),
    "K": ("float", None),
    "gamma0": ("float", constants.GAMMA0),
    "dmi_form": (("choice",) + assembly.DMI_FORMS, "bulk"),
    "chirality": ("int", 1),
    "anisotropy_q": ("float", None),
    "anisotropy_axis": ("vec3", (0.0, 0.0, 1.0)),
    "zeeman_field": ("vec3", (0.0, 0.0, 0.0)),
    "pulse_h_max": ("float", None),
    "pulse_b_max_mT": ("float", None),
    "pulse_ramp_up": ("float", None),
    "pulse_hold": ("float", None),
    "pulse_ramp_down": ("float", None),
    "pulse_start": ("float", None),
    "pulse_ramp_up_ps": ("float", None),
    "pulse_hold_ps": ("float", None),
    "pulse_ramp_down_ps": ("float", None),
    "pulse_start_ps": ("float", None),
    "pulse_direction": ("vec3", (1.0, 0.0, 0.0)),
    "mesh": (("choice", "type1", "type2", "file"), "type1"),
    "mesh_cells": ("ivec3", None),
    "mesh_size": ("vec3", None),
    "mesh_file": ("str", None),
    "initial": (("choice", "uniform", "skyrmion", "helix", "file"), "uniform"),
    "initial_m": ("vec3", (0.0, 0.0, 1.0)),
    "initial_radius": ("float", None),
    "initial_center": ("vec2", None),
    "initial_q": ("float", None),
    "initial_axis": ("int", 2),
    "initial_file": ("str", None),
    "output_every": ("int", 10),
    "vtk_every": ("int", 0),
    "solver_tol": ("float", constants.DEFAULT_SOLVER_TOL),
    "output_dir": ("str", None),
}

_PULSE_TIMES = ("ramp_up", "hold", "ramp_down", "start")

PRESETS = {
    "cuboid": """\
# Cuboid 80 x 80 x 10 nm, exchange + bulk DMI, constant tilted initial state
scheme = tps1
theta = 1.0
k = 0.0221
T = 200.0
lex = 10.0
ldm = 20.0
alpha = 0.08
dmi_form = bulk
mesh = type1
mesh_cells = 16, 16, 2
mesh_size = 80.0, 80.0, 10.0
initial = uniform
initial_m = 0.01, -0.01, 0.9998999949995
output_every = 10
""",
    "nanodisk": """\
# Thin cobalt film without stray field: interfacial DMI, perpendicular anisotropy
scheme = tps2
A = 1.5e-11
D = 3e-3
Ms = 5.8e5
K = 8e5
alpha = 0.3
dmi_form = interfacial
anisotropy_axis = 0.0, 0.0, 1.0
time_step_s = 1e-13
final_time_s = 2e-9
mesh = type1
mesh_cells = 40, 40, 1
mesh_size = 80.0, 80.0, 0.4
initial = skyrmion
initial_radius = 15.0
output_every = 100
""",
    "fege-pulse": """\
# FeGe film without stray field, excited by an in-plane 40/70/40 ps field pulse.
# TPS2 is refused by the ellipticity guard at this damping.
scheme = tps1
theta = 1.0
A = 8.78e-12
D = 1.58e-3
Ms = 3.84e5
alpha = 0.002
dmi_form = bulk
time_step_s = 1e-13
final_time_s = 1e-9
pulse_b_max_mT = 5.0
pulse_ramp_up_ps = 40.0
pulse_hold_ps = 70.0
pulse_ramp_down_ps = 40.0
pulse_direction = 1.0, 0.0, 0.0
mesh = type1
mesh_cells = 28, 28, 2
mesh_size = 140.0, 140.0, 10.0
initial = skyrmion
initial_radius = 20.0
output_every = 100
""",
}


def _parse_value(key, kind, text, line_no):
    def fail(expected):
        raise ConfigError(f"key {key}: expected {expected}, got {text!r}", detail=f"line {line_no}")

    if isinstance(kind, tuple):
        if text not in kind[1:]:
            fail("one of " + ", ".join(kind[1:]))
        return text
    if kind == "str":
        if not text:
            fail("a value")
        return text
    if kind == "bool":
        lowered = text.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        fail("a boolean")
    try:
        if kind == "float":
            return float(text)
        if kind == "int":
            return int(text)
        parts = [p.strip() for p in text.split(",")]
        size = {"vec3": 3, "ivec3": 3, "vec2": 2}[kind]
        if len(parts) != size:
            fail(f"{size} comma-separated numbers")
        cast = int if kind == "ivec3" else float
        return tuple(cast(p) for p in parts)
    except ValueError:
        fail(kind)


def _format_value(kind, value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config_text(text, source="<config>"):
    values = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: line {line_no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key}", detail=f"{source} line {line_no}")
        if key in values:
            raise ConfigError(f"duplicate key {key}", detail=f"{source} line {line_no}")
        values[key] = _parse_value(key, SCHEMA[key][0], value, line_no)
    return SimConfig(values)


def parse_config(path):
    text = fs.read_text(path)
    if text is None:
        raise FileNotFoundError(f"config file not found: {path}")
    if isinstance(text, dict):
        raise OSError(f"cannot read config file {path}: {text.get('_error')}")
    cfg = parse_config_text(text, source=path)
    cfg.source = path
    return cfg


def emit_config(cfg):
    lines = [f"{key} = {_format_value(SCHEMA[key][0], cfg.values[key])}" for key in SCHEMA if key in cfg.values]
    return "\n".join(lines) + "\n"


def preset(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name}", detail=f"available: {', '.join(sorted(PRESETS))}")
    return parse_config_text(PRESETS[name], source=f"preset:{name}")


class SimConfig:
    """Validated settings; typed views (scheme, material, k, T) are derived on access."""

    def __init__(self, values):
        values = dict(values)
        for key, (_kind, default) in SCHEMA.items():
            if key not in values and default is not None:
                values[key] = default
        self.values = values
        self.source = None
        self._validate()

    def __eq__(self, other):
        if not isinstance(other, SimConfig):
            return NotImplemented
        return self.values == other.values

    def __repr__(self):
        return f"SimConfig({self.values!r})"

    def get(self, key, default=None):
        return self.values.get(key, default)

    def with_overrides(self, **updates):
        values = dict(self.values)
        for key, value in updates.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown key {key}")
            if value is None:
                values.pop(key, None)
            else:
                values[key] = value
        return SimConfig(values)

    def _require(self, *alternatives):
        if not any(key in self.values for key in alternatives):
            raise ConfigError(f"missing key {alternatives[0]}")

    def _exclusive(self, first, second):
        if first in self.values and second in self.values:
            raise ConfigError(f"conflicting keys {first} and {second}")

    def _validate(self):
        self._require("scheme")
        self._require("alpha")
        self._require("k", "time_step_s")
        self._require("T", "final_time_s")
        self._require("lex", "A")
        for first, second in (("k", "time_step_s"), ("T", "final_time_s"), ("lex", "A"), ("ldm", "D"),
                              ("anisotropy_q", "K"), ("pulse_h_max", "pulse_b_max_mT")):
            self._exclusive(first, second)
        for name in _PULSE_TIMES:
            self._exclusive(f"pulse_{name}", f"pulse_{name}_ps")
        si_keys = [key for key in ("A", "D", "K", "time_step_s", "final_time_s", "pulse_b_max_mT") if key in self.values]
        si_keys += [key for key in self.values if key.endswith("_ps")]
        if si_keys and "Ms" not in self.values:
            raise ConfigError("missing key Ms", detail=f"needed by {', '.join(sorted(si_keys))}")
        if "A" in self.values and "ldm" in self.values:
            raise ConfigError("conflicting keys ldm and A", detail="give D with A")
        if not self.k > 0:
            raise ConfigError("k must be positive", detail=f"got {self.k!r}")
        if not self.T >= 0:
            raise ConfigError("T must be nonnegative", detail=f"got {self.T!r}")
        if self.values["output_every"] < 1:
            raise ConfigError("output_every must be at least 1")
        if self.values["vtk_every"] < 0:
            raise ConfigError("vtk_every must be nonnegative")
        if not self.values["solver_tol"] > 0:
            raise ConfigError("solver_tol must be positive")
        if self.values["mesh"] == "file":
            self._require("mesh_file")
        else:
            self._require("mesh_cells")
            self._require("mesh_size")
        if self.values["initial"] == "skyrmion":
            self._require("initial_radius")
        if self.values["initial"] == "file":
            self._require("initial_file")
        try:
            self.scheme
            self.material
        except InvalidArgument as exc:
            raise ConfigError(exc.reason, detail=exc.detail)

    def _seconds_to_time(self, seconds):
        return physics.time_from_seconds(seconds, self.values["Ms"], self.values["gamma0"])

    @property
    def scheme(self):
        return integrators.SchemeChoice(
            self.values["scheme"],
            theta=self.values["theta"],
            stabilization_on=self.values["stabilization"],
        )

    @property
    def k(self):
        if "k" in self.values:
            return self.values["k"]
        return self._seconds_to_time(self.values["time_step_s"])

    @property
    def T(self):
        if "T" in self.values:
            return self.values["T"]
        return self._seconds_to_time(self.values["final_time_s"])

    @property
    def si_mode(self):
        return "A" in self.values

    def lengths(self):
        if self.si_mode:
            lex, ldm, _ = physics.rescale(
                self.values["A"], self.values.get("D", 0.0), self.values["Ms"], self.values["gamma0"]
            )
            return lex, ldm
        return self.values["lex"], self.values.get("ldm", 0.0)

    def _pulse(self):
        v = self.values
        if "pulse_h_max" in v:
            h_max = v["pulse_h_max"]
        elif "pulse_b_max_mT" in v:
            h_max = physics.field_from_tesla(v["pulse_b_max_mT"] * 1e-3, v["Ms"])
        else:
            return None
        times = {}
        for name in _PULSE_TIMES:
            if f"pulse_{name}" in v:
                times[name] = v[f"pulse_{name}"]
            elif f"pulse_{name}_ps" in v:
                times[name] = self._seconds_to_time(v[f"pulse_{name}_ps"] * 1e-12)
            else:
                times[name] = 0.0
        return physics.PulseSchedule(
            h_max,
            times["ramp_up"],
            times["hold"],
            times["ramp_down"],
            direction=v["pulse_direction"],
            t_start=times["start"],
        )

    @property
    def material(self):
        lex, ldm = self.lengths()
        v = self.values
        if "K" in v:
            q_ani = physics.anisotropy_strength(v["K"], v["Ms"])
        else:
            q_ani = v.get("anisotropy_q", 0.0)
        return physics.MaterialParams(
            lex,
            ldm=ldm,
            alpha=v["alpha"],
            dmi_form=v["dmi_form"],
            chirality=v["chirality"],
            anisotropy_q=q_ani,
            anisotropy_axis=v["anisotropy_axis"],
            zeeman_field=v["zeeman_field"],
            pulse=self._pulse(),
        )

    def output_dir(self, override=None):
        if override:
            return override
        if "output_dir" in self.values:
            return self.values["output_dir"]
        stem = "run"
        if self.source:
            stem = os.path.splitext(os.path.basename(self.source))[0]
        return os.path.join(constants.OUTPUT_ROOT, stem)

    def derived(self):
        """Nondimensional quantities actually used by the run."""
        lex, ldm = self.lengths()
        params = self.material
        payload = {"lex": lex, "ldm": ldm, "k": self.k, "T": self.T, "anisotropy_q": params.anisotropy_q}
        if params.pulse is not None:
            payload["pulse_h_max"] = params.pulse.h_max
            payload["pulse_duration"] = params.pulse.duration
        return payload


def build_mesh(cfg):
    kind = cfg.get("mesh")
    if kind == "file":
        return mesh_mod.load_mesh(cfg.get("mesh_file"))
    generator = mesh_mod.generate_type1 if kind == "type1" else mesh_mod.generate_type2
    return generator(cfg.get("mesh_cells"), cfg.get("mesh_size"))


def initial_field(cfg, mesh):
    kind = cfg.get("initial")
    if kind == "file":
        _vertices, _cells, values = output.read_vtk(cfg.get("initial_file"))
        if values.shape != (mesh.n_vertices, 3):
            raise ConfigError(
                "initial_file does not match the mesh",
                detail=f"{values.shape[0]} values for {mesh.n_vertices} vertices",
            )
        return values
    if kind == "skyrmion":
        centre = cfg.get("initial_center")
        if centre is None:
            lo, hi = mesh.bounding_box()
            centre = tuple(0.5 * (lo[:2] + hi[:2]))
        profile = assembly.skyrmion_like(cfg.get("initial_radius"), centre)
    elif kind == "helix":
        q = cfg.get("initial_q")
        if q is None:
            lex, ldm = cfg.lengths()
            q = ldm / (2.0 * lex**2)
        profile = assembly.helix(q, axis=cfg.get("initial_axis"))
    else:
        direction = np.asarray(cfg.get("initial_m"), dtype=float)
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            raise ConfigError("initial_m must be nonzero")
        profile = assembly.uniform(direction / norm)
    return assembly.interpolate_nodal(profile, mesh)
