"""Observables and verification quantities recorded along a run."""

import math

import numpy as np

from tangent_llg import assembly
from tangent_llg import physics
from tangent_llg.errors import DiagnosticUnavailable
from tangent_llg.errors import InvalidArgument

SAMPLE_KEYS = (
    "t",
    "E_total",
    "E_exchange",
    "E_dmi",
    "mx",
    "my",
    "mz",
    "v_l2",
    "constraint_l1",
    "stability_ok",
)

_STEP_KEYS = ("E_before", "E_after", "v_sq", "grad_v_sq", "dmi_vv", "work", "k")


class TimeSeries:
    """Sampled observables plus a per-step ledger of energy-law quantities."""

    def __init__(self):
        self.samples = []
        self.steps = []

    def __len__(self):
        return len(self.samples)

    def add_sample(self, record):
        if self.samples and record["t"] <= self.samples[-1]["t"]:
            raise InvalidArgument("sample times must increase", f"{record['t']!r} after {self.samples[-1]['t']!r}")
        self.samples.append(record)

    def add_step(self, record):
        self.steps.append(record)

    def column(self, key):
        return np.array([sample[key] for sample in self.samples], dtype=float)


def avg_magnetization(m, forms):
    m = assembly.as_field(m, forms.mesh)
    return forms.lumped @ m / forms.volume


def gradient_norm(field, forms):
    flat = np.asarray(field, dtype=float).ravel()
    return math.sqrt(max(0.0, float(flat @ (forms.vector_stiffness @ flat))))


def _tet_volume(a, b, c, d):
    return abs(np.linalg.det(np.array([b - a, c - a, d - a]))) / 6.0


def _edge_point(pts, g, i, j):
    """Zero of the linear interpolant on edge i-j with g[i] > 0 >= g[j]."""
    t = g[i] / (g[i] - g[j])
    return pts[i] + t * (pts[j] - pts[i])


def _positive_part(g, pts, volume):
    """Exact integral of max(g, 0) for a linear g on one tetrahedron."""
    positive = [i for i in range(4) if g[i] > 0.0]
    if not positive:
        return 0.0
    if len(positive) == 4:
        return volume * float(g.mean())
    if len(positive) == 3:
        # g_+ = g + (-g)_+ and -g has at most one positive vertex
        return volume * float(g.mean()) + _positive_part(-g, pts, volume)
    if len(positive) == 1:
        p = positive[0]
        scale = 1.0
        for j in range(4):
            if j != p:
                scale *= g[p] / (g[p] - g[j])
        return volume * scale * g[p] / 4.0
    p1, p2 = positive
    n1, n2 = [i for i in range(4) if i not in positive]
    a = (pts[p1], _edge_point(pts, g, p1, n1), _edge_point(pts, g, p1, n2))
    b = (pts[p2], _edge_point(pts, g, p2, n1), _edge_point(pts, g, p2, n2))
    total = 0.0
    for tet, apex_values in (
        ((a[0], a[1], a[2], b[2]), g[p1]),
        ((a[0], a[1], b[1], b[2]), g[p1]),
        ((a[0], b[0], b[1], b[2]), g[p1] + g[p2]),
    ):
        total += _tet_volume(*tet) * apex_values / 4.0
    return total


def constraint_violation_L1(m, mesh):
    """Exact L1 norm of the P1 interpolant of |m|^2 - 1."""
    m = assembly.as_field(m, mesh)
    g_nodal = np.einsum("za,za->z", m, m) - 1.0
    g = g_nodal[mesh.cells]
    volumes = mesh.volumes()
    means = g.mean(axis=1)
    same_sign = (g >= 0.0).all(axis=1) | (g <= 0.0).all(axis=1)
    total = float(np.sum(volumes[same_sign] * np.abs(means[same_sign])))
    for c in np.flatnonzero(~same_sign):
        pts = mesh.vertices[mesh.cells[c]]
        # |g| = 2 g_+ - g
        total += 2.0 * _positive_part(g[c], pts, volumes[c]) - volumes[c] * means[c]
    return total


def sample_record(state, forms, params, v=None, stability_ok=True):
    energies = physics.energy_components(state.m, forms, params, state.t)
    avg = avg_magnetization(state.m, forms)
    v_l2 = 0.0
    if v is not None:
        flat = np.asarray(v, dtype=float).ravel()
        v_l2 = math.sqrt(max(0.0, float(flat @ (forms.vector_mass @ flat))))
    return {
        "t": state.t,
        "E_total": energies["total"],
        "E_exchange": energies["exchange"],
        "E_dmi": energies["dmi"],
        "E_anisotropy": energies["anisotropy"],
        "E_zeeman": energies["zeeman"],
        "mx": float(avg[0]),
        "my": float(avg[1]),
        "mz": float(avg[2]),
        "v_l2": v_l2,
        "constraint_l1": constraint_violation_L1(state.m, forms.mesh),
        "stability_ok": bool(stability_ok),
    }


def _core_energy(m, forms, params):
    energies = physics.energy_components(m, forms, params)
    return energies["exchange"] + energies["dmi"]


def step_record(before, after, v, forms, params):
    """Energy-law ledger entry for one step; lower-order terms enter through their work k<h, v>."""
    k = after.info.get("k", after.t - before.t)
    flat = np.asarray(v, dtype=float).ravel()
    work = 0.0
    if params.has_lower_order:
        h_low = physics.lower_order_field(before.m, before.t, params).ravel()
        work = k * float(flat @ (forms.vector_mass @ h_low))
    grad_after = gradient_norm(after.m, forms)
    grad_linear = gradient_norm(before.m + k * np.asarray(v).reshape(-1, 3), forms)
    return {
        "step": after.step,
        "t": after.t,
        "k": k,
        "theta": after.info.get("theta"),
        "rho": after.info.get("rho"),
        "weighted_vv": after.info.get("weighted_vv"),
        "E_before": _core_energy(before.m, forms, params),
        "E_after": _core_energy(after.m, forms, params),
        "v_sq": float(flat @ (forms.vector_mass @ flat)),
        "grad_v_sq": float(flat @ (forms.vector_stiffness @ flat)),
        "dmi_vv": float(flat @ (forms.dmi_blocks @ flat)),
        "work": work,
        "grad_after": grad_after,
        "grad_linear": grad_linear,
    }


def _require(step, keys):
    missing = [key for key in keys if step.get(key) is None]
    if missing:
        raise DiagnosticUnavailable("energy-law quantities were not recorded", f"missing {', '.join(missing)}")


def energy_law_residual(series, scheme, params, k=None):
    """Per-step energy-law residual.

    Projection-free: the identity residual, zero up to solver tolerance.
    TPS1/TPS2: the left-hand-side surplus, nonpositive without DMI.
    """
    if not series.steps:
        raise DiagnosticUnavailable("no steps recorded")
    residuals = []
    for step in series.steps:
        _require(step, _STEP_KEYS)
        dt = step["k"] if step["k"] is not None else k
        delta = step["E_after"] - step["E_before"] - step["work"]
        if scheme.kind == "tps2":
            _require(step, ("weighted_vv", "rho"))
            value = delta + dt * step["weighted_vv"] + 0.5 * params.lex**2 * step["rho"] * dt**2 * step["grad_v_sq"]
        else:
            _require(step, ("theta",))
            value = (
                delta
                + params.alpha * dt * step["v_sq"]
                + params.lex**2 * (step["theta"] - 0.5) * dt**2 * step["grad_v_sq"]
            )
            if scheme.kind == "pftps1":
                value -= 0.5 * params.ldm * dt**2 * step["dmi_vv"]
        residuals.append(value)
    return np.array(residuals)


def energy_law_constant(series, residuals, h):
    """Smallest c with residual <= c h^-1 k^2 ||v||^2 on every step."""
    ratios = []
    for step, value in zip(series.steps, residuals):
        scale = step["k"] ** 2 * step["v_sq"] / h
        if scale > 0.0:
            ratios.append(value / scale)
    return max(ratios) if ratios else 0.0


def stability_holds(step, rel_tol=1e-12):
    return step["grad_after"] <= step["grad_linear"] * (1.0 + rel_tol) + rel_tol


def loglog_slope(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2 or np.any(xs <= 0) or np.any(ys <= 0):
        raise DiagnosticUnavailable("log-log fit needs at least two positive samples")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
