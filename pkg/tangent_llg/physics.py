"""Material parameters, rescaling, energies and the TPS2 auxiliary functions."""

import math

import numpy as np
from scipy.optimize import brentq

from tangent_llg import assembly
from tangent_llg import constants
from tangent_llg.errors import InvalidArgument


def _unit(vector, name):
    vector = np.asarray(vector, dtype=float).ravel()
    if vector.size != 3:
        raise InvalidArgument(f"{name} must have three components")
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise InvalidArgument(f"{name} must be nonzero")
    return vector / norm


class PulseSchedule:
    """Trapezoidal field pulse: linear ramp up, hold, linear ramp down, zero elsewhere."""

    def __init__(self, h_max, t_ramp_up, t_hold, t_ramp_down, direction=(1.0, 0.0, 0.0), t_start=0.0):
        for name, value in (("t_ramp_up", t_ramp_up), ("t_hold", t_hold), ("t_ramp_down", t_ramp_down)):
            if value < 0:
                raise InvalidArgument(f"pulse duration {name} must be nonnegative", f"got {value!r}")
        self.h_max = float(h_max)
        self.t_ramp_up = float(t_ramp_up)
        self.t_hold = float(t_hold)
        self.t_ramp_down = float(t_ramp_down)
        self.direction = _unit(direction, "pulse direction")
        self.t_start = float(t_start)

    @property
    def duration(self):
        return self.t_ramp_up + self.t_hold + self.t_ramp_down

    def amplitude(self, t):
        s = t - self.t_start
        if s < 0.0 or s > self.duration:
            return 0.0
        if s < self.t_ramp_up:
            return self.h_max * s / self.t_ramp_up
        s -= self.t_ramp_up
        if s <= self.t_hold:
            return self.h_max
        s -= self.t_hold
        if self.t_ramp_down == 0.0:
            return 0.0
        return self.h_max * max(0.0, 1.0 - s / self.t_ramp_down)

    def __call__(self, t):
        return self.amplitude(t) * self.direction


class MaterialParams:
    """Nondimensional material data; lengths are in the mesh unit (nm)."""

    def __init__(
        self,
        lex,
        ldm=0.0,
        alpha=1.0,
        dmi_form="bulk",
        chirality=1,
        anisotropy_q=0.0,
        anisotropy_axis=(0.0, 0.0, 1.0),
        zeeman_field=(0.0, 0.0, 0.0),
        pulse=None,
    ):
        if not lex > 0:
            raise InvalidArgument("lex must be positive", f"got {lex!r}")
        if ldm < 0:
            raise InvalidArgument("ldm must be nonnegative; use chirality for the sign", f"got {ldm!r}")
        if not 0 < alpha <= 1:
            raise InvalidArgument("alpha must lie in (0, 1]", f"got {alpha!r}")
        assembly.dmi_tensor(dmi_form)
        if chirality not in (1, -1):
            raise InvalidArgument("chirality must be +1 or -1", f"got {chirality!r}")
        self.lex = float(lex)
        self.ldm = float(ldm)
        self.alpha = float(alpha)
        self.dmi_form = dmi_form
        self.chirality = int(chirality)
        self.anisotropy_q = float(anisotropy_q)
        self.anisotropy_axis = _unit(anisotropy_axis, "anisotropy axis")
        self.zeeman_field = np.asarray(zeeman_field, dtype=float).ravel()
        if self.zeeman_field.size != 3:
            raise InvalidArgument("zeeman_field must have three components")
        self.pulse = pulse

    @property
    def has_lower_order(self):
        return self.anisotropy_q != 0.0 or bool(np.any(self.zeeman_field)) or self.pulse is not None

    def applied_field(self, t):
        field = self.zeeman_field.copy()
        if self.pulse is not None:
            field = field + self.pulse(t)
        return field


def rescale(A, D, Ms, gamma0=constants.GAMMA0, time_step_s=None):
    """SI material constants to (lex [nm], ldm [nm], dimensionless k)."""
    for name, value in (("A", A), ("Ms", Ms), ("gamma0", gamma0)):
        if not value > 0:
            raise InvalidArgument(f"{name} must be positive", f"got {value!r}")
    if D < 0:
        raise InvalidArgument("D must be nonnegative", f"got {D!r}")
    lex = math.sqrt(2.0 * A / (constants.MU0 * Ms**2)) * 1e9
    ldm = 2.0 * D / (constants.MU0 * Ms**2) * 1e9
    k = None
    if time_step_s is not None:
        if not time_step_s > 0:
            raise InvalidArgument("time step must be positive", f"got {time_step_s!r}")
        k = time_from_seconds(time_step_s, Ms, gamma0)
    return lex, ldm, k


def time_from_seconds(t_s, Ms, gamma0=constants.GAMMA0):
    return gamma0 * Ms * t_s


def anisotropy_strength(K, Ms):
    return 2.0 * K / (constants.MU0 * Ms**2)


def field_from_tesla(b_tesla, Ms):
    return b_tesla / (constants.MU0 * Ms)


def energy_components(m, forms, params, t=0.0):
    mesh = forms.mesh
    flat = assembly.as_field(m, mesh).ravel()
    exchange = 0.5 * params.lex**2 * float(flat @ (forms.vector_stiffness @ flat))
    dmi = 0.0
    if params.ldm:
        dmi = 0.5 * params.ldm * float(flat @ (forms.dmi_blocks @ flat))
    anisotropy = 0.0
    if params.anisotropy_q:
        proj = assembly.as_field(m, mesh) @ params.anisotropy_axis
        anisotropy = 0.5 * params.anisotropy_q * (forms.volume - float(proj @ (forms.scalar_mass @ proj)))
    zeeman = 0.0
    field = params.applied_field(t)
    if np.any(field):
        integral = forms.lumped @ assembly.as_field(m, mesh)
        zeeman = -float(field @ integral)
    return {
        "exchange": exchange,
        "dmi": dmi,
        "anisotropy": anisotropy,
        "zeeman": zeeman,
        "total": exchange + dmi + anisotropy + zeeman,
    }


def energy(m, forms, params, t=0.0):
    return energy_components(m, forms, params, t)["total"]


def lambda_at_quadrature(m, mesh, params, points=None):
    """-lex^2 |grad m|^2 - ldm (D m).m at each quadrature point, shape (nc, nq)."""
    if points is None:
        points = assembly.QUAD_POINTS
    grads = assembly.cell_gradients(m, mesh)
    grad_sq = np.einsum("cbd,cbd->c", grads, grads)
    values = np.repeat(-params.lex**2 * grad_sq[:, None], len(points), axis=1)
    if params.ldm and params.dmi_form != "none":
        dm = params.chirality * assembly.apply_dmi_operator(grads, params.dmi_form)
        at_points = assembly.values_at_points(m, mesh, points)
        values = values - params.ldm * np.einsum("ca,cqa->cq", dm, at_points)
    return values


def cutoff_W(s, M, k, alpha):
    s = np.asarray(s, dtype=float)
    positive = alpha + k * np.minimum(np.maximum(s, 0.0), M) / 2.0
    negative = 2.0 * alpha**2 / (2.0 * alpha + k * np.minimum(np.maximum(-s, 0.0), M))
    result = np.where(s >= 0.0, positive, negative)
    if result.ndim == 0:
        return float(result)
    return result


def _check_k(k):
    if not 0 < k < 1:
        raise InvalidArgument("k must lie in (0, 1) for M(k) and rho(k)", f"got {k!r}")


def M_of_k(k):
    _check_k(k)
    return 1.0 / abs(k * math.log(k))


def rho_of_k(k):
    _check_k(k)
    return abs(k * math.log(k))


def tps2_ellipticity(k, params, M=None):
    """Lower bound of the TPS2 bilinear form's coercivity constant; must stay positive."""
    if M is None:
        M = M_of_k(k)
    return 2.0 * params.alpha**2 / (2.0 * params.alpha + M * k) - params.ldm**2 / (4.0 * params.lex**2) * k


def tps2_threshold(params):
    """Largest step size below which the TPS2 ellipticity coefficient is positive."""
    if params.ldm == 0.0:
        return 1.0
    lo, hi = 1e-12, 1.0 - 1e-12
    if tps2_ellipticity(hi, params) > 0.0:
        return 1.0
    return brentq(lambda k: tps2_ellipticity(k, params), lo, hi, xtol=1e-14)


def lower_order_field(m, t, params):
    """Explicit nodal field q (a.m) a + h_ext(t)."""
    m = np.asarray(m, dtype=float).reshape(-1, 3)
    field = np.zeros_like(m)
    if params.anisotropy_q:
        axis = params.anisotropy_axis
        field += params.anisotropy_q * np.outer(m @ axis, axis)
    applied = params.applied_field(t)
    if np.any(applied):
        field += applied[None, :]
    return field
