"""TPS1, PF-TPS1 and TPS2 time steps and their parameter checks."""

import numpy as np

from tangent_llg import assembly
from tangent_llg import constants
from tangent_llg import linalg
from tangent_llg import mesh as mesh_mod
from tangent_llg import physics
from tangent_llg import tangent
from tangent_llg.errors import InvalidArgument
from tangent_llg.errors import SolverError
from tangent_llg.errors import WellPosednessError

TPS1 = "tps1"
PF_TPS1 = "pftps1"
TPS2 = "tps2"
SCHEMES = (TPS1, PF_TPS1, TPS2)


class SchemeChoice:
    def __init__(self, kind, theta=1.0, stabilization_on=True):
        if kind not in SCHEMES:
            raise InvalidArgument(f"unknown scheme {kind!r}", f"expected one of {', '.join(SCHEMES)}")
        if not 0.0 <= theta <= 1.0:
            raise InvalidArgument("theta must lie in [0, 1]", f"got {theta!r}")
        self.kind = kind
        self.theta = float(theta)
        self.stabilization_on = bool(stabilization_on)

    @property
    def projects(self):
        return self.kind != PF_TPS1

    def __repr__(self):
        return f"SchemeChoice({self.kind!r}, theta={self.theta}, stabilization_on={self.stabilization_on})"


class IntegratorState:
    """Step index, time and nodal magnetization (nv, 3).

    norm_budget is tracked for the projection-free scheme only: the nodal
    |m0|^2 plus the accumulated k^2 |v|^2.
    """

    def __init__(self, step, t, m, norm_budget=None, info=None):
        self.step = int(step)
        self.t = float(t)
        self.m = np.asarray(m, dtype=float).reshape(-1, 3)
        self.norm_budget = norm_budget
        self.info = info or {}


def initial_state(m0, scheme):
    """Project the initial field onto unit nodal values unless the scheme is projection-free."""
    m0 = np.asarray(m0, dtype=float).reshape(-1, 3)
    if scheme.projects:
        return IntegratorState(0, 0.0, tangent.nodal_projection(m0))
    return IntegratorState(0, 0.0, m0.copy(), norm_budget=np.einsum("za,za->z", m0, m0))


def right_hand_side(m, forms, params, t):
    flat = np.asarray(m, dtype=float).ravel()
    b = -params.lex**2 * (forms.vector_stiffness @ flat)
    if params.ldm:
        b -= 0.5 * params.ldm * (forms.dmi_symmetric @ flat)
    if params.has_lower_order:
        b += forms.vector_mass @ physics.lower_order_field(m, t, params).ravel()
    return b


def tps1_system(m, forms, params, k, theta, t=0.0):
    cross = assembly.assemble_cross(forms.mesh, m)
    A = params.alpha * forms.vector_mass + cross + (params.lex**2 * theta * k) * forms.vector_stiffness
    return A.tocsr(), right_hand_side(m, forms, params, t)


def solve_tangent(A, b, m, solver_tol=constants.DEFAULT_SOLVER_TOL, maxit=None):
    """Solve the Galerkin system restricted to the tangent space at m."""
    frame = tangent.build_frame(m)
    A_red, b_red = tangent.reduce(A, b, frame)
    c, report = linalg.solve(A_red, b_red, solver_tol, maxit)
    if not report.converged:
        krylov = report
        c, report = linalg.solve_direct(A_red, b_red, solver_tol)
        if not report.converged:
            raise SolverError(
                "tangent system did not converge",
                report=report,
                detail=f"gmres residual {krylov.relative_residual:.3e}, direct residual {report.relative_residual:.3e}",
            )
    return tangent.expand(c, frame), report


def _advance(state, v, k, project, info, budget=None):
    w = state.m + k * v
    if project:
        m_new = tangent.nodal_projection(w)
    else:
        m_new = w
        budget = budget + k**2 * np.einsum("za,za->z", v, v)
    return IntegratorState(state.step + 1, state.t + k, m_new, norm_budget=budget, info=info)


def tps1_step(state, forms, params, k, theta=1.0, solver_tol=constants.DEFAULT_SOLVER_TOL, maxit=None):
    A, b = tps1_system(state.m, forms, params, k, theta, state.t)
    v, report = solve_tangent(A, b, state.m, solver_tol, maxit)
    info = {"report": report, "k": k, "theta": theta}
    return v, _advance(state, v, k, True, info)


def pftps1_step(state, forms, params, k, theta=1.0, solver_tol=constants.DEFAULT_SOLVER_TOL, maxit=None):
    budget = state.norm_budget
    if budget is None:
        budget = np.einsum("za,za->z", state.m, state.m)
    A, b = tps1_system(state.m, forms, params, k, theta, state.t)
    v, report = solve_tangent(A, b, state.m, solver_tol, maxit)
    info = {"report": report, "k": k, "theta": theta}
    return v, _advance(state, v, k, False, info, budget)


def check_tps2_step(k, params, M=None):
    if not 0.0 < k < 1.0:
        raise WellPosednessError("TPS2 needs 0 < k < 1", threshold=physics.tps2_threshold(params), detail=f"k={k!r}")
    if M is None:
        M = physics.M_of_k(k)
    coefficient = physics.tps2_ellipticity(k, params, M)
    if coefficient <= 0.0:
        threshold = physics.tps2_threshold(params)
        raise WellPosednessError(
            f"TPS2 step size k={k:.6g} exceeds the well-posedness threshold k0={threshold:.6g}",
            threshold=threshold,
            detail=f"ellipticity coefficient {coefficient:.3e}",
        )
    return coefficient


def tps2_system(m, forms, params, k, M, rho, t=0.0):
    lam = physics.lambda_at_quadrature(m, forms.mesh, params)
    weight = physics.cutoff_W(lam, M, k, params.alpha)
    weighted = assembly.assemble_weighted_mass(forms.mesh, weight)
    cross = assembly.assemble_cross(forms.mesh, m)
    A = weighted + cross + (0.5 * params.lex**2 * k * (1.0 + rho)) * forms.vector_stiffness
    if params.ldm:
        A = A + (0.25 * params.ldm * k) * forms.dmi_symmetric
    return A.tocsr(), right_hand_side(m, forms, params, t), weighted


def tps2_step(
    state,
    forms,
    params,
    k,
    stabilization_on=True,
    M=None,
    rho=None,
    solver_tol=constants.DEFAULT_SOLVER_TOL,
    maxit=None,
):
    """M and rho default to M(k) and rho(k); the driver pins them to the nominal step size."""
    if M is None:
        M = physics.M_of_k(k)
    if rho is None:
        rho = physics.rho_of_k(k) if stabilization_on else 0.0
    check_tps2_step(k, params, M)
    A, b, weighted = tps2_system(state.m, forms, params, k, M, rho, state.t)
    v, report = solve_tangent(A, b, state.m, solver_tol, maxit)
    flat = v.ravel()
    info = {
        "report": report,
        "k": k,
        "rho": rho,
        "weighted_vv": float(flat @ (weighted @ flat)),
    }
    return v, _advance(state, v, k, True, info)


def advance(state, scheme, forms, params, k, M=None, rho=None, solver_tol=constants.DEFAULT_SOLVER_TOL):
    if scheme.kind == TPS1:
        return tps1_step(state, forms, params, k, scheme.theta, solver_tol)
    if scheme.kind == PF_TPS1:
        return pftps1_step(state, forms, params, k, scheme.theta, solver_tol)
    return tps2_step(state, forms, params, k, scheme.stabilization_on, M, rho, solver_tol)


def validate_config(cfg, mesh):
    """Errors and warnings for a scheme/mesh/step-size combination.

    Each issue is a dict with "level" (error, warning or info) and "message".
    """
    scheme = cfg.scheme
    params = cfg.material
    k = cfg.k
    issues = []
    quality = mesh_mod.analyze_mesh(mesh)
    if scheme.kind == TPS2:
        threshold = physics.tps2_threshold(params)
        if not 0.0 < k < 1.0 or physics.tps2_ellipticity(k, params) <= 0.0:
            issues.append({
                "level": "error",
                "message": f"TPS2 step size k={k:.6g} exceeds the well-posedness threshold k0={threshold:.6g}",
                "threshold": threshold,
            })
    if scheme.kind == TPS1:
        if scheme.theta < 0.5:
            issues.append({"level": "warning", "message": "theta below 1/2 needs k/h^2 -> 0 for convergence"})
        elif scheme.theta == 0.5:
            issues.append({"level": "warning", "message": "instability observed for theta=1/2 at small h"})
    if scheme.kind == PF_TPS1 and scheme.theta <= 0.5:
        issues.append({"level": "warning", "message": "projection-free scheme needs theta > 1/2 for convergence"})
    if scheme.projects and not quality.angle_condition_holds:
        issues.append({
            "level": "warning",
            "message": (
                f"mesh violates the angle condition ({quality.offending_pairs} pairs); "
                "nodal projection may increase the exchange energy"
            ),
        })
    ratio = k / quality.h_max
    level = "warning" if ratio > constants.K_OVER_H_WARN else "info"
    issues.append({"level": level, "message": f"k/h ratio {ratio:.4g} (k={k:.6g}, h_max={quality.h_max:.6g})"})
    return issues


def raise_for_errors(issues):
    for issue in issues:
        if issue["level"] == "error":
            raise WellPosednessError(issue["message"], threshold=issue.get("threshold"))
