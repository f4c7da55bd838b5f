"""Steady states: single-species profiles, coexistence pairs, diagnostics.

The single-species resident profile solves  L u + r·r1·u·(1 - u/K1) = 0
with the no-flux transport operator L; the coexistence system couples two
of these through the shared quadratic term.  Both are solved by damped
Newton iteration; the single-species path can also march in time first
("hybrid", the default) or exclusively ("long-time"), which doubles as an
independent cross-check of the Newton result.

The diagnostic helpers evaluate quantities that are exact for the
continuous steady states and must therefore shrink at second order on
refined grids: the growth-weighted capacity gap and its quadratic twin,
log-slope bands, per-capita transport balance, and a pair of weighted
integral-vs-boundary identities for coexistence pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .errors import ConfigError, SolverError
from .grid import Field, Grid
from .linsolve import factorize
from .model import EffectiveParams, ModelParams
from .operators import TransportOperator, face_fluxes

__all__ = [
    "SteadyState",
    "CoexistencePair",
    "CapacityGapReport",
    "LogSlopeReport",
    "BalanceResidual",
    "IdentityReport",
    "FluxDiagnostics",
    "solve_single_steady",
    "solve_coexistence",
    "constant_capacity_companion",
    "capacity_gap_integral",
    "log_slope",
    "log_slope_report",
    "per_capita_balance_residual",
    "coexistence_identity_residuals",
    "flux_diagnostics",
    "positivity_floor",
]

_ARMIJO_SLOPE = 1e-4
_MIN_DAMPING = 2.0**-10


@dataclass
class SteadyState:
    grid: Grid
    u: np.ndarray
    residual: float
    method: str  # "long-time" | "newton" | "hybrid"
    iterations: int


@dataclass
class CoexistencePair:
    grid: Grid
    u: np.ndarray
    v: np.ndarray
    residual: float
    iterations: int
    jacobian_near_singular: bool


def positivity_floor(eff: EffectiveParams) -> float:
    """Strict-positivity threshold used to reject washed-out profiles."""
    return 1e-8 * float(np.max(eff.K1.values))


# ---------------------------------------------------------------------
# single species
# ---------------------------------------------------------------------


def _single_residual(op: TransportOperator, eff: EffectiveParams, u: np.ndarray) -> np.ndarray:
    return op.matrix @ u + eff.rr1.values * u * (1.0 - u / eff.K1.values)


def _march(
    op: TransportOperator,
    eff: EffectiveParams,
    u0: np.ndarray,
    rate_tol: float,
    max_steps: int = 500_000,
) -> tuple[np.ndarray, int]:
    """Semi-implicit march of the single-species system to quiescence.

    Stops when the discrete time derivative drops below ``rate_tol`` in
    sup-norm, measured against the reaction scale max(rr1*K1) so the test
    stays meaningful when heavy harvesting shrinks the whole profile.
    Returns the state and number of steps taken.
    """
    rate_tol *= float(np.max(eff.rr1.values * eff.K1.values))
    # The semi-implicit fixed point is the steady state for any dt, so the
    # march can take the full reaction-stability step rather than the small
    # trajectory-accuracy step; convergence then needs O(10) steps per
    # relaxation time regardless of how hard the harvest squeezes r*r1.
    dt = 0.9 / float(np.max(eff.rr1.values))
    eye = sparse.identity(op.grid.size, format="csr")
    solve = factorize(eye - dt * op.matrix)
    u = u0.copy()
    for k in range(1, max_steps + 1):
        u_next = solve.solve(u + dt * eff.rr1.values * u * (1.0 - u / eff.K1.values))
        np.maximum(u_next, 0.0, out=u_next)
        rate = float(np.max(np.abs(u_next - u))) / dt
        u = u_next
        if rate < rate_tol:
            return u, k
    raise SolverError(
        f"single-species march did not settle within {max_steps} steps "
        f"(rate {rate:.3e} vs target {rate_tol:.3e})"
    )


def _newton_single(
    op: TransportOperator,
    eff: EffectiveParams,
    u0: np.ndarray,
    tol: float,
    max_iter: int = 60,
) -> tuple[np.ndarray, int]:
    u = u0.copy()
    rr1 = eff.rr1.values
    K1 = eff.K1.values
    res = _single_residual(op, eff, u)
    res_norm = float(np.max(np.abs(res)))
    for it in range(1, max_iter + 1):
        if res_norm < tol:
            return u, it - 1
        jac = op.matrix + sparse.diags(rr1 * (1.0 - 2.0 * u / K1))
        try:
            delta = factorize(jac).solve(-res)
        except SolverError as exc:
            raise SolverError(f"steady-state Newton system is singular: {exc}") from None
        s = 1.0
        while s >= _MIN_DAMPING:
            trial = u + s * delta
            trial_res = _single_residual(op, eff, trial)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm <= (1.0 - _ARMIJO_SLOPE * s) * res_norm:
                u, res, res_norm = trial, trial_res, trial_norm
                break
            s *= 0.5
        else:
            raise SolverError(
                f"steady-state Newton stalled at residual {res_norm:.3e} "
                f"(target {tol:.3e})"
            )
    raise SolverError(f"steady-state Newton hit the iteration cap at residual {res_norm:.3e}")


def solve_single_steady(
    op: TransportOperator,
    eff: EffectiveParams,
    tol: float = 1e-10,
    method: str = "hybrid",
    u0: np.ndarray | None = None,
) -> SteadyState:
    """Positive steady profile of a lone species under operator ``op``.

    Methods: "hybrid" marches until the time derivative is below sqrt(tol)
    and polishes with Newton; "newton" starts Newton from the mean folded
    capacity (or ``u0``); "long-time" marches alone, four decades past
    sqrt(tol), and skips Newton entirely so it can serve as an independent
    oracle for the Newton path.
    """
    if method not in ("hybrid", "newton", "long-time"):
        raise ConfigError(f"unknown steady method {method!r}")
    K1 = eff.K1.values
    start = u0.copy() if u0 is not None else None
    iterations = 0

    if method == "newton":
        if start is None:
            start = np.full(op.grid.size, float(np.mean(K1)))
        u, iterations = _newton_single(op, eff, start, tol)
    else:
        if start is None:
            start = np.full(op.grid.size, 0.5 * float(np.min(K1)))
        rate_tol = math.sqrt(tol) if method == "hybrid" else 1e-4 * math.sqrt(tol)
        u, steps = _march(op, eff, start, rate_tol)
        iterations = steps
        if method == "hybrid":
            try:
                u, newton_its = _newton_single(op, eff, u, tol)
                iterations += newton_its
            except SolverError:
                # Fall back to marching the rest of the way.
                u, steps = _march(op, eff, u, 1e-3 * math.sqrt(tol))
                iterations += steps
                method = "long-time"

    if float(np.min(u)) <= positivity_floor(eff):
        raise SolverError(
            "no strictly positive steady profile: the population washes out "
            "at these movement/harvest parameters"
        )
    residual = float(np.max(np.abs(_single_residual(op, eff, u))))
    return SteadyState(grid=op.grid, u=u, residual=residual, method=method, iterations=iterations)


# ---------------------------------------------------------------------
# coexistence
# ---------------------------------------------------------------------


def _pair_residual(
    op1: TransportOperator,
    op2: TransportOperator,
    eff: EffectiveParams,
    u: np.ndarray,
    v: np.ndarray,
) -> np.ndarray:
    shared = 1.0 - (u + v) / eff.K1.values
    return np.concatenate(
        [op1.matrix @ u + eff.rr1.values * u * shared, op2.matrix @ v + eff.rr1.values * v * shared]
    )


def _pair_jacobian(
    op1: TransportOperator,
    op2: TransportOperator,
    eff: EffectiveParams,
    u: np.ndarray,
    v: np.ndarray,
) -> sparse.csc_matrix:
    rr1 = eff.rr1.values
    K1 = eff.K1.values
    j11 = op1.matrix + sparse.diags(rr1 * (1.0 - (2.0 * u + v) / K1))
    j22 = op2.matrix + sparse.diags(rr1 * (1.0 - (u + 2.0 * v) / K1))
    j12 = sparse.diags(-rr1 * u / K1)
    j21 = sparse.diags(-rr1 * v / K1)
    return sparse.bmat([[j11, j12], [j21, j22]], format="csc")


def _near_singular(jac: sparse.csc_matrix) -> bool:
    try:
        lu = spla.splu(jac)
    except RuntimeError:
        return True
    n = jac.shape[0]
    inv_op = spla.LinearOperator((n, n), matvec=lu.solve, rmatvec=lambda b: lu.solve(b, trans="T"))
    try:
        cond = spla.onenormest(jac) * spla.onenormest(inv_op)
    except Exception:
        return True
    return bool(cond > 1e10)


def solve_coexistence(
    op1: TransportOperator,
    op2: TransportOperator,
    eff: EffectiveParams,
    guess: tuple[np.ndarray, np.ndarray] | None = None,
    tol: float = 1e-10,
    max_iter: int = 80,
) -> CoexistencePair | None:
    """Damped Newton search for a strictly positive coexistence pair.

    Starts from (K1/3, K1/3) unless a warm start is given.  Returns None
    when the iteration lands on a state with a washed-out component (a
    single-species or empty profile), which is the honest answer "no
    coexistence state found from this start" rather than a failure.
    """
    K1 = eff.K1.values
    if guess is None:
        u = K1 / 3.0
        v = K1 / 3.0
    else:
        u = np.asarray(guess[0], dtype=float).copy()
        v = np.asarray(guess[1], dtype=float).copy()
    n = op1.grid.size

    res = _pair_residual(op1, op2, eff, u, v)
    res_norm = float(np.max(np.abs(res)))
    for it in range(1, max_iter + 1):
        if res_norm < tol:
            break
        jac = _pair_jacobian(op1, op2, eff, u, v)
        try:
            lu = spla.splu(jac)
        except RuntimeError:
            raise SolverError(
                "coexistence Jacobian is singular; a marginal/bifurcation "
                "point is suspected at these parameters"
            ) from None
        delta = lu.solve(-res)
        s = 1.0
        while s >= _MIN_DAMPING:
            trial_u = u + s * delta[:n]
            trial_v = v + s * delta[n:]
            trial_res = _pair_residual(op1, op2, eff, trial_u, trial_v)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm <= (1.0 - _ARMIJO_SLOPE * s) * res_norm:
                u, v, res, res_norm = trial_u, trial_v, trial_res, trial_norm
                break
            s *= 0.5
        else:
            raise SolverError(
                f"coexistence Newton stalled at residual {res_norm:.3e} (target {tol:.3e})"
            )
    else:
        raise SolverError(
            f"coexistence Newton hit the iteration cap at residual {res_norm:.3e}"
        )

    floor = positivity_floor(eff)
    if float(np.min(u)) <= floor or float(np.min(v)) <= floor:
        return None
    return CoexistencePair(
        grid=op1.grid,
        u=u,
        v=v,
        residual=res_norm,
        iterations=it,
        jacobian_near_singular=_near_singular(_pair_jacobian(op1, op2, eff, u, v)),
    )


def constant_capacity_companion(
    op: TransportOperator, eff: EffectiveParams, tol: float = 1e-10
) -> tuple[SteadyState, EffectiveParams]:
    """Steady profile of the same species over a flattened capacity.

    Replaces the folded capacity with its spatial mean and re-solves the
    single-species problem.  The log-slope band 0 < u_x/u < alpha/d is a
    constant-capacity statement (heterogeneous capacity can tilt the
    profile against the drift), so band checks run on this companion.
    """
    grid = eff.grid
    k1_const = float(np.mean(eff.K1.values))
    flat = Field(grid, np.full(grid.size, k1_const))
    flat_raw = Field(grid, np.full(grid.size, k1_const / eff.r1))
    eff_const = replace(eff, K=flat_raw, K1=flat)
    return solve_single_steady(op, eff_const, tol=tol), eff_const


# ---------------------------------------------------------------------
# steady-state diagnostics
# ---------------------------------------------------------------------


@dataclass
class CapacityGapReport:
    """Growth-weighted gap between capacity and a steady profile.

    ``linear`` is the integral of r·(K1 - u); ``quadratic`` integrates
    r·(K1 - u)²/K1.  For an exact single-species steady state the two
    are equal, and both are strictly positive whenever K1 varies in
    space (``degenerate`` marks the constant-capacity case where both
    vanish).
    """

    linear: float
    quadratic: float
    degenerate: bool


def capacity_gap_integral(u: np.ndarray, eff: EffectiveParams) -> CapacityGapReport:
    grid = eff.grid
    r = eff.r.values
    K1 = eff.K1.values
    gap = K1 - u
    linear = grid.cell_volume * float(np.sum(r * gap))
    quadratic = grid.cell_volume * float(np.sum(r * gap * gap / K1))
    degenerate = float(np.ptp(K1)) <= 1e-12 * float(np.max(np.abs(K1)))
    return CapacityGapReport(linear=linear, quadratic=quadratic, degenerate=degenerate)


def log_slope(u: np.ndarray, grid: Grid) -> np.ndarray:
    """u_x / u at cell centers (second order, one-sided at the ends)."""
    if grid.dim != 1:
        raise ConfigError("log slopes are a 1-D diagnostic")
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0):
        raise SolverError("log slope needs a strictly positive profile")
    return np.gradient(u, grid.h, edge_order=2) / u


@dataclass
class LogSlopeReport:
    slope: np.ndarray  # interior cells only
    lower: float
    upper: float
    band: float  # tolerance added on both sides (10 h^2)
    violations: int


def log_slope_report(u: np.ndarray, d: float, alpha: float, grid: Grid) -> LogSlopeReport:
    """Check u_x/u against the drift band [0, alpha/d] on interior cells.

    For a steady profile the log slope is pinned between 0 and alpha/d
    (both bounds collapse to zero when alpha = 0, and flip when alpha is
    negative).  Interior central differences only; the band widens by
    10 h^2 to absorb discretization error.
    """
    if grid.dim != 1:
        raise ConfigError("log-slope bands are a 1-D diagnostic")
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0):
        raise SolverError("log-slope band needs a strictly positive profile")
    h = grid.h
    interior = (u[2:] - u[:-2]) / (2.0 * h) / u[1:-1]
    ratio = alpha / d
    lower = min(0.0, ratio)
    upper = max(0.0, ratio)
    band = 10.0 * h * h
    violations = int(np.sum(interior < lower - band) + np.sum(interior > upper + band))
    return LogSlopeReport(slope=interior, lower=lower, upper=upper, band=band, violations=violations)


@dataclass
class BalanceResidual:
    residual: np.ndarray  # interior cells
    max_abs: float


def per_capita_balance_residual(
    u: np.ndarray, v: np.ndarray, params: ModelParams, grid: Grid
) -> BalanceResidual:
    """Pointwise mismatch of the two per-capita transport balances.

    At a coexistence state both species see the same growth factor, so
    -d·(T' + T²) + alpha·T computed from either log slope (T = u_x/u,
    S = v_x/v) must agree pointwise.  The residual is reported on
    interior cells and shrinks at second order under refinement.
    """
    t = log_slope(u, grid)
    s = log_slope(v, grid)
    h = grid.h
    lhs = -params.d1 * (np.gradient(t, h, edge_order=2) + t * t) + params.alpha1 * t
    rhs = -params.d2 * (np.gradient(s, h, edge_order=2) + s * s) + params.alpha2 * s
    residual = (lhs - rhs)[1:-1]
    return BalanceResidual(residual=residual, max_abs=float(np.max(np.abs(residual))))


@dataclass
class IdentityReport:
    lhs_first: float
    rhs_first: float
    lhs_second: float
    rhs_second: float
    window: tuple[float, float]

    @property
    def residual_first(self) -> float:
        return abs(self.lhs_first - self.rhs_first)

    @property
    def residual_second(self) -> float:
        return abs(self.lhs_second - self.rhs_second)


def coexistence_identity_residuals(
    pair: CoexistencePair,
    op1: TransportOperator,
    op2: TransportOperator,
    params: ModelParams,
    window: tuple[float, float] | None = None,
) -> IdentityReport:
    """Weighted integral-vs-boundary identities for a coexistence pair.

    Each species' equation, multiplied by the other species' density and
    an exponential weight, integrates by parts into pure boundary flux
    terms.  Evaluated with midpoint quadrature over the cells of a face-
    aligned window and flux values at its faces; both residuals are
    second-order small for a converged pair.
    """
    grid = pair.grid
    if grid.dim != 1:
        raise ConfigError("the integral identities are a 1-D diagnostic")
    h = grid.h
    if window is None:
        i_lo, i_hi = 0, grid.n
    else:
        i_lo = int(round((window[0] - grid.a) / h))
        i_hi = int(round((window[1] - grid.a) / h))
        if not 0 <= i_lo < i_hi <= grid.n:
            raise ConfigError(f"identity window {window} does not fit the habitat")
    x_lo, x_hi = grid.a + i_lo * h, grid.a + i_hi * h

    u, v = pair.u, pair.v
    x = grid.centers
    cells = slice(i_lo, i_hi)
    du = np.gradient(u, h, edge_order=2)
    dv = np.gradient(v, h, edge_order=2)
    d1, d2, a1, a2 = params.d1, params.d2, params.alpha1, params.alpha2

    w1 = np.exp(-(a1 / d1) * x)
    w2 = np.exp(-(a2 / d2) * x)
    flux_u = d1 * du - a1 * u  # cell-centered version of the u flux
    flux_v = d2 * dv - a2 * v

    lhs_first = h / d1 * float(
        np.sum((((d1 - d2) * dv - (a1 - a2) * v) * flux_u * w1)[cells])
    )
    lhs_second = h / d2 * float(
        np.sum((((d1 - d2) * du - (a1 - a2) * u) * flux_v * w2)[cells])
    )

    # Face values: operator fluxes are second-order accurate at faces and
    # exactly zero at the domain boundary; densities average across faces.
    fa = face_fluxes(op1, u)
    fb = face_fluxes(op2, v)
    u_face = np.empty(grid.n + 1)
    v_face = np.empty(grid.n + 1)
    u_face[1:-1] = 0.5 * (u[:-1] + u[1:])
    v_face[1:-1] = 0.5 * (v[:-1] + v[1:])
    u_face[0], u_face[-1] = u[0], u[-1]  # irrelevant: boundary fluxes vanish
    v_face[0], v_face[-1] = v[0], v[-1]

    def boundary(term_face: np.ndarray, weight_rate: float, density: np.ndarray) -> float:
        lo = term_face[i_lo] * math.exp(-weight_rate * x_lo) * density[i_lo]
        hi = term_face[i_hi] * math.exp(-weight_rate * x_hi) * density[i_hi]
        return hi - lo

    rhs_first = boundary(fa, a1 / d1, v_face) - boundary(fb, a1 / d1, u_face)
    rhs_second = boundary(fb, a2 / d2, u_face) - boundary(fa, a2 / d2, v_face)

    return IdentityReport(
        lhs_first=lhs_first,
        rhs_first=rhs_first,
        lhs_second=lhs_second,
        rhs_second=rhs_second,
        window=(x_lo, x_hi),
    )


@dataclass
class FluxDiagnostics:
    flux_u: np.ndarray  # at the n+1 faces
    flux_v: np.ndarray
    runs_u: list[tuple[int, int]]  # run-length encoded sign pattern
    runs_v: list[tuple[int, int]]


def _sign_runs(values: np.ndarray, tol: float) -> list[tuple[int, int]]:
    signs = np.where(values > tol, 1, np.where(values < -tol, -1, 0))
    runs: list[tuple[int, int]] = []
    for s in signs:
        if runs and runs[-1][0] == int(s):
            runs[-1] = (int(s), runs[-1][1] + 1)
        else:
            runs.append((int(s), 1))
    return runs


def flux_diagnostics(
    u: np.ndarray, v: np.ndarray, op1: TransportOperator, op2: TransportOperator
) -> FluxDiagnostics:
    """Face fluxes of both species with their sign run-length patterns."""
    fu = face_fluxes(op1, u)
    fv = face_fluxes(op2, v)
    scale = max(float(np.max(np.abs(fu))), float(np.max(np.abs(fv))), 1e-300)
    tol = 1e-10 * scale
    return FluxDiagnostics(
        flux_u=fu,
        flux_v=fv,
        runs_u=_sign_runs(fu, tol),
        runs_v=_sign_runs(fv, tol),
    )
