"""Reduced pluriclosed flow ``k_t = (k_x / (k (1 - k)))_x`` on a truncated line.

The state is stored in the logit variable ``theta = log(k / (1 - k))``, in
which the flow reads ``theta_t = theta_xx / (k (1 - k))`` and the flux
``k_x / (k (1 - k))`` is exactly ``theta_x``.  Boundary conditions at
``x = -L`` and ``x = +L`` are Neumann with the soliton's asymptotic slopes
``a/b`` and ``1``.  Time stepping is backward Euler with Newton on the
tridiagonal Jacobian (kernels in :mod:`hopfsoliton._backend`); the driver
uses variable-step BDF2, which is the same nonlinear solve with a shifted
base state and a reduced effective step.

Along a run the monitor tracks the comparison function
``Phi(x, t) = kappa^{-1}(k(x - mu t, t)) - x``: the maximum principle says
``max Phi`` never increases and ``min Phi`` never decreases, so the
translates ``kappa(x - C_low)`` and ``kappa(x + C_high)`` trap the solution
for all time.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from . import _backend
from .errors import InitialDataError, NewtonDivergenceError, ParameterError, WindowExitError
from .geometry import MetricProfile, SurfaceParams, diagonal_profile
from .soliton import SolitonProfile, check_asymptotics, solve_profile

__all__ = [
    "FlowState",
    "FlowDiagnostics",
    "FlowControls",
    "FlowResult",
    "make_grid",
    "flow_rhs",
    "step",
    "step_bdf2",
    "run_flow",
    "envelope_monotone",
    "diagnose",
    "comparison_envelope",
    "shift_distance",
    "torsion_potential_norm",
    "profile_from_theta",
    "preset_initial",
    "write_trajectory_csv",
    "write_snapshot_csv",
    "read_initial_csv",
]


def make_grid(L: float, N: int) -> np.ndarray:
    if N < 3 or N % 2 == 0:
        raise ParameterError("N must be odd and >= 3 so that the grid contains x = 0")
    if L <= 0:
        raise ParameterError("L must be positive")
    return np.linspace(-L, L, N)


@dataclass(frozen=True)
class FlowState:
    grid: np.ndarray
    theta: np.ndarray
    t: float
    params: SurfaceParams
    dt_last: float = 0.0
    newton_iters: int = 0
    newton_residual: float = 0.0
    theta_prev: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.grid.shape != self.theta.shape:
            raise ParameterError("grid and theta must have the same shape")
        if not np.all(np.isfinite(self.theta)):
            raise ParameterError("theta must be finite at every node")

    @property
    def k(self) -> np.ndarray:
        return expit(self.theta)

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def L(self) -> float:
        return float(self.grid[-1])

    @property
    def slopes(self) -> Tuple[float, float]:
        """Neumann data ``(theta_x(-L), theta_x(+L)) = (a/b, 1)``."""
        return self.params.c_k, 1.0

    @classmethod
    def from_profile(cls, profile: MetricProfile, params: SurfaceParams, L: float, N: int, t: float = 0.0):
        grid = make_grid(L, N)
        if profile.theta is not None:
            theta = np.asarray(profile.theta(grid)[0], dtype=float)
        else:
            k = np.asarray(profile.k(grid)[0], dtype=float)
            theta = np.log(k) - np.log1p(-k)
        return cls(grid, theta, t, params)


@dataclass(frozen=True)
class FlowDiagnostics:
    t: float
    envelope: Tuple[float, float]
    shift: float
    aligned_sup_error: float
    torsion_norm: float
    dt: float = 0.0
    newton_iters: int = 0

    @property
    def envelope_max(self) -> float:
        return max(self.envelope)


@dataclass
class FlowControls:
    L: float = 40.0
    N: int = 2001
    dt0: float = 1e-2
    dt_max: float = 0.1
    dt_min: float = 1e-10
    grow: float = 1.25
    adaptive: bool = True
    record_every: float = 0.1
    target_error: Optional[float] = None
    scheme: str = "bdf2"
    newton_tol: float = 1e-12
    step_tol: float = 1e-13
    newton_maxiter: int = 25
    max_retries: int = 12
    asymptotics_tol: float = 1e-6
    check_initial: bool = True
    wall_time_limit: Optional[float] = None


@dataclass
class FlowResult:
    trajectory: List[FlowDiagnostics]
    final: FlowState
    soliton: SolitonProfile
    wall_time: float = 0.0
    steps: int = 0
    reached_target: bool = False


# --------------------------------------------------------------------------
# Discrete operators
# --------------------------------------------------------------------------


def _laplacian(state: FlowState) -> np.ndarray:
    s_left, s_right = state.slopes
    return _backend.kernels.laplacian_neumann(state.theta, state.h, s_left, s_right)


def flow_rhs(state: FlowState) -> np.ndarray:
    """``k_t`` at the interior nodes: the discrete ``(k_x / (k(1 - k)))_x = theta_xx``."""
    return _laplacian(state)[1:-1]


def theta_rate(state: FlowState) -> np.ndarray:
    """``theta_t = theta_xx / (k (1 - k))`` at every node (Neumann ghosts at the ends)."""
    k = state.k
    return _laplacian(state) / (k * (1.0 - k))


def flux_k_form(state: FlowState) -> np.ndarray:
    """Midpoint flux ``k_x / (k (1 - k))`` discretised directly in ``k``."""
    k = state.k
    kmid = 0.5 * (k[1:] + k[:-1])
    return np.diff(k) / state.h / (kmid * (1.0 - kmid))


def flux_theta_form(state: FlowState) -> np.ndarray:
    return np.diff(state.theta) / state.h


def _be_attempt(state: FlowState, dt: float, controls: FlowControls, base=None):
    s_left, s_right = state.slopes
    return _backend.kernels.be_solve(
        state.theta if base is None else base,
        dt,
        state.h,
        s_left,
        s_right,
        controls.newton_tol,
        controls.step_tol,
        controls.newton_maxiter,
    )


def _advanced(state: FlowState, theta, dt: float, iters, resid) -> FlowState:
    # the previous nodal values are kept as history for multistep schemes
    return replace(
        state,
        theta=np.asarray(theta),
        t=state.t + dt,
        dt_last=dt,
        newton_iters=int(iters),
        newton_residual=float(resid),
        theta_prev=state.theta,
    )


def step(state: FlowState, dt: float, controls: Optional[FlowControls] = None, _depth: int = 0) -> FlowState:
    """Advance by ``dt`` with backward Euler; on Newton failure substep with ``dt/2``."""
    if dt <= 0:
        raise ParameterError("dt must be positive")
    controls = controls or FlowControls()
    theta, iters, ok, resid = _be_attempt(state, dt, controls)
    if ok and np.all(np.isfinite(theta)):
        return _advanced(state, theta, dt, iters, resid)
    if _depth >= controls.max_retries:
        raise NewtonDivergenceError(f"Newton failed at t={state.t!r} even with dt={dt!r}")
    half = step(state, 0.5 * dt, controls, _depth + 1)
    return step(half, 0.5 * dt, controls, _depth + 1)


def step_bdf2(state: FlowState, dt: float, controls: Optional[FlowControls] = None) -> FlowState:
    """Variable-step BDF2 step; falls back to :func:`step` without history or on failure.

    With ``w = dt / dt_last`` the update
    ``theta - (1+w)^2/(1+2w) theta_n + w^2/(1+2w) theta_{n-1} = (1+w)/(1+2w) dt theta_t``
    is a backward-Euler solve from the base ``((1+w)^2 theta_n - w^2 theta_{n-1}) / (1+2w)``.
    """
    if dt <= 0:
        raise ParameterError("dt must be positive")
    controls = controls or FlowControls()
    if state.theta_prev is not None and state.dt_last > 0:
        w = dt / state.dt_last
        base = ((1.0 + w) ** 2 * state.theta - w * w * state.theta_prev) / (1.0 + 2.0 * w)
        theta, iters, ok, resid = _be_attempt(state, dt * (1.0 + w) / (1.0 + 2.0 * w), controls, base)
        if ok and np.all(np.isfinite(theta)):
            return _advanced(state, theta, dt, iters, resid)
    return step(state, dt, controls)


# --------------------------------------------------------------------------
# Monitors
# --------------------------------------------------------------------------


def comparison_envelope(state: FlowState, soliton: SolitonProfile) -> Tuple[float, float]:
    """``(C_low, C_high) = (-min Phi, max Phi)`` over the nodes.

    ``Phi = kappa^{-1}(k(x, t)) - (x + mu t)``, evaluated through ``theta`` so
    the tails keep full precision.  Hence
    ``kappa(x + mu t - C_low) <= k(x, t) <= kappa(x + mu t + C_high)``.
    """
    phi = soliton.x_of_theta(state.theta) - (state.grid + state.params.mu * state.t)
    # adding 0.0 normalises a negative zero
    return float(-np.min(phi)) + 0.0, float(np.max(phi)) + 0.0


def _sup_distance(state: FlowState, soliton: SolitonProfile, s: float) -> float:
    return float(np.max(np.abs(state.k - soliton.k_of_x(state.grid + s))))


def shift_distance(
    state: FlowState,
    soliton: SolitonProfile,
    bracket: Optional[Tuple[float, float]] = None,
    tol: float = 1e-9,
) -> Tuple[float, float]:
    """``(s*, err)`` minimising ``sup_x |k(x, t) - kappa(x + s)|`` by golden section.

    The default bracket comes from the comparison envelope, which confines the
    optimal translate to ``[mu t - C_low, mu t + C_high]`` (padded by 1).
    """
    if bracket is None:
        c_low, c_high = comparison_envelope(state, soliton)
        centre = state.params.mu * state.t
        bracket = (centre - c_low - 1.0, centre + c_high + 1.0)
    lo, hi = bracket
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc = _sup_distance(state, soliton, c)
    fd = _sup_distance(state, soliton, d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = _sup_distance(state, soliton, c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = _sup_distance(state, soliton, d)
    s = 0.5 * (lo + hi)
    return s, _sup_distance(state, soliton, s)


def torsion_potential_norm(state: FlowState, soliton: SolitonProfile) -> float:
    """Sup-norm of the coefficient ``k(x, t) - kappa(x)`` of the torsion potential."""
    return float(np.max(np.abs(state.k - soliton.k_of_x(state.grid))))


def diagnose(state: FlowState, soliton: SolitonProfile) -> FlowDiagnostics:
    envelope = comparison_envelope(state, soliton)
    shift, err = shift_distance(state, soliton)
    return FlowDiagnostics(
        t=state.t,
        envelope=envelope,
        shift=shift,
        aligned_sup_error=err,
        torsion_norm=torsion_potential_norm(state, soliton),
        dt=state.dt_last,
        newton_iters=state.newton_iters,
    )


# --------------------------------------------------------------------------
# Initial data
# --------------------------------------------------------------------------


def profile_from_theta(theta_jet: Callable) -> MetricProfile:
    """Diagonal profile (``n = k``, ``m = 0``, ``p = 1``) from a jet of ``theta``."""

    def k_jet(x):
        th, dth, ddth = theta_jet(x)
        k = expit(th)
        w = k * (1.0 - k)
        return k, w * dth, w * (ddth + (1.0 - 2.0 * k) * dth * dth)

    return diagonal_profile(k_jet, theta_jet)


def preset_initial(name: str, soliton: SolitonProfile, amplitude: float = 1.0, width: float = 2.0) -> MetricProfile:
    """Named initial data: ``"soliton"`` or ``"bump"`` (theta plus a Gaussian)."""
    if name == "soliton":
        return soliton.metric_profile()
    if name == "bump":

        def theta_jet(x):
            th, dth, ddth = soliton.theta_jet(x)
            x = np.asarray(x, dtype=float)
            g = amplitude * np.exp(-0.5 * (x / width) ** 2)
            return th + g, dth - x / width**2 * g, ddth + (x * x / width**4 - 1.0 / width**2) * g

        return profile_from_theta(theta_jet)
    raise ParameterError(f"unknown initial preset {name!r}")


def read_initial_csv(path) -> Callable:
    """Theta jet interpolated from a CSV with columns ``x`` and ``theta`` (or ``k``).

    Outside the tabulated range the data are extended linearly with the end slopes.
    """
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    x = np.array([float(r["x"]) for r in rows])
    if rows and "theta" in rows[0]:
        theta = np.array([float(r["theta"]) for r in rows])
    else:
        k = np.array([float(r["k"]) for r in rows])
        theta = np.log(k) - np.log1p(-k)
    slope = np.gradient(theta, x)

    def theta_jet(xq):
        xq = np.asarray(xq, dtype=float)
        val = np.interp(xq, x, theta)
        val = np.where(xq < x[0], theta[0] + slope[0] * (xq - x[0]), val)
        val = np.where(xq > x[-1], theta[-1] + slope[-1] * (xq - x[-1]), val)
        d1 = np.interp(xq, x, slope)
        return val, d1, np.interp(xq, x, np.gradient(slope, x))

    return theta_jet


# --------------------------------------------------------------------------
# Driver
# --------------------------------------------------------------------------


def _validate_initial(profile: MetricProfile, params: SurfaceParams, controls: FlowControls) -> None:
    report = check_asymptotics(profile, params, controls.L, tol=controls.asymptotics_tol)
    if not report.ok:
        failed = [item for item, _, ok in report.rows() if not ok]
        raise InitialDataError(f"initial data violate extension asymptotics at L={controls.L}: {failed}")


def run_flow(
    initial,
    params: SurfaceParams,
    T: float,
    controls: Optional[FlowControls] = None,
    soliton: Optional[SolitonProfile] = None,
    record_times: Optional[Sequence[float]] = None,
) -> FlowResult:
    """Evolve ``initial`` (a diagonal :class:`MetricProfile` or a :class:`FlowState`) to time ``T``.

    Diagnostics are recorded at ``t = 0``, every ``controls.record_every`` (or
    at ``record_times``) and at the end.  With ``controls.target_error`` set the
    run stops at the first record whose aligned error is below the target.
    """
    controls = controls or FlowControls()
    soliton = soliton or solve_profile(params)
    if controls.scheme not in ("be", "bdf2"):
        raise ParameterError(f"unknown time scheme {controls.scheme!r}")
    advance = step_bdf2 if controls.scheme == "bdf2" else step
    if isinstance(initial, FlowState):
        state = initial
    else:
        if controls.check_initial:
            _validate_initial(initial, params, controls)
        state = FlowState.from_profile(initial, params, controls.L, controls.N)

    if record_times is None:
        n_rec = max(1, int(math.ceil(T / controls.record_every - 1e-9)))
        record_times = [min(T, (i + 1) * controls.record_every) for i in range(n_rec)]
    record_times = sorted(t for t in record_times if state.t < t <= T)
    if not record_times or record_times[-1] < T:
        record_times.append(T)

    start = time.perf_counter()
    trajectory = [diagnose(state, soliton)]
    dt = controls.dt0
    steps = 0
    reached = False
    for t_rec in record_times:
        while state.t < t_rec - 1e-14 * max(1.0, t_rec):
            h = min(dt, t_rec - state.t)
            new = advance(state, h, controls)
            steps += 1
            # k = 1/2 must stay inside the window or the end slopes stop making sense
            if not new.theta[0] < 0.0 < new.theta[-1]:
                raise WindowExitError(
                    f"the front left [-{state.L:g}, {state.L:g}] at t={new.t:.6g}; enlarge L or shorten T"
                )
            if controls.adaptive:
                if new.dt_last < h:
                    dt = max(controls.dt_min, new.dt_last)
                elif new.newton_iters <= 4 and h == dt:
                    dt = min(controls.dt_max, dt * controls.grow)
            state = new
        diag = diagnose(state, soliton)
        trajectory.append(diag)
        if controls.target_error is not None and diag.aligned_sup_error < controls.target_error:
            reached = True
            break
        if controls.wall_time_limit is not None and time.perf_counter() - start > controls.wall_time_limit:
            break
    return FlowResult(
        trajectory=trajectory,
        final=state,
        soliton=soliton,
        wall_time=time.perf_counter() - start,
        steps=steps,
        reached_target=reached,
    )


def envelope_monotone(trajectory: Sequence[FlowDiagnostics], slack: float = 1e-6) -> bool:
    """``max(C_low, C_high)`` never exceeds its earlier values by more than ``slack``."""
    best = math.inf
    for d in trajectory:
        if d.envelope_max > best + slack:
            return False
        best = min(best, d.envelope_max)
    return True


# --------------------------------------------------------------------------
# CSV output
# --------------------------------------------------------------------------

TRAJECTORY_COLUMNS = ("t", "C_low", "C_high", "shift", "aligned_sup_error", "torsion_norm")
SNAPSHOT_COLUMNS = ("x", "k", "theta")


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_trajectory_csv(path, trajectory: Sequence[FlowDiagnostics]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for d in trajectory:
            w.writerow(
                [_fmt(d.t), _fmt(d.envelope[0]), _fmt(d.envelope[1]), _fmt(d.shift), _fmt(d.aligned_sup_error), _fmt(d.torsion_norm)]
            )


def write_snapshot_csv(path, state: FlowState) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SNAPSHOT_COLUMNS)
        for x, k, th in zip(state.grid, state.k, state.theta):
            w.writerow([_fmt(x), _fmt(k), _fmt(th)])
