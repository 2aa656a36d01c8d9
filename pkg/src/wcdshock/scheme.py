"""
Semi-discrete WCD schemes and time marching
-------------------------------------------

The scalar scheme reads

.. math::

    \\frac{d u_i}{dt} + \\frac{1}{\\Delta x} \\sum_j \\alpha_j f(u_{i+j})
    = \\frac{c}{\\Delta x} \\sum_j \\beta_j u_{i+j}
    + \\frac{\\delta c^2}{\\Delta x} \\sum_j \\gamma_j u_{i+j},

with the analogous system forms acting through the model's ``d1``/``d2``
matrices. Time integration is the three-stage Shu-Osher SSP Runge-Kutta
method with the dissipation coefficient frozen over the stages of a step.

.. autoclass:: GridSpec
.. autoclass:: FieldState
.. autoclass:: SchemeVariant
.. autoclass:: RunConfig
.. autoclass:: RunResult
.. autofunction:: spatial_residual_scalar
.. autofunction:: spatial_residual_system
.. autofunction:: spatial_residual_entropy_stable
.. autofunction:: entropy_conservative_flux_scalar
.. autofunction:: ssp_rk3_step
.. autofunction:: run
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, List, Optional, Sequence, Union

import numpy as np

from wcdshock.models import (
    DispersionKind, Model, RiemannData, ScalarModel, SystemModel,
)
from wcdshock.stencil import SeriesBounds, StencilSet, build_stencil_set, tail_sums
from wcdshock.wcd import WcdConfig, check_feasible, global_coefficient

logger = logging.getLogger(__name__)

BOUNDARY_CONDITIONS = ("periodic", "outflow_extrapolation")


class NonFiniteStateError(FloatingPointError):
    def __init__(self, step: int, time: float, message: str = ""):
        self.step = step
        self.time = time
        super().__init__(message or f"non-finite state at step {step}, t = {time:.17g}")


# {{{ grid and state


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``n_cells`` nodes at the cell centers of
    ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n_cells: int
    bc: str = "outflow_extrapolation"

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("grid: x_max must exceed x_min")
        if self.n_cells < 1:
            raise ValueError("grid.n_cells: must be positive")
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"grid.bc: unknown boundary condition {self.bc!r}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    def refined(self, factor: int = 2) -> "GridSpec":
        return replace(self, n_cells=self.n_cells * factor)


@dataclass(frozen=True)
class FieldState:
    grid: GridSpec
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteStateError(-1, self.time, "field state holds non-finite values")
        if self.values.shape[-1] != self.grid.n_cells:
            raise ValueError("field values do not match the grid size")

    @property
    def x(self) -> np.ndarray:
        return self.grid.x


class SchemeVariant(str, enum.Enum):
    STANDARD_WCD = "standard_wcd"
    ENTROPY_CONSERVATIVE_WCD = "entropy_conservative_wcd"


def pad(values: np.ndarray, p: int, bc: str) -> np.ndarray:
    """Ghost closure of width ``p`` along the last axis: periodic wrap or
    constant extrapolation of the boundary node."""
    if bc == "periodic":
        left, right = values[..., -p:], values[..., :p]
    else:
        left = np.repeat(values[..., :1], p, axis=-1)
        right = np.repeat(values[..., -1:], p, axis=-1)
    return np.concatenate([left, values, right], axis=-1)


def apply_stencil(padded: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    """``sum_j w_j v_{i+j}`` for nodes ``i`` of a ``p``-padded array."""
    kernel = np.asarray(weights)[::-1]
    if padded.ndim == 1:
        return np.convolve(padded, kernel, "valid")
    return np.stack([np.convolve(row, kernel, "valid") for row in padded])


# }}}


# {{{ residuals


def _unpack(state, grid):
    if isinstance(state, FieldState):
        return np.asarray(state.values, dtype=float), state.grid
    if grid is None:
        raise TypeError("a grid is required when passing bare arrays")
    return np.asarray(state, dtype=float), grid


def _check_finite(rate):
    if not np.all(np.isfinite(rate)):
        raise NonFiniteStateError(-1, float("nan"), "non-finite spatial residual")
    return rate


def _regularization_weights(stencils: StencilSet, c: float, delta: float) -> np.ndarray:
    w = c * stencils.beta
    if delta != 0:
        w = w + delta * c**2 * stencils.weights(3)
    return w


def spatial_residual_scalar(state, stencils: StencilSet, c: float,
                            model: ScalarModel, grid: Optional[GridSpec] = None):
    """Rate of change of the standard scalar WCD scheme at every node."""
    u, grid = _unpack(state, grid)
    if c < 0:
        raise ValueError("dissipation coefficient must be nonnegative")
    p, n, dx = stencils.p, grid.n_cells, grid.dx

    up = pad(u, p, grid.bc)
    rate = -apply_stencil(model.flux(up), stencils.alpha, n)
    if c != 0:
        rate += apply_stencil(up, _regularization_weights(stencils, c, model.delta), n)

    return _check_finite(rate / dx)


def spatial_residual_system(state, stencils: StencilSet, c: float,
                            model: SystemModel, grid: Optional[GridSpec] = None):
    """Rates for the capillarity or Hall system scheme, shape ``(2, n)``."""
    U, grid = _unpack(state, grid)
    if c < 0:
        raise ValueError("dissipation coefficient must be nonnegative")
    p, n, dx = stencils.p, grid.n_cells, grid.dx

    Up = pad(U, p, grid.bc)
    rate = -apply_stencil(model.flux(Up), stencils.alpha, n)
    if c != 0:
        diff = apply_stencil(Up, stencils.beta, n)
        if model.dispersion_kind == DispersionKind.SECOND_ORDER_HALL:
            rate += c * (model.d1 @ diff) + model.coeff * c * (model.d2 @ diff)
        else:
            rate += c * (model.d1 @ diff)
            if model.coeff != 0:
                disp = apply_stencil(Up, stencils.weights(3), n)
                rate += model.coeff * c**2 * (model.d2 @ disp)

    return _check_finite(rate / dx)


def entropy_conservative_flux_scalar(u_l, u_r, model: ScalarModel):
    r"""Two-point flux with :math:`[[v]] g = [[v f - F]]`, ``v`` the entropy
    variable; continuous at ``u_l == u_r`` where it equals ``f(u)``."""
    u_l = np.asarray(u_l, dtype=float)
    u_r = np.asarray(u_r, dtype=float)
    if model.ec_flux is not None:
        return model.ec_flux(u_l, u_r)

    vl, vr = model.entropy_variable(u_l), model.entropy_variable(u_r)
    psi_l = vl * model.flux(u_l) - model.entropy_flux(u_l)
    psi_r = vr * model.flux(u_r) - model.entropy_flux(u_r)
    dv = vr - vl
    same = dv == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (psi_r - psi_l) / np.where(same, 1.0, dv)
    return np.where(same, model.flux(0.5 * (u_l + u_r)), g)


def spatial_residual_entropy_stable(state, stencils: StencilSet, c: float,
                                    model: ScalarModel,
                                    grid: Optional[GridSpec] = None):
    """Scalar scheme whose flux term is ``sum_{j != 0} 2 alpha_j g*(u_i, u_{i+j})``."""
    u, grid = _unpack(state, grid)
    if model.is_system:
        raise TypeError("the entropy-conservative variant is scalar-only")
    if c < 0:
        raise ValueError("dissipation coefficient must be nonnegative")
    p, n, dx = stencils.p, grid.n_cells, grid.dx

    up = pad(u, p, grid.bc)
    flux_term = np.zeros(n)
    for k, a in enumerate(stencils.alpha):
        if k != p and a != 0.0:
            flux_term += 2.0 * a * entropy_conservative_flux_scalar(u, up[k:k + n], model)

    rate = -flux_term
    if c != 0:
        rate += apply_stencil(up, _regularization_weights(stencils, c, model.delta), n)

    return _check_finite(rate / dx)


# }}}


# {{{ time stepping


def ssp_rk3(u: np.ndarray, dt: float, operator: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    u1 = u + dt * operator(u)
    u2 = 0.75 * u + 0.25 * (u1 + dt * operator(u1))
    return u / 3.0 + 2.0 / 3.0 * (u2 + dt * operator(u2))


def ssp_rk3_step(state, dt: float, operator: Callable[[np.ndarray], np.ndarray]):
    """One Shu-Osher SSP-RK3 step. *state* may be a :class:`FieldState` (time is
    advanced) or a bare array."""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    if isinstance(state, FieldState):
        new = ssp_rk3(np.asarray(state.values, dtype=float), dt, operator)
        if not np.all(np.isfinite(new)):
            raise NonFiniteStateError(-1, state.time + dt)
        return FieldState(grid=state.grid, values=new, time=state.time + dt)

    new = ssp_rk3(np.asarray(state, dtype=float), dt, operator)
    if not np.all(np.isfinite(new)):
        raise NonFiniteStateError(-1, float("nan"))
    return new


# }}}


# {{{ driver


InitialData = Union[RiemannData, Callable[[np.ndarray], np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RunConfig:
    model: Model
    grid: GridSpec
    initial: Any
    wcd: WcdConfig = field(default_factory=WcdConfig)
    variant: SchemeVariant = SchemeVariant.STANDARD_WCD
    cfl: float = 0.45
    t_end: float = 0.0
    snapshot_times: Sequence[float] = ()
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not 0 < self.cfl:
            raise ValueError("cfl: must be positive")
        if self.t_end < 0:
            raise ValueError("t_end: must be nonnegative")
        if self.variant == SchemeVariant.ENTROPY_CONSERVATIVE_WCD and self.model.is_system:
            raise ValueError("variant: the entropy-conservative variant requires a scalar model")
        if any(not 0 <= t <= self.t_end for t in self.snapshot_times):
            raise ValueError("snapshot_times: must lie in [0, t_end]")


@dataclass
class RunResult:
    final: FieldState
    snapshots: List[FieldState]
    c_history: List[float]
    dt_history: List[float]
    t_history: List[float]
    bounds: Optional[SeriesBounds]
    config: RunConfig

    @property
    def n_steps(self) -> int:
        return len(self.dt_history)


def initial_values(config: RunConfig) -> np.ndarray:
    x = config.grid.x
    m = config.model.n_components
    init = config.initial
    if isinstance(init, RiemannData):
        values = init.sample(x, m)
    elif callable(init):
        values = np.asarray(init(x), dtype=float)
    else:
        values = np.array(init, dtype=float)

    shape = (config.grid.n_cells,) if m == 1 else (m, config.grid.n_cells)
    if values.shape != shape:
        raise ValueError(f"initial data: expected shape {shape}, got {values.shape}")
    return values


def needs_dispersion(model: Model) -> bool:
    if model.is_system:
        return (model.dispersion_kind == DispersionKind.THIRD_ORDER_CAPILLARITY
                and model.coeff != 0)
    return model.delta != 0


def make_operator(model: Model, stencils: StencilSet, variant: SchemeVariant):
    if model.is_system:
        return spatial_residual_system
    if variant == SchemeVariant.ENTROPY_CONSERVATIVE_WCD:
        return spatial_residual_entropy_stable
    return spatial_residual_scalar


def effective_speed(model: Model, values: np.ndarray, c: float,
                    stencils: StencilSet) -> float:
    """Advective speed plus the regularization terms folded into a speed."""
    speed = float(np.max(model.wave_speed_bound(values)))
    sum_beta = float(np.sum(np.abs(stencils.beta)))
    if model.is_system and model.dispersion_kind == DispersionKind.SECOND_ORDER_HALL:
        return speed + c * (1.0 + abs(model.coeff)) * sum_beta

    kappa = abs(model.coeff) if model.is_system else abs(model.delta)
    speed += c * sum_beta
    if kappa != 0 and stencils.gamma is not None:
        speed += kappa * c**2 * float(np.sum(np.abs(stencils.gamma)))
    return speed


def march(values: np.ndarray, grid: GridSpec, t_end: float,
          step: Callable[[np.ndarray, float, int], np.ndarray],
          time_step: Callable[[np.ndarray], float],
          snapshot_times: Sequence[float] = (),
          max_steps: int = 10_000_000,
          on_step: Optional[Callable[[float, float], None]] = None):
    """Generic explicit time loop landing exactly on *t_end* and on every
    snapshot time. ``time_step(values)`` proposes a step; ``step(values, dt,
    n)`` advances by ``dt``. Returns ``(final, snapshots)``."""
    wanted = set(float(t) for t in snapshot_times)
    stops = sorted(wanted | {float(t_end)})
    snapshots = []
    t = 0.0
    n = 0
    for stop in stops:
        while t < stop:
            if n >= max_steps:
                raise RuntimeError(f"exceeded max_steps={max_steps} at t = {t:.17g}")
            dt = time_step(values)
            if not dt > 0 or not np.isfinite(dt):
                dt = stop - t
            # clip to land on the stop, absorbing a trailing sliver
            if t + dt >= stop or stop - (t + dt) < 1e-12 * max(stop, 1.0):
                dt = stop - t
                t_next = stop
            else:
                t_next = t + dt
            values = step(values, dt, n)
            if not np.all(np.isfinite(values)):
                raise NonFiniteStateError(n, t_next)
            if on_step is not None:
                on_step(t_next, dt)
            t = t_next
            n += 1
        if stop in wanted:
            snapshots.append(FieldState(grid=grid, values=values.copy(), time=stop))

    return FieldState(grid=grid, values=values, time=t), snapshots


def run(config: RunConfig) -> RunResult:
    """Time-march *config* to ``t_end`` with a CFL-limited SSP-RK3 loop."""
    model, grid, wcd = config.model, config.grid, config.wcd
    stencils = build_stencil_set(wcd.p, need_dispersion=needs_dispersion(model))
    if grid.n_cells < 2 * wcd.p + 1:
        raise ValueError(f"grid.n_cells must be at least 2p+1 = {2 * wcd.p + 1}")

    bounds = tail_sums(stencils)
    if wcd.mode == "adaptive":
        if model.is_system and model.dispersion_kind == DispersionKind.SECOND_ORDER_HALL:
            pass  # the Hall bracket is checked per interface
        else:
            check_feasible(bounds, wcd.tau,
                           model.coeff if model.is_system else model.delta)

    values = initial_values(config)
    model.check_admissible(values)
    residual = make_operator(model, stencils, config.variant)

    c_history: List[float] = []
    dt_history: List[float] = []
    t_history: List[float] = []
    current = {"c": 0.0}

    def time_step(v):
        c = global_coefficient(v, model, bounds, wcd, periodic=grid.bc == "periodic")
        current["c"] = c
        s = effective_speed(model, v, c, stencils)
        return config.cfl * grid.dx / s if s > 0 else np.inf

    def step(v, dt, n):
        c = current["c"]

        def op(w):
            return residual(w, stencils, c, model, grid)

        try:
            return ssp_rk3(v, dt, op)
        except NonFiniteStateError as exc:
            raise NonFiniteStateError(n, (t_history[-1] if t_history else 0.0) + dt,
                                      f"non-finite residual at step {n}") from exc

    def on_step(t, dt):
        c_history.append(current["c"])
        dt_history.append(dt)
        t_history.append(t)

    final, snapshots = march(values, grid, config.t_end, step, time_step,
                             config.snapshot_times, config.max_steps, on_step)
    logger.info("%s: %d steps to t=%.6g, max c=%.6g", model.name, len(dt_history),
                final.time, max(c_history, default=0.0))

    return RunResult(final=final, snapshots=snapshots, c_history=c_history,
                     dt_history=dt_history, t_history=t_history, bounds=bounds,
                     config=config)


# }}}
