"""
Reference computations
----------------------

Independent of the WCD schemes: the classical (Oleinik) Riemann solution of
a scalar law from flux envelopes, the nonclassical kinetic function of the
cubic law from a traveling-wave shooting problem, a first-order
Lax-Friedrichs baseline, and a direct fine-grid simulation of the
diffusive-dispersive equation.

.. autoclass:: TravelingWaveProblem
.. autofunction:: traveling_wave_kinetic
.. autofunction:: classical_riemann_cubic
.. autofunction:: nonclassical_riemann_cubic
.. autofunction:: lax_friedrichs_baseline
.. autofunction:: direct_regularized_simulation
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from wcdshock.models import ScalarModel, cubic_model
from wcdshock.scheme import (
    FieldState, GridSpec, RunConfig, RunResult, initial_values, march, pad,
)


class NoConnectionError(RuntimeError):
    """Shooting could not bracket a saddle-to-saddle connection."""


# {{{ traveling waves


@dataclass(frozen=True)
class TravelingWaveProblem:
    """Profile problem ``-s(w - u_minus) + (w^3 - u_minus^3) = w' + delta w''``."""

    u_minus: float
    delta: float = 1.0
    tol: float = 1.0e-12
    max_arc_length: float = 1.0e4

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("traveling-wave oracle needs delta > 0")


@dataclass(frozen=True)
class TravelingWaveResult:
    u_minus: float
    u_plus: float
    speed: float
    #: half-width of the final bisection bracket
    residual: float
    delta: float


def _rh_speed(um: float, up: float) -> float:
    return um * um + um * up + up * up


def _shoot(um: float, up: float, delta: float, max_arc: float) -> int:
    """Integrate from the saddle ``um`` along its unstable manifold.

    Returns ``+1`` if the orbit passes beyond ``up`` and ``-1`` if it turns
    back first.
    """
    s = _rh_speed(um, up)
    gp = 3.0 * um * um - s
    if gp <= 0:
        raise NoConnectionError(f"u_minus={um} is not a saddle for u_plus={up}")

    lam = 0.5 * (-1.0 / delta + math.sqrt(1.0 / delta**2 + 4.0 * gp / delta))
    scale = abs(um - up)
    eta = 1.0e-9 * scale

    def rhs(_, y):
        w, dw = y
        g = (w - um) * (w * w + w * um + um * um - s)
        return [dw, (g - dw) / delta]

    def passed(_, y):
        return y[0] - up
    passed.terminal = True
    passed.direction = -1

    def turned(_, y):
        return y[1]
    turned.terminal = True
    turned.direction = 1

    # the time scale of the orbit shrinks like 1/um^2; cap the arc length
    t_max = max_arc / max(1.0, lam)
    sol = solve_ivp(rhs, (0.0, t_max), [um - eta, -eta * lam], method="DOP853",
                    events=(passed, turned), rtol=1e-12, atol=1e-14 * max(1.0, scale))
    if sol.t_events[0].size:
        return 1
    if sol.t_events[1].size:
        return -1

    w_end = sol.y[0, -1]
    return 1 if w_end < up else -1


def traveling_wave_kinetic(problem: TravelingWaveProblem) -> TravelingWaveResult:
    """Right state of the nonclassical (saddle-to-saddle) traveling wave
    leaving ``u_minus``, found by bisection along the Rankine-Hugoniot set
    ``s = u_-^2 + u_- u_+ + u_+^2``."""
    um, delta = float(problem.u_minus), float(problem.delta)
    if um == 0:
        raise NoConnectionError("u_minus = 0 admits no nonclassical connection")
    if um < 0:
        res = traveling_wave_kinetic(TravelingWaveProblem(
            -um, delta, problem.tol, problem.max_arc_length))
        return TravelingWaveResult(um, -res.u_plus, res.speed, res.residual, delta)

    lo, hi = -um, -0.5 * um
    pad_ = 1e-9 * um
    a, b = lo + pad_, hi - pad_
    fa = _shoot(um, a, delta, problem.max_arc_length)
    fb = _shoot(um, b, delta, problem.max_arc_length)
    if fa == fb:
        raise NoConnectionError(
            f"no-connection: shooting does not bracket a nonclassical state for "
            f"u_minus={um}, delta={delta} (classical regime)")

    tol = problem.tol * max(1.0, abs(um))
    while b - a > tol:
        mid = 0.5 * (a + b)
        if _shoot(um, mid, delta, problem.max_arc_length) == fa:
            a = mid
        else:
            b = mid

    up = 0.5 * (a + b)
    return TravelingWaveResult(um, up, _rh_speed(um, up), 0.5 * (b - a), delta)


# }}}


# {{{ classical Riemann solutions


@dataclass(frozen=True)
class Shock:
    left: float
    right: float
    speed: float


@dataclass(frozen=True)
class Rarefaction:
    left: float
    right: float
    speed_left: float
    speed_right: float


Wave = Union[Shock, Rarefaction]


@dataclass
class ClassicalRiemannSolution:
    u_l: float
    u_r: float
    waves: List[Wave]
    flux: Callable = field(repr=False, default=None)
    dflux: Callable = field(repr=False, default=None)

    def __call__(self, xi) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.full(xi.shape, self.u_l)
        for wave in self.waves:
            if isinstance(wave, Shock):
                out[xi >= wave.speed] = wave.right
            else:
                fan = (xi >= wave.speed_left) & (xi <= wave.speed_right)
                lo, hi = sorted((wave.left, wave.right))
                for k in np.flatnonzero(fan):
                    out[k] = self._invert(xi[k], lo, hi)
                out[xi > wave.speed_right] = wave.right
        return out

    def _invert(self, s, lo, hi):
        if lo == hi:
            return lo
        flo, fhi = self.dflux(lo) - s, self.dflux(hi) - s
        if flo == 0:
            return lo
        if fhi == 0 or flo * fhi > 0:
            return hi if abs(fhi) < abs(flo) else lo
        return brentq(lambda u: self.dflux(u) - s, lo, hi, xtol=1e-15, rtol=1e-15)

    def sample(self, x, t: float, x0: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if t <= 0:
            return np.where(x < x0, self.u_l, self.u_r)
        return self(((x - x0) / t))

    @property
    def shocks(self) -> List[Shock]:
        return [w for w in self.waves if isinstance(w, Shock)]


def _hull(points: np.ndarray, values: np.ndarray, upper: bool) -> List[int]:
    """Monotone-chain half hull of sorted points; returns vertex indices."""
    sign = -1.0 if upper else 1.0
    hull: List[int] = []
    for k in range(len(points)):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            cross = ((points[j] - points[i]) * (values[k] - values[i])
                     - (values[j] - values[i]) * (points[k] - points[i]))
            if sign * cross <= 0:
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


def classical_riemann(flux: Callable, dflux: Callable, u_l: float, u_r: float,
                      extra_points: Sequence[float] = (),
                      n_samples: int = 20001) -> ClassicalRiemannSolution:
    """Oleinik solution from the lower convex (``u_l < u_r``) or upper concave
    (``u_l > u_r``) envelope of the flux on the interval between the states."""
    u_l, u_r = float(u_l), float(u_r)
    if u_l == u_r:
        return ClassicalRiemannSolution(u_l, u_r, [], flux, dflux)

    lo, hi = min(u_l, u_r), max(u_l, u_r)
    pts = np.linspace(lo, hi, n_samples)
    pts = np.unique(np.concatenate([pts, [p for p in extra_points if lo <= p <= hi]]))
    vals = flux(pts)
    upper = u_l > u_r
    idx = _hull(pts, vals, upper)

    # edges in order of increasing u; reverse for u_l > u_r so waves run left to right
    edges = []
    for i, j in zip(idx[:-1], idx[1:]):
        slope = (vals[j] - vals[i]) / (pts[j] - pts[i])
        touching = j == i + 1
        edges.append((pts[i], pts[j], slope, touching))
    if upper:
        edges = [(b, a, s, t) for a, b, s, t in reversed(edges)]

    waves: List[Wave] = []
    for a, b, s, touching in edges:
        if touching and waves and isinstance(waves[-1], Rarefaction):
            w = waves[-1]
            waves[-1] = Rarefaction(w.left, float(b), w.speed_left, float(dflux(b)))
        elif touching:
            waves.append(Rarefaction(float(a), float(b), float(dflux(a)), float(dflux(b))))
        else:
            waves.append(Shock(float(a), float(b), float(s)))

    # a single-interval "rarefaction" left over from sampling is a weak shock
    cleaned: List[Wave] = []
    for w in waves:
        if isinstance(w, Rarefaction) and w.speed_right < w.speed_left:
            s = (flux(w.right) - flux(w.left)) / (w.right - w.left)
            w = Shock(w.left, w.right, float(s))
        cleaned.append(w)

    return ClassicalRiemannSolution(u_l, u_r, cleaned, flux, dflux)


def classical_riemann_cubic(u_l: float, u_r: float,
                            x_over_t: Optional[Sequence[float]] = None,
                            n_samples: int = 20001):
    """Classical solution for ``f(u) = u^3``. With *x_over_t* given, returns the
    sampled values; otherwise the :class:`ClassicalRiemannSolution`."""
    model = cubic_model(0.0)
    # tangency points of chords from either state and the inflection point
    extra = (-0.5 * u_l, -0.5 * u_r, 0.0)
    sol = classical_riemann(model.flux, model.dflux, u_l, u_r, extra, n_samples)
    if x_over_t is None:
        return sol
    return sol(x_over_t)


def nonclassical_riemann_cubic(u_l: float, u_r: float, delta: float = 1.0,
                               n_samples: int = 20001) -> ClassicalRiemannSolution:
    """Riemann solution for ``f(u) = u^3`` whose undercompressive shocks obey
    the kinetic function from :func:`traveling_wave_kinetic`.

    For ``u_l > 0`` with middle state ``u_m`` and companion ``-u_l - u_m``:
    a nonclassical shock to ``u_m`` followed by a rarefaction when
    ``u_r <= u_m``, or by a classical shock when ``u_m < u_r < -u_l - u_m``.
    Other data, and left states without a connection, give the classical
    solution. Negative ``u_l`` follows by odd symmetry.
    """
    u_l, u_r = float(u_l), float(u_r)
    if u_l < 0:
        sol = nonclassical_riemann_cubic(-u_l, -u_r, delta, n_samples)
        waves = [Shock(-w.left, -w.right, w.speed) if isinstance(w, Shock)
                 else Rarefaction(-w.left, -w.right, w.speed_left, w.speed_right)
                 for w in sol.waves]
        return ClassicalRiemannSolution(u_l, u_r, waves, sol.flux, sol.dflux)

    model = cubic_model(delta)
    try:
        u_m = traveling_wave_kinetic(TravelingWaveProblem(u_l, delta)).u_plus
    except NoConnectionError:
        return classical_riemann_cubic(u_l, u_r, n_samples=n_samples)

    companion = -u_l - u_m
    if not u_r < companion:
        return classical_riemann_cubic(u_l, u_r, n_samples=n_samples)

    first = Shock(u_l, u_m, _rh_speed(u_l, u_m))
    rest = classical_riemann_cubic(u_m, u_r, n_samples=n_samples).waves
    return ClassicalRiemannSolution(u_l, u_r, [first, *rest], model.flux, model.dflux)


# }}}


# {{{ Lax-Friedrichs


def lax_friedrichs_baseline(config: RunConfig) -> RunResult:
    """First-order Lax-Friedrichs on the grid and CFL number of *config*; the
    WCD settings are ignored."""
    model, grid = config.model, config.grid
    values = initial_values(config)
    dx = grid.dx
    dt_history: List[float] = []
    t_history: List[float] = []

    def time_step(v):
        s = float(np.max(model.wave_speed_bound(v)))
        return config.cfl * dx / s if s > 0 else np.inf

    def step(v, dt, n):
        vp = pad(v, 1, grid.bc)
        fp = model.flux(vp)
        return (0.5 * (vp[..., :-2] + vp[..., 2:])
                - 0.5 * dt / dx * (fp[..., 2:] - fp[..., :-2]))

    def on_step(t, dt):
        dt_history.append(dt)
        t_history.append(t)

    final, snapshots = march(values, grid, config.t_end, step, time_step,
                             config.snapshot_times, config.max_steps, on_step)
    return RunResult(final=final, snapshots=snapshots,
                     c_history=[0.0] * len(dt_history), dt_history=dt_history,
                     t_history=t_history, bounds=None, config=config)


# }}}


# {{{ direct simulation of the regularized equation


def direct_regularized_simulation(u_l: float, u_r: float, delta: float,
                                  eps: float, grid: GridSpec, t_end: float,
                                  jump_location: float, cfl: float = 0.4,
                                  model: Optional[ScalarModel] = None) -> FieldState:
    """Second-order central discretization of
    ``u_t + f(u)_x = eps u_xx + delta eps^2 u_xxx`` with ``dx`` resolving
    ``eps``, advanced by SSP-RK3 under advective, diffusive and dispersive
    step limits."""
    model = model or cubic_model(delta)
    dx = grid.dx
    x = grid.x
    # the jump is smoothed over a width eps to avoid a grid-scale start-up transient
    u = 0.5 * (u_l + u_r) + 0.5 * (u_l - u_r) * np.tanh((jump_location - x) / eps)

    def rhs(v):
        vp = pad(v, 2, grid.bc)
        fp = model.flux(vp)
        adv = (fp[3:-1] - fp[1:-3]) / (2.0 * dx)
        lap = (vp[3:-1] - 2.0 * vp[2:-2] + vp[1:-3]) / dx**2
        d3 = (vp[4:] - 2.0 * vp[3:-1] + 2.0 * vp[1:-3] - vp[:-4]) / (2.0 * dx**3)
        return -adv + eps * lap + delta * eps**2 * d3

    def time_step(v):
        speed = float(np.max(model.wave_speed_bound(v)))
        limits = [dx / max(speed, 1e-300), dx**2 / (2.0 * eps)]
        if delta != 0:
            limits.append(dx**3 / (abs(delta) * eps**2 * 2.0))
        return cfl * min(limits)

    def step(v, dt, n):
        u1 = v + dt * rhs(v)
        u2 = 0.75 * v + 0.25 * (u1 + dt * rhs(u1))
        return v / 3.0 + 2.0 / 3.0 * (u2 + dt * rhs(u2))

    final, _ = march(u, grid, t_end, step, time_step)
    return final


# }}}
