"""
Numerical dissipation coefficient from the WCD condition
--------------------------------------------------------

At a single shock with jump ``[[u]]`` and speed bound ``sigma`` the scheme's
equivalent equation balances leading-order terms against the tail sums of
:mod:`wcdshock.stencil`. For the scalar law this is the quadratic condition

.. math::

    \\left(|\\delta| - \\frac{\\hat S^C_p|\\delta|}{\\tau}\\right) c^2
    + \\left(1 - \\frac{\\hat S^D_p}{\\tau}\\right) c
    - \\left(1 + \\frac{\\hat S^f_p}{\\tau}\\right) \\sigma > 0,

and the coefficient is taken slightly above its positive root. Systems apply
it component-wise and take the maximum.

.. autoclass:: WcdConfig
.. autofunction:: wcd_scalar
.. autofunction:: wcd_capillarity_system
.. autofunction:: wcd_hall_system
.. autofunction:: global_coefficient
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from wcdshock.models import DispersionKind, ScalarModel, SystemModel
from wcdshock.stencil import SeriesBounds

DEFAULT_MARGIN = 0.01


class InfeasibleToleranceError(ValueError):
    """The tolerance cannot be met by any positive dissipation coefficient."""


@dataclass(frozen=True)
class WcdConfig:
    """``c_fixed`` is set for ``mode == "fixed"`` and ignored otherwise."""

    tau: float = 0.1
    p: int = 4
    mode: str = "adaptive"
    c_fixed: Optional[float] = None
    safety_margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if self.mode not in ("adaptive", "fixed"):
            raise ValueError(f"wcd.mode: expected 'adaptive' or 'fixed', got {self.mode!r}")
        if self.mode == "fixed" and (self.c_fixed is None or self.c_fixed < 0):
            raise ValueError("wcd.c: fixed mode needs a nonnegative coefficient")
        if self.mode == "adaptive" and not 0 < self.tau:
            raise ValueError(f"wcd.tau: must be positive, got {self.tau}")
        if self.safety_margin < 0:
            raise ValueError("wcd.margin: must be nonnegative")

    @classmethod
    def parse_c(cls, spec: str, **kwargs) -> "WcdConfig":
        """Parse the command-line form ``fixed:<value>`` or ``adaptive``."""
        if spec == "adaptive":
            return cls(mode="adaptive", **kwargs)
        if spec.startswith("fixed:"):
            return cls(mode="fixed", c_fixed=float(spec.split(":", 1)[1]), **kwargs)
        raise ValueError(f"--c: expected 'fixed:<val>' or 'adaptive', got {spec!r}")


# {{{ helpers


def _ratios(bounds: SeriesBounds, tau: float):
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return bounds.s_f_hat / tau, bounds.s_d_hat / tau, bounds.s_c_hat / tau


def _infeasible(bounds: SeriesBounds, tau: float, what: str) -> InfeasibleToleranceError:
    return InfeasibleToleranceError(
        f"tau={tau:g} is infeasible for p={bounds.p}: {what} "
        f"(S_f={bounds.s_f_hat:.3e}, S_D={bounds.s_d_hat:.3e}, "
        f"S_C={bounds.s_c_hat:.3e}); the condition S_C/tau < 1 must hold, "
        "increase the order p or the tolerance tau"
    )


def check_feasible(bounds: SeriesBounds, tau: float, delta: float) -> None:
    """Raise unless the scalar/capillarity quadratic admits ``c > 0``."""
    _, rd, rc = _ratios(bounds, tau)
    if delta != 0:
        if not np.isfinite(rc):
            raise _infeasible(bounds, tau, "dispersion stencil unavailable")
        if not rc < 1:
            raise _infeasible(bounds, tau, f"S_C/tau = {rc:.4g} >= 1")
    elif not rd < 1:
        raise _infeasible(bounds, tau, f"S_D/tau = {rd:.4g} >= 1 with no dispersion")


def positive_root(a, b, e):
    """Positive root of ``a c^2 + b c - e`` for ``a >= 0``, ``e >= 0``.

    Written as ``2e / (b + sqrt(b^2 + 4ae))`` to stay finite at ``a = 0``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    e = np.asarray(e, dtype=float)
    den = b + np.sqrt(b * b + 4.0 * a * e)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(e > 0, 2.0 * e / den, 0.0)


def scalar_quadratic(c, sigma, delta, bounds: SeriesBounds, tau):
    """Left-hand side of the scalar WCD inequality."""
    rf, rd, rc = _ratios(bounds, tau)
    ad = abs(delta)
    rc = 0.0 if ad == 0 else rc
    return (ad - rc * ad) * c**2 + (1.0 - rd) * c - (1.0 + rf) * sigma


def shock_speed_bound(model: ScalarModel, ul, ur):
    ul = np.asarray(ul, dtype=float)
    ur = np.asarray(ur, dtype=float)
    if model.chord_slope is not None:
        s = model.chord_slope(ul, ur)
    else:
        du = ul - ur
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(du != 0, (model.flux(ul) - model.flux(ur)) / np.where(du != 0, du, 1.0), 0.0)
    return np.abs(s)


# }}}


# {{{ scalar


def wcd_scalar_sigma(sigma, delta: float, bounds: SeriesBounds, tau: float,
                     safety_margin: float = DEFAULT_MARGIN):
    """Coefficient for a given shock-speed bound *sigma* (vectorized)."""
    check_feasible(bounds, tau, delta)
    rf, rd, rc = _ratios(bounds, tau)
    ad = abs(delta)
    a = ad * (1.0 - rc) if ad != 0 else 0.0
    b = 1.0 - rd
    e = (1.0 + rf) * np.asarray(sigma, dtype=float)
    return (1.0 + safety_margin) * positive_root(a, b, e)


def wcd_scalar(u_l, u_r, delta: float, bounds: SeriesBounds, tau: float,
               model: Optional[ScalarModel] = None,
               safety_margin: float = DEFAULT_MARGIN):
    """Interface coefficient for the states ``u_l``, ``u_r`` (vectorized).

    Zero where ``u_l == u_r``. The flux defaults to the cubic one.
    """
    if model is None:
        from wcdshock.models import cubic_model
        model = cubic_model(delta)

    u_l = np.asarray(u_l, dtype=float)
    u_r = np.asarray(u_r, dtype=float)
    sigma = np.where(u_l != u_r, shock_speed_bound(model, u_l, u_r), 0.0)
    c = wcd_scalar_sigma(sigma, delta, bounds, tau, safety_margin)
    return float(c) if c.ndim == 0 else c


# }}}


# {{{ systems


def _system_jumps(model: SystemModel, U_l, U_r):
    U_l = np.asarray(U_l, dtype=float)
    U_r = np.asarray(U_r, dtype=float)
    if U_l.ndim == 1:
        U_l = U_l[:, None]
        U_r = U_r[:, None]

    jump = U_l - U_r
    fjump = model.flux(U_l) - model.flux(U_r)
    norm_u = np.sqrt(np.sum(jump**2, axis=0))
    norm_f = np.sqrt(np.sum(fjump**2, axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = np.where(norm_u > 0, norm_f / np.where(norm_u > 0, norm_u, 1.0), 0.0)

    return jump, sigma


def capillarity_component(d1_jump, d2_jump, comp_jump, sigma, delta: float,
                          bounds: SeriesBounds, tau: float,
                          safety_margin: float = DEFAULT_MARGIN):
    """Coefficient for one component of the capillarity-system condition,
    given the inner products with the rows of ``d1`` and ``d2``."""
    rf, rd, rc = _ratios(bounds, tau)
    d1_jump = np.abs(np.asarray(d1_jump, dtype=float))
    d2_jump = np.abs(np.asarray(d2_jump, dtype=float))
    ad = abs(delta)

    a = (ad - rc * ad) * d2_jump if ad != 0 else np.zeros_like(d2_jump)
    b = (1.0 - rd) * d1_jump
    e = (1.0 + rf) * np.asarray(sigma, dtype=float) * np.abs(comp_jump)

    # the component is vacuous only when both inner products vanish
    active = (d1_jump > 0) | (d2_jump > 0)
    if np.any(active & (a < 0)) or np.any(active & (a == 0) & (b <= 0)):
        raise _infeasible(bounds, tau, "component quadratic has no positive root")

    c = (1.0 + safety_margin) * positive_root(np.where(active, a, 0.0),
                                              np.where(active, b, 1.0),
                                              np.where(active, e, 0.0))
    return np.where(active, c, 0.0)


def wcd_capillarity_system(U_l, U_r, model: SystemModel, bounds: SeriesBounds,
                           tau: float, safety_margin: float = DEFAULT_MARGIN):
    """Max over components of the capillarity-system coefficients.

    ``U_l``, ``U_r`` are states of shape ``(2,)`` or ``(2, m)`` for ``m``
    interfaces; ``sigma`` is the Euclidean ratio ``|[[F]]| / |[[U]]|``.
    """
    if model.dispersion_kind != DispersionKind.THIRD_ORDER_CAPILLARITY:
        raise ValueError(f"{model.name} is not a capillarity model")
    scalar_input = np.ndim(U_l) == 1
    if model.coeff != 0:
        check_feasible(bounds, tau, model.coeff)

    jump, sigma = _system_jumps(model, U_l, U_r)
    d1j = model.d1 @ jump
    d2j = model.d2 @ jump
    c = np.zeros(jump.shape[1])
    for i in range(jump.shape[0]):
        ci = capillarity_component(d1j[i], d2j[i], jump[i], sigma, model.coeff,
                                   bounds, tau, safety_margin)
        c = np.maximum(c, ci)

    return float(c[0]) if scalar_input else c


def hall_component(d1_jump, d2_jump, comp_jump, sigma, alpha: float,
                   bounds: SeriesBounds, tau: float,
                   safety_margin: float = DEFAULT_MARGIN):
    """Coefficient for one component of the (linear) Hall condition."""
    rf, rd, _ = _ratios(bounds, tau)
    d1_jump = np.abs(np.asarray(d1_jump, dtype=float))
    d2_jump = np.abs(np.asarray(d2_jump, dtype=float))
    k = (abs(alpha) - rd * abs(alpha)) * d2_jump + (1.0 - rd) * d1_jump
    e = (1.0 + rf) * np.asarray(sigma, dtype=float) * np.abs(comp_jump)

    active = (d1_jump > 0) | (d2_jump > 0)
    if np.any(active & (k <= 0)):
        raise _infeasible(bounds, tau, f"Hall coefficient bracket <= 0 (S_D/tau = {rd:.4g})")

    with np.errstate(divide="ignore", invalid="ignore"):
        c = (1.0 + safety_margin) * e / np.where(active, k, 1.0)
    return np.where(active, c, 0.0)


def wcd_hall_system(U_l, U_r, model: SystemModel, bounds: SeriesBounds,
                    tau: float, safety_margin: float = DEFAULT_MARGIN):
    """Max over components of the Hall-system coefficients. Both
    regularization terms carry the diffusion tail sum, since the scheme
    applies the second-derivative weights through ``d1`` and ``d2``."""
    if model.dispersion_kind != DispersionKind.SECOND_ORDER_HALL:
        raise ValueError(f"{model.name} is not a Hall model")
    scalar_input = np.ndim(U_l) == 1

    jump, sigma = _system_jumps(model, U_l, U_r)
    d1j = model.d1 @ jump
    d2j = model.d2 @ jump
    c = np.zeros(jump.shape[1])
    for i in range(jump.shape[0]):
        ci = hall_component(d1j[i], d2j[i], jump[i], sigma, model.coeff,
                            bounds, tau, safety_margin)
        c = np.maximum(c, ci)

    return float(c[0]) if scalar_input else c


# }}}


def interface_coefficients(values, model, bounds: SeriesBounds, tau: float,
                           safety_margin: float = DEFAULT_MARGIN):
    """WCD coefficient at every interface ``(i, i+1)`` of a node array."""
    values = np.asarray(values, dtype=float)
    if not model.is_system:
        return wcd_scalar(values[:-1], values[1:], model.delta, bounds, tau,
                          model=model, safety_margin=safety_margin)

    left, right = values[:, :-1], values[:, 1:]
    if model.dispersion_kind == DispersionKind.SECOND_ORDER_HALL:
        return wcd_hall_system(left, right, model, bounds, tau, safety_margin)
    return wcd_capillarity_system(left, right, model, bounds, tau, safety_margin)


def global_coefficient(state, model, bounds: SeriesBounds, config: WcdConfig,
                       periodic: Optional[bool] = None) -> float:
    """Scheme-wide coefficient ``c(t)``: the configured constant in fixed
    mode, otherwise the maximum of the interface coefficients.

    *state* is a :class:`~wcdshock.scheme.FieldState` or a bare node array;
    periodic grids include the wrap-around interface.
    """
    if config.mode == "fixed":
        return float(config.c_fixed)

    values = getattr(state, "values", state)
    if periodic is None:
        grid = getattr(state, "grid", None)
        periodic = grid is not None and grid.bc == "periodic"

    values = np.asarray(values, dtype=float)
    if periodic and values.shape[-1] > 1:
        values = np.concatenate([values, values[..., :1]], axis=-1)
    if values.shape[-1] < 2:
        return 0.0
    c = interface_coefficients(values, model, bounds, config.tau, config.safety_margin)
    return float(np.max(c)) if np.size(c) else 0.0
