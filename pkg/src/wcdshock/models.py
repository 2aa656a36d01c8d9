"""
Physical models
---------------

A cubic scalar law, the van der Waals elasticity system and the simplified
Hall-MHD system, each with its flux, a wave-speed bound, a quadratic-type
entropy pair and the structure of its small-scale regularization.

Scalar states are arrays of shape ``(n,)``; system states have shape
``(2, n)`` (component-major) so that stencils act along the last axis.

.. autoclass:: ScalarModel
.. autoclass:: SystemModel
.. autoclass:: RiemannData
.. autofunction:: cubic_model
.. autofunction:: vdw_elasticity_model
.. autofunction:: hall_mhd_model
.. autofunction:: make_model
.. autofunction:: evaluate_flux
.. autofunction:: entropy_pair
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple, Union

import numpy as np

Array = np.ndarray


class ModelDomainError(ValueError):
    """Raised when a state lies outside a model's admissible set."""


class DispersionKind(str, enum.Enum):
    THIRD_ORDER_CAPILLARITY = "third_order_capillarity"
    SECOND_ORDER_HALL = "second_order_hall"


# {{{ scalar


@dataclass(frozen=True)
class ScalarModel:
    r"""Scalar law :math:`u_t + f(u)_x = \epsilon u_{xx} + \delta \epsilon^2 u_{xxx}`
    with entropy :math:`U(u) = u^2/2`."""

    name: str
    flux: Callable[[Array], Array]
    dflux: Callable[[Array], Array]
    delta: float
    entropy: Callable[[Array], Array]
    entropy_flux: Callable[[Array], Array]
    entropy_variable: Callable[[Array], Array]
    #: optional closed form of the entropy-conservative two-point flux
    ec_flux: Optional[Callable[[Array, Array], Array]] = None
    #: optional closed form of (f(a) - f(b)) / (a - b)
    chord_slope: Optional[Callable[[Array, Array], Array]] = None
    params: Dict[str, float] = field(default_factory=dict)

    n_components = 1
    component_names = ("u",)
    is_system = False

    def wave_speed_bound(self, u: Array) -> Array:
        return np.abs(self.dflux(u))

    def check_admissible(self, u: Array) -> None:
        if not np.all(np.isfinite(u)):
            raise ModelDomainError(f"{self.name}: non-finite state")


def _cubic_ec_flux(a, b):
    return 0.25 * (b**3 + b**2 * a + b * a**2 + a**3)


def cubic_model(delta: float = 1.0) -> ScalarModel:
    """:math:`f(u) = u^3` with entropy flux :math:`F(u) = 3u^4/4`."""
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")

    return ScalarModel(
        name="cubic",
        flux=lambda u: u * u * u,
        dflux=lambda u: 3.0 * u * u,
        delta=float(delta),
        entropy=lambda u: 0.5 * u**2,
        entropy_flux=lambda u: 0.75 * u**4,
        entropy_variable=lambda u: u,
        ec_flux=_cubic_ec_flux,
        chord_slope=lambda a, b: (a * a + b * b) + a * b,
        params={"delta": float(delta)},
    )


# }}}


# {{{ systems


@dataclass(frozen=True)
class SystemModel:
    """Two-component system :math:`U_t + F(U)_x = \\text{regularization}` with
    constant matrices ``d1`` (diffusion) and ``d2`` (dispersion or Hall)."""

    name: str
    flux: Callable[[Array], Array]
    wave_speed_bound: Callable[[Array], Array]
    d1: Array
    d2: Array
    dispersion_kind: DispersionKind
    coeff: float
    entropy: Callable[[Array], Array]
    entropy_flux: Callable[[Array], Array]
    entropy_variable: Callable[[Array], Array]
    component_names: Tuple[str, str]
    admissible: Callable[[Array], Array] = lambda U: np.all(np.isfinite(U), axis=0)
    params: Dict[str, float] = field(default_factory=dict)

    n_components = 2
    is_system = True

    def check_admissible(self, U: Array) -> None:
        ok = self.admissible(np.asarray(U))
        if not np.all(ok):
            raise ModelDomainError(f"{self.name}: state outside the admissible set")


def vdw_stress(w: Array, R: float = 8.0 / 3.0, T: float = 1.005) -> Array:
    """Normalized van der Waals stress, with inflection points near 1.01 and 1.85."""
    return -R * T / (w - 1.0 / 3.0) + 3.0 / w**2


def vdw_stress_derivative(w: Array, R: float = 8.0 / 3.0, T: float = 1.005) -> Array:
    return R * T / (w - 1.0 / 3.0) ** 2 - 6.0 / w**3


def vdw_stress_second_derivative(w: Array, R: float = 8.0 / 3.0, T: float = 1.005) -> Array:
    return -2.0 * R * T / (w - 1.0 / 3.0) ** 3 + 18.0 / w**4


def vdw_elasticity_model(coeff: float = 1.0, R: float = 8.0 / 3.0,
                         T: float = 1.005) -> SystemModel:
    """Elasticity in unknowns ``(w, v)`` with flux ``(-v, -sigma(w))``."""

    def admissible(U):
        U = np.asarray(U, dtype=float)
        return np.all(np.isfinite(U), axis=0) & (U[0] > 1.0 / 3.0)

    def guard(U):
        U = np.asarray(U, dtype=float)
        if np.any(U[0] <= 1.0 / 3.0):
            raise ModelDomainError("vdw-elasticity: volume w <= 1/3 hits the van der Waals pole")
        return U

    def flux(U):
        U = guard(U)
        return np.stack([-U[1], -vdw_stress(U[0], R, T)])

    def speed(U):
        U = guard(U)
        return np.sqrt(np.maximum(vdw_stress_derivative(U[0], R, T), 0.0))

    def stored_energy(w):
        # antiderivative of sigma
        return -R * T * np.log(w - 1.0 / 3.0) - 3.0 / w

    def entropy(U):
        U = guard(U)
        return 0.5 * U[1] ** 2 + stored_energy(U[0])

    def entropy_flux(U):
        U = guard(U)
        return -vdw_stress(U[0], R, T) * U[1]

    def entropy_variable(U):
        U = guard(U)
        return np.stack([vdw_stress(U[0], R, T), U[1]])

    return SystemModel(
        name="vdw-elasticity",
        flux=flux,
        wave_speed_bound=speed,
        d1=np.array([[0.0, 0.0], [0.0, 1.0]]),
        d2=np.array([[0.0, 0.0], [-1.0, 0.0]]),
        dispersion_kind=DispersionKind.THIRD_ORDER_CAPILLARITY,
        coeff=float(coeff),
        entropy=entropy,
        entropy_flux=entropy_flux,
        entropy_variable=entropy_variable,
        component_names=("w", "v"),
        admissible=admissible,
        params={"coeff": float(coeff), "R": float(R), "T": float(T)},
    )


def hall_mhd_model(alpha: float = 1.0) -> SystemModel:
    """Transverse magnetic field ``(v, w)`` with flux ``|U|^2 U``."""

    def flux(U):
        U = np.asarray(U, dtype=float)
        return (U[0] ** 2 + U[1] ** 2) * U

    def speed(U):
        U = np.asarray(U, dtype=float)
        return 3.0 * (U[0] ** 2 + U[1] ** 2)

    def entropy(U):
        U = np.asarray(U, dtype=float)
        return 0.5 * (U[0] ** 2 + U[1] ** 2)

    def entropy_flux(U):
        U = np.asarray(U, dtype=float)
        return 0.75 * (U[0] ** 2 + U[1] ** 2) ** 2

    return SystemModel(
        name="hall-mhd",
        flux=flux,
        wave_speed_bound=speed,
        d1=np.eye(2),
        d2=np.array([[0.0, 1.0], [-1.0, 0.0]]),
        dispersion_kind=DispersionKind.SECOND_ORDER_HALL,
        coeff=float(alpha),
        entropy=entropy,
        entropy_flux=entropy_flux,
        entropy_variable=lambda U: np.array(U, dtype=float),
        component_names=("v", "w"),
        params={"alpha": float(alpha)},
    )


# }}}


Model = Union[ScalarModel, SystemModel]

MODEL_NAMES = ("cubic", "vdw-elasticity", "hall-mhd")


def make_model(name: str, params: Optional[Dict[str, Any]] = None) -> Model:
    """Build a model by its configuration name."""
    params = dict(params or {})
    try:
        if name == "cubic":
            return cubic_model(**params)
        if name == "vdw-elasticity":
            return vdw_elasticity_model(**params)
        if name == "hall-mhd":
            return hall_mhd_model(**params)
    except TypeError as exc:
        raise ValueError(f"model.params: invalid parameters for {name!r}: {exc}") from None

    raise ValueError(f"model.name: unknown model {name!r}, expected one of {MODEL_NAMES}")


def evaluate_flux(model: Model, state) -> Array:
    state = np.asarray(state, dtype=float)
    return model.flux(state)


def entropy_pair(model: Model, state) -> Tuple[Any, Any, Any]:
    """Return ``(entropy, entropy_flux, entropy_variable)`` at *state*."""
    state = np.asarray(state, dtype=float)
    return (model.entropy(state), model.entropy_flux(state),
            model.entropy_variable(state))


@dataclass(frozen=True)
class RiemannData:
    left_state: Any
    right_state: Any
    jump_location: float

    def is_trivial(self) -> bool:
        return bool(np.array_equal(np.asarray(self.left_state, dtype=float),
                                   np.asarray(self.right_state, dtype=float)))

    def sample(self, x: Array, n_components: int = 1) -> Array:
        left = np.asarray(self.left_state, dtype=float)
        right = np.asarray(self.right_state, dtype=float)
        mask = x < self.jump_location
        if n_components == 1:
            return np.where(mask, float(left), float(right))
        return np.where(mask[None, :], left[:, None], right[:, None])
