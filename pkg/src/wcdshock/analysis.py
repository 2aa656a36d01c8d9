"""
Post-processing of Riemann runs
-------------------------------

.. autoclass:: KineticRecord
.. autofunction:: extract_middle_state
.. autofunction:: kinetic_sweep
.. autofunction:: mhd_entropy_dissipation
.. autofunction:: shock_speed_estimate
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from typing import Any, List, Optional, Sequence

import numpy as np

from wcdshock.models import RiemannData, cubic_model, hall_mhd_model
from wcdshock.scheme import FieldState, GridSpec, RunConfig, run
from wcdshock.wcd import WcdConfig

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1.0e-3
DEFAULT_MIN_CELLS = 10


class NoPlateauError(ValueError):
    """The field has no resolved constant state besides its end states."""


class AmbiguousShockError(ValueError):
    pass


@dataclass(frozen=True)
class KineticRecord:
    left_state: Any
    middle_state: Any = None
    shock_speed: Optional[float] = None
    phi: Optional[float] = None
    mesh_cells: int = 0
    p: int = 0
    tau: float = 0.0
    #: ``None`` on success, otherwise the reason extraction failed
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


# {{{ middle state


def _values_of(field) -> np.ndarray:
    return np.asarray(field.values if isinstance(field, FieldState) else field, dtype=float)


def extract_middle_state(final, rel_tol: float = DEFAULT_REL_TOL,
                         min_cells: int = DEFAULT_MIN_CELLS) -> float:
    """Value of the most populated interior plateau of a scalar field.

    A plateau is a set of cells whose values fit in a window of width
    ``rel_tol`` times the field's range. Cells within that width of either
    boundary state are discarded so the end states never count. The densest
    window is located by a sliding scan over the sorted values and its
    median is returned.
    """
    u = _values_of(final)
    if u.ndim != 1:
        raise ValueError("extract_middle_state expects a scalar field")

    span = float(np.max(u) - np.min(u))
    if span == 0:
        raise NoPlateauError("no-plateau: constant field")

    width = rel_tol * span
    interior = u[(np.abs(u - u[0]) > width) & (np.abs(u - u[-1]) > width)]
    if interior.size < min_cells:
        raise NoPlateauError(
            f"no-plateau: only {interior.size} cells away from the end states")

    v = np.sort(interior)
    # for each start, count cells inside [v[i], v[i] + width]
    ends = np.searchsorted(v, v + width, side="right")
    counts = ends - np.arange(v.size)
    best = int(np.argmax(counts))
    if counts[best] < min_cells:
        raise NoPlateauError(
            f"no-plateau: densest window holds {counts[best]} < {min_cells} cells")

    return float(np.median(v[best:ends[best]]))


# }}}


# {{{ kinetic sweep


@dataclass(frozen=True)
class SweepConfig:
    """Settings shared by every sample of a kinetic sweep. The domain is
    ``[x_min, x_max]`` with the jump at ``jump_location`` and the final time
    is ``t_scale / max(|u_L|, |u_R|)^2`` so the wave pattern covers the same
    fraction of the domain for every sample."""

    n_cells: int = 2000
    x_min: float = 0.0
    x_max: float = 1.0
    jump_location: float = 0.2
    t_scale: float = 0.4
    wcd: WcdConfig = WcdConfig()
    cfl: float = 0.45
    rel_tol: float = DEFAULT_REL_TOL
    min_cells: int = DEFAULT_MIN_CELLS
    workers: int = 1


def _scalar_sample(args) -> KineticRecord:
    u_l, u_r, delta, cfg = args
    model = cubic_model(delta)
    grid = GridSpec(cfg.x_min, cfg.x_max, cfg.n_cells)
    t_end = cfg.t_scale / max(abs(u_l), abs(u_r)) ** 2
    conf = RunConfig(model=model, grid=grid,
                     initial=RiemannData(u_l, u_r, cfg.jump_location),
                     wcd=cfg.wcd, cfl=cfg.cfl, t_end=t_end)
    common = dict(left_state=float(u_l), mesh_cells=cfg.n_cells, p=cfg.wcd.p,
                  tau=cfg.wcd.tau)
    try:
        result = run(conf)
        u_m = extract_middle_state(result.final, cfg.rel_tol, cfg.min_cells)
    except NoPlateauError as exc:
        return KineticRecord(error=str(exc), **common)
    return KineticRecord(middle_state=u_m, **common)


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order, so output is independent of scheduling
        return list(pool.map(fn, items))


def kinetic_sweep(u_l_values: Sequence[float], u_r: float, delta: float = 1.0,
                  config: Optional[SweepConfig] = None) -> List[KineticRecord]:
    """Run one cubic Riemann problem per left state and extract its middle
    state. Samples without a plateau are recorded with their error."""
    config = config or SweepConfig()
    u_l_values = [float(v) for v in u_l_values]
    if not u_l_values:
        raise ValueError("u_L range: empty")

    items = [(u_l, float(u_r), float(delta), config) for u_l in u_l_values]
    return _map(_scalar_sample, items, config.workers)


# }}}


# {{{ MHD kinetic relation


def mhd_entropy_dissipation(u_minus, u_plus, s: float) -> float:
    """Entropy dissipation ``-s [[|U|^2/2]] + [[3|U|^4/4]]`` of a jump, with
    ``[[g]] = g(u_plus) - g(u_minus)``."""
    r_m = float(np.sum(np.asarray(u_minus, dtype=float) ** 2))
    r_p = float(np.sum(np.asarray(u_plus, dtype=float) ** 2))
    return -s * 0.5 * (r_p - r_m) + 0.75 * (r_p**2 - r_m**2)


def _jump_positions(values: np.ndarray, x: np.ndarray, count: int,
                    separation: int) -> List[float]:
    """Positions of the *count* largest jumps, each at least *separation*
    cells from the others; ties go to the leftmost index. Each position is
    refined to the centroid of the jump magnitudes within half the
    separation of the selected interface."""
    if values.ndim == 1:
        jumps = np.abs(np.diff(values))
    else:
        jumps = np.linalg.norm(np.diff(values, axis=-1), axis=0)
    mid = 0.5 * (x[:-1] + x[1:])

    order = np.lexsort((np.arange(jumps.size), -jumps))
    picked: List[int] = []
    for i in order:
        if jumps[i] == 0:
            break
        if all(abs(i - j) >= separation for j in picked):
            picked.append(int(i))
            if len(picked) == count:
                break
    if len(picked) < count:
        raise AmbiguousShockError(f"found {len(picked)} separated jumps, need {count}")

    h = max(separation // 2, 0)
    out = []
    for i in picked:
        lo, hi = max(i - h, 0), min(i + h + 1, jumps.size)
        w = jumps[lo:hi]
        out.append(float(np.sum(w * mid[lo:hi]) / np.sum(w)))
    return out


def shock_position(field: FieldState, which: str = "leading",
                   separation: int = 10) -> float:
    """Location of the largest jump (``leading``) or the second-largest
    separated jump (``trailing``)."""
    vals = np.asarray(field.values, dtype=float)
    x = field.grid.x
    if which == "leading":
        return _jump_positions(vals, x, 1, separation)[0]
    if which == "trailing":
        return _jump_positions(vals, x, 2, separation)[1]
    raise ValueError(f"which: expected 'leading' or 'trailing', got {which!r}")


def shock_speed_estimate(trajectory: Sequence[FieldState], which: str = "leading",
                         separation: int = 10) -> float:
    """Shock speed from the first and last snapshot of *trajectory*."""
    if len(trajectory) < 2:
        raise ValueError("shock_speed_estimate needs two snapshots")
    a, b = trajectory[0], trajectory[-1]
    if b.time == a.time:
        raise ValueError("shock_speed_estimate needs snapshots at distinct times")

    vals_a = np.asarray(a.values, dtype=float)
    vals_b = np.asarray(b.values, dtype=float)
    if np.array_equal(vals_a, vals_b):
        return 0.0
    xa = shock_position(a, which, separation)
    xb = shock_position(b, which, separation)
    return (xb - xa) / (b.time - a.time)


@dataclass(frozen=True)
class MhdSweepConfig:
    """Sweep over ``r_L``: the field has magnitude ``r_L`` and angle
    ``theta_l`` on the left, magnitude ``ratio * r_L`` and angle ``theta_r``
    on the right. The final time scales like ``1/r_L^2``."""

    n_cells: int = 1000
    x_min: float = 0.0
    x_max: float = 1.0
    jump_location: float = 0.25
    t_scale: float = 0.1
    ratio: float = 0.6
    theta_l: float = 0.3 * math.pi
    theta_r: float = 1.3 * math.pi
    wcd: WcdConfig = WcdConfig(tau=0.1, p=2)
    cfl: float = 0.45
    separation: int = 10
    workers: int = 1


def _mhd_end_states(values: np.ndarray):
    """Outer states of the shock-led wave fan. In these data the
    nonclassical shock carries the whole change of ``|U|`` and is trailed
    only by a dispersive relaxation tail, so the shock connects the two
    boundary states."""
    return values[:, 0].copy(), values[:, -1].copy()


def _mhd_sample(args) -> KineticRecord:
    r_l, alpha, cfg = args
    model = hall_mhd_model(alpha)
    grid = GridSpec(cfg.x_min, cfg.x_max, cfg.n_cells)
    left = (r_l * math.cos(cfg.theta_l), r_l * math.sin(cfg.theta_l))
    r_r = cfg.ratio * r_l
    right = (r_r * math.cos(cfg.theta_r), r_r * math.sin(cfg.theta_r))
    t_end = cfg.t_scale / r_l**2
    conf = RunConfig(model=model, grid=grid,
                     initial=RiemannData(left, right, cfg.jump_location),
                     wcd=cfg.wcd, cfl=cfg.cfl, t_end=t_end,
                     snapshot_times=(0.5 * t_end, t_end))
    common = dict(left_state=float(r_l), mesh_cells=cfg.n_cells, p=cfg.wcd.p,
                  tau=cfg.wcd.tau)
    try:
        result = run(conf)
        s = shock_speed_estimate(result.snapshots, "leading", cfg.separation)
        u_minus, u_plus = _mhd_end_states(result.final.values)
    except (AmbiguousShockError, ValueError) as exc:
        return KineticRecord(error=str(exc), **common)

    phi = mhd_entropy_dissipation(u_minus, u_plus, s)
    return KineticRecord(middle_state=tuple(float(c) for c in u_plus),
                         shock_speed=float(s), phi=float(phi), **common)


def mhd_kinetic_sweep(r_l_values: Sequence[float], alpha: float = 1.0,
                      config: Optional[MhdSweepConfig] = None) -> List[KineticRecord]:
    """Measure the entropy dissipation of the fast shock for each ``r_L``."""
    config = config or MhdSweepConfig()
    r_l_values = [float(r) for r in r_l_values]
    if not r_l_values:
        raise ValueError("r_L range: empty")
    items = [(r, float(alpha), config) for r in r_l_values]
    return _map(_mhd_sample, items, config.workers)


def record_dict(rec: KineticRecord) -> dict:
    return asdict(rec)


# }}}
