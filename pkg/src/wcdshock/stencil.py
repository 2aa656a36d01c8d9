"""
Centered finite-difference stencils and equivalent-equation tail sums
---------------------------------------------------------------------

.. autoclass:: StencilSet
.. autoclass:: SeriesBounds
.. autofunction:: solve_order_conditions
.. autofunction:: build_stencil_set
.. autofunction:: tail_sums
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

DEFAULT_TAIL_TOL = 1.0e-14


class StencilError(ValueError):
    pass


# {{{ order conditions


def _solve_exact(p: int, d: int) -> Tuple[Fraction, ...]:
    """Gauss-Jordan on the (2p+1)x(2p+1) moment system in rational arithmetic."""
    n = 2 * p + 1
    nodes = range(-p, p + 1)
    rhs = Fraction(math.factorial(d))
    rows = [
        [Fraction(j) ** l for j in nodes] + [rhs if l == d else Fraction(0)]
        for l in range(n)
    ]

    for col in range(n):
        piv = next(r for r in range(col, n) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [a * inv for a in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]

    return tuple(row[n] for row in rows)


_cache_lock = threading.RLock()


@lru_cache(maxsize=None)
def _exact_weights_cached(p: int, d: int) -> Tuple[Fraction, ...]:
    return _solve_exact(p, d)


def exact_weights(p: int, d: int) -> Tuple[Fraction, ...]:
    """Rational weights :math:`w_j`, :math:`j=-p..p`, with
    :math:`\\sum_j j^l w_j = d!\\,\\delta_{ld}` for :math:`0 \\le l \\le 2p`."""
    if not isinstance(p, (int, np.integer)) or p < 1:
        raise StencilError(f"stencil half-width must be a positive integer, got p={p!r}")
    if d not in (1, 2, 3):
        raise StencilError(f"derivative order must be 1, 2 or 3, got d={d!r}")
    if d == 3 and p == 1:
        raise StencilError(
            "third-derivative stencil needs p >= 2: with p = 1 the conditions "
            "sum_j j^l w_j = 0 for l = 0, 1, 2 force w = 0, which cannot give "
            "sum_j j^3 w_j = 6"
        )

    with _cache_lock:
        return _exact_weights_cached(int(p), int(d))


def solve_order_conditions(p: int, d: int) -> np.ndarray:
    """Return the ``2p+1`` float weights for the ``d``-th derivative, indexed
    ``j = -p..p``."""
    return np.array([float(w) for w in exact_weights(p, d)])


# }}}


# {{{ stencil set


@dataclass(frozen=True)
class StencilSet:
    """Weights for the flux (``alpha``), diffusion (``beta``) and dispersion
    (``gamma``) sums of the scheme. ``gamma`` is ``None`` for ``p = 1``."""

    p: int
    alpha: np.ndarray
    beta: np.ndarray
    gamma: Optional[np.ndarray]

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.p, self.p + 1)

    @property
    def order(self) -> int:
        return 2 * self.p

    def weights(self, d: int) -> np.ndarray:
        w = {1: self.alpha, 2: self.beta, 3: self.gamma}[d]
        if w is None:
            raise StencilError(f"no derivative-{d} weights for p={self.p}")
        return w


@lru_cache(maxsize=None)
def _build_stencil_set(p: int, need_dispersion: bool) -> StencilSet:
    if need_dispersion and p < 2:
        raise StencilError("dispersion requires p >= 2")

    alpha = solve_order_conditions(p, 1)
    beta = solve_order_conditions(p, 2)
    gamma = solve_order_conditions(p, 3) if p >= 2 else None
    for w in (alpha, beta, gamma):
        if w is not None:
            w.setflags(write=False)

    return StencilSet(p=p, alpha=alpha, beta=beta, gamma=gamma)


def build_stencil_set(p: int, *, need_dispersion: bool = False) -> StencilSet:
    # validates p through exact_weights
    exact_weights(p, 1)
    with _cache_lock:
        return _build_stencil_set(int(p), bool(need_dispersion))


# }}}


# {{{ tail sums


@dataclass(frozen=True)
class SeriesBounds:
    """Absolute tail sums of the equivalent-equation remainder coefficients.

    .. attribute:: s_f_hat
    .. attribute:: s_d_hat
    .. attribute:: s_c_hat

        ``nan`` when the stencil set has no dispersion weights.

    .. attribute:: k_truncation

        Last power ``k`` included in the sums.

    .. attribute:: remainder_bound

        Upper bound on the contribution of all powers ``k > k_truncation``.
    """

    p: int
    s_f_hat: float
    s_d_hat: float
    s_c_hat: float
    k_truncation: int
    remainder_bound: float

    @classmethod
    def limiting(cls) -> "SeriesBounds":
        """The ``p -> infinity`` limit where all tail sums vanish."""
        return cls(p=0, s_f_hat=0.0, s_d_hat=0.0, s_c_hat=0.0,
                   k_truncation=0, remainder_bound=0.0)


def _exp_tail(p: int, kmax: int) -> float:
    # sum_{k > kmax} p^k / k!, bounded geometrically once kmax + 2 > p
    first = Fraction(p) ** (kmax + 1) / math.factorial(kmax + 1)
    ratio = Fraction(p, kmax + 2)
    return float(first / (1 - ratio))


def _tail_sum_exact(weights: Sequence[Fraction], p: int, kmax: int) -> Fraction:
    total = Fraction(0)
    for k in range(2 * p + 1, kmax + 1):
        moment = sum(w * j**k for w, j in zip(weights, range(-p, p + 1)))
        total += abs(moment) / math.factorial(k)
    return total


@lru_cache(maxsize=None)
def _tail_sums(p: int, tol_tail: float) -> SeriesBounds:
    families = [exact_weights(p, d) for d in ((1, 2, 3) if p >= 2 else (1, 2))]
    wmax = max(float(sum(abs(w) for w in fam)) for fam in families)

    kmax = 2 * p
    while True:
        kmax += 1
        if kmax + 2 <= p:
            continue
        bound = wmax * _exp_tail(p, kmax)
        if bound < tol_tail:
            break

    sums = [float(_tail_sum_exact(fam, p, kmax)) for fam in families]
    s_c = sums[2] if len(sums) == 3 else math.nan

    return SeriesBounds(p=p, s_f_hat=sums[0], s_d_hat=sums[1], s_c_hat=s_c,
                        k_truncation=kmax, remainder_bound=bound)


def tail_sums(stencil: StencilSet, tol_tail: float = DEFAULT_TAIL_TOL) -> SeriesBounds:
    r"""Compute :math:`\hat S^f_p, \hat S^D_p, \hat S^C_p`, i.e.

    .. math::

        \hat S_p = \sum_{k \ge 2p+1} \Big| \sum_{j=-p}^{p} \frac{w_j j^k}{k!} \Big|

    for the three weight families. The moments are formed exactly from the
    rational weights; summation stops once
    :math:`(\sum_j |w_j|) \sum_{k>K} p^k/k!` drops below *tol_tail*.
    """
    if not tol_tail > 0:
        raise StencilError(f"tail tolerance must be positive, got {tol_tail!r}")

    with _cache_lock:
        return _tail_sums(stencil.p, float(tol_tail))


# }}}


def dump_csv_rows(p: int, tol_tail: float = DEFAULT_TAIL_TOL):
    """Rows for ``stencil dump``: one per offset, then the tail sums."""
    st = build_stencil_set(p)
    bounds = tail_sums(st, tol_tail)
    rows = [["j", "alpha", "beta", "gamma"]]
    for i, j in enumerate(st.offsets):
        g = st.gamma[i] if st.gamma is not None else ""
        rows.append([int(j), st.alpha[i], st.beta[i], g])
    rows.append([])
    rows.append(["quantity", "value"])
    rows.append(["s_f_hat", bounds.s_f_hat])
    rows.append(["s_d_hat", bounds.s_d_hat])
    rows.append(["s_c_hat", bounds.s_c_hat])
    rows.append(["k_truncation", bounds.k_truncation])
    rows.append(["remainder_bound", bounds.remainder_bound])
    return rows
