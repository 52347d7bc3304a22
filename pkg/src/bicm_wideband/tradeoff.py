"""Power-bandwidth trade-off between two schemes at equal bit rate.

Scheme 1 runs at power P1, bandwidth W1 and ``snr1 = P1/(N0 W1)``; scheme 2
at ``P2 = dP*P1`` and ``W2 = dW*W1``. Equal rate means
``W1*C1(snr1) = W2*C2(snr1*dP/dW)``. All ratios are linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .capacity import CapacityValue
from .errors import DivergedError, InvalidArgumentError, NoSolutionError
from .expansion import ExpansionCoeffs

BRACKET = (1e-6, 1e6)


@dataclass(frozen=True)
class TradeoffQuery:
    coeffs1: ExpansionCoeffs
    coeffs2: ExpansionCoeffs
    snr1: float

    def __post_init__(self):
        if not self.snr1 > 0:
            raise InvalidArgumentError(f"snr1 must be positive, got {self.snr1}")

    @property
    def divergence_delta_p(self) -> float:
        """Power ratio at which the approximate bandwidth ratio blows up."""
        return (self.coeffs1.c1 + self.coeffs1.c2 * self.snr1) / self.coeffs2.c1


@dataclass(frozen=True)
class TradeoffPoint:
    delta_p: float
    delta_w: float


def delta_w_approx(q: TradeoffQuery, delta_p: float) -> float:
    """Bandwidth ratio from the second-order expansions of both capacities.

    Raises :class:`DivergedError` when no finite positive ratio exists, i.e.
    ``delta_p`` is at or on the wrong side of ``q.divergence_delta_p``.
    """
    if not delta_p > 0:
        raise InvalidArgumentError(f"delta_p must be positive, got {delta_p}")
    num = q.coeffs2.c2 * q.snr1 * delta_p**2
    den = q.coeffs1.c1 + q.coeffs1.c2 * q.snr1 - q.coeffs2.c1 * delta_p
    if den == 0 or num == 0:
        raise DivergedError(f"trade-off diverges at delta_p={delta_p:g}")
    dw = num / den
    if not dw > 0 or not math.isfinite(dw):
        raise DivergedError(
            f"no positive bandwidth ratio at delta_p={delta_p:g} "
            f"(divergence at {q.divergence_delta_p:g})")
    return dw


def delta_p_approx(q: TradeoffQuery, delta_w: float) -> float:
    """Power ratio to first order in ``snr1`` for a given bandwidth ratio."""
    c11, c21 = q.coeffs1.c1, q.coeffs1.c2
    c12, c22 = q.coeffs2.c1, q.coeffs2.c2
    if c12 == 0:
        raise InvalidArgumentError("scheme 2 has c1 = 0")
    if not delta_w > 0:
        raise InvalidArgumentError(f"delta_w must be positive, got {delta_w}")
    return c11 / c12 + (c21 / c12 - c22 * c11**2 / (c12**3 * delta_w)) * q.snr1


def delta_p_exact_quadratic(q: TradeoffQuery, delta_w: float) -> float:
    """Exact inverse of :func:`delta_w_approx`.

    Root of ``a dP**2 + c12 dW dP - b dW = 0`` with ``a = c22 snr1`` and
    ``b = c11 + c21 snr1``, taking the branch that tends to ``b/c12`` as
    ``a -> 0``. Written without the ``1/a`` factor so small ``a`` is stable.
    """
    if not delta_w > 0:
        raise InvalidArgumentError(f"delta_w must be positive, got {delta_w}")
    a = q.coeffs2.c2 * q.snr1
    b = q.coeffs1.c1 + q.coeffs1.c2 * q.snr1
    B = q.coeffs2.c1 * delta_w
    disc = B * B + 4.0 * a * b * delta_w
    if disc < 0:
        raise NoSolutionError(f"no real power ratio for delta_w={delta_w:g}")
    den = B + math.sqrt(disc)
    if den == 0:
        raise NoSolutionError("degenerate quadratic")
    dp = 2.0 * b * delta_w / den
    if not dp > 0:
        raise NoSolutionError(f"no positive power ratio for delta_w={delta_w:g}")
    return dp


def _nats(v) -> float:
    if isinstance(v, CapacityValue):
        return v.nats
    return float(v)


def exact_tradeoff(cap1: Callable[[float], float | CapacityValue],
                   cap2: Callable[[float], float | CapacityValue],
                   snr1: float, delta_p: float, rtol: float = 1e-8) -> float:
    """Bandwidth ratio solving ``dW * C2(snr1*dP/dW) = C1(snr1)`` exactly.

    ``dW * C2(s/dW)`` grows with ``dW`` for concave capacities, so the root is
    found by bisection on ``log dW`` inside ``BRACKET``. If an interior
    evaluation contradicts monotonicity, the current bracket is rescanned on
    a grid and bisection restarts on the first sign change.
    """
    if not snr1 > 0 or not delta_p > 0:
        raise InvalidArgumentError("snr1 and delta_p must be positive")
    target = _nats(cap1(snr1))

    def f(log_dw: float) -> float:
        dw = math.exp(log_dw)
        return dw * _nats(cap2(snr1 * delta_p / dw)) - target

    lo, hi = math.log(BRACKET[0]), math.log(BRACKET[1])
    flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise NoSolutionError(
            f"rate C1(snr1) unattainable for delta_p={delta_p:g} with delta_w in {BRACKET}")
    while hi - lo > rtol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if not flo <= fm <= fhi:
            lo, hi, flo, fhi = _rescan(f, lo, hi)
            continue
        if fm < 0:
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return math.exp(0.5 * (lo + hi))


def _rescan(f, lo, hi, n=64):
    grid = np.linspace(lo, hi, n)
    vals = [f(g) for g in grid]
    for k in range(n - 1):
        if vals[k] <= 0 <= vals[k + 1]:
            return grid[k], grid[k + 1], vals[k], vals[k + 1]
    raise NoSolutionError("no sign change found while rescanning the bracket")


def nakagami_penalty(coeffs: ExpansionCoeffs, nu: float, snr: float,
                     mode: str = "fix_power") -> TradeoffPoint:
    """Cost of Nakagami-``nu`` fading relative to the unfaded channel.

    With power fixed the bandwidth grows by ``1 + 1/nu``; with bandwidth
    fixed the power grows by ``1 - (c2/nu)*snr``.
    """
    if not nu > 0:
        raise InvalidArgumentError(f"Nakagami parameter must be positive, got {nu}")
    if coeffs.channel.nu is not None:
        raise InvalidArgumentError("coefficients must describe the unfaded channel")
    if abs(coeffs.c1 - 1.0) > 1e-9:
        raise InvalidArgumentError(f"expected c1 = 1, got {coeffs.c1}")
    if mode == "fix_power":
        return TradeoffPoint(1.0, 1.0 + 1.0 / nu)
    if mode == "fix_bandwidth":
        return TradeoffPoint(1.0 - coeffs.c2 / nu * snr, 1.0)
    raise InvalidArgumentError(f"mode must be fix_power or fix_bandwidth, got {mode!r}")
