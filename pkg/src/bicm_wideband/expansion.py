"""Low-SNR expansion ``C(snr) = c1*snr + c2*snr**2 + o(snr**2)`` and wideband figures.

Capacities are in nats; the wideband slope is reported in bits per channel
use per unit of linear Eb/N0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .capacity import AWGN, CapacityValue, ChannelModel
from .constellation import Constellation, LabeledConstellation, moments, subconstellation
from .errors import InvalidArgumentError

LOG2 = math.log(2.0)
ZERO_MOMENT_TOL = 1e-9

DEFAULT_FIT_GRID = tuple(np.geomspace(1e-3, 3e-2, 8))


@dataclass(frozen=True)
class ExpansionCoeffs:
    c1: float
    c2: float
    channel: ChannelModel = AWGN


@dataclass(frozen=True)
class WidebandFigures:
    """Eb/N0 at zero rate and the linear-scale wideband slope.

    ``slope_zeta0`` is ``None`` when ``c2 == 0``: the slope is unbounded.
    """

    ebno_lim_linear: float
    ebno_lim_db: float
    slope_zeta0: float | None

    @property
    def unbounded_slope(self) -> bool:
        return self.slope_zeta0 is None


def _cm_from_moments(mu1: complex, mu2: float, mu2p: complex) -> tuple[float, float]:
    var = mu2 - abs(mu1) ** 2
    return var, -0.5 * (var**2 + abs(mu2p - mu1**2) ** 2)


def cm_coeffs(c: Constellation | LabeledConstellation) -> ExpansionCoeffs:
    """Coefficients of the coded-modulation capacity for arbitrary moments."""
    mo = moments(c)
    c1, c2 = _cm_from_moments(mo.mu1, mo.mu2, mo.mu2_pseudo)
    return ExpansionCoeffs(c1, c2, AWGN)


def bicm_coeffs(lc: LabeledConstellation) -> ExpansionCoeffs:
    """Coefficients of the BICM capacity of a zero-mean, unit-energy labeling."""
    mo = moments(lc)
    if abs(mo.mu1) > ZERO_MOMENT_TOL or abs(mo.mu2 - 1.0) > ZERO_MOMENT_TOL:
        raise InvalidArgumentError(
            f"BICM coefficients need zero mean and unit energy "
            f"(got mu1={mo.mu1:.3g}, mu2={mo.mu2:.12g})")
    ref = 1.0 + abs(mo.mu2_pseudo) ** 2
    c1 = 0.0
    c2 = 0.0
    for i in range(1, lc.m + 1):
        for b in (0, 1):
            sub = moments(subconstellation(lc, i, b))
            var = sub.mu2 - abs(sub.mu1) ** 2
            c1 += 0.5 * abs(sub.mu1) ** 2
            c2 += 0.25 * (var**2 - ref + abs(sub.mu2_pseudo - sub.mu1**2) ** 2)
    return ExpansionCoeffs(c1, c2, AWGN)


def gray_c1(M: int, family: str = "pam") -> tuple[float, float]:
    """First-order coefficient and zero-rate Eb/N0 of Gray-labeled PAM/QAM.

    ``M`` is the PAM size; ``family="qam"`` refers to the M**2-QAM built from
    two such axes, which has the same value.
    """
    if family not in ("pam", "qam"):
        raise InvalidArgumentError(f"family must be 'pam' or 'qam', got {family!r}")
    if M < 2 or M & (M - 1):
        raise InvalidArgumentError(f"M must be a power of two >= 2, got {M}")
    c1 = 3.0 * M * M / (4.0 * (M * M - 1))
    return c1, 4.0 * (M * M - 1) * LOG2 / (3.0 * M * M)


def apply_fading(coeffs: ExpansionCoeffs, nu: float) -> ExpansionCoeffs:
    """Scale AWGN coefficients to Nakagami-``nu`` fading (``E[chi]=1``)."""
    if coeffs.channel.nu is not None:
        raise InvalidArgumentError("coefficients already include fading")
    ch = ChannelModel.nakagami(nu) if math.isfinite(nu) else AWGN
    return ExpansionCoeffs(coeffs.c1, ch.chi_second_moment * coeffs.c2, ch)


def wideband_figures(coeffs: ExpansionCoeffs) -> WidebandFigures:
    if not coeffs.c1 > 0:
        raise InvalidArgumentError(f"wideband figures need c1 > 0, got {coeffs.c1}")
    lim = LOG2 / coeffs.c1
    slope = None if coeffs.c2 == 0 else -coeffs.c1**3 / (coeffs.c2 * LOG2**2)
    return WidebandFigures(lim, 10.0 * math.log10(lim), slope)


def capacity_series(coeffs: ExpansionCoeffs, snr):
    """Truncated series ``c1*snr + c2*snr**2`` in nats (scalar or array)."""
    return coeffs.c1 * snr + coeffs.c2 * np.square(snr)


def linear_ebno_approx(coeffs: ExpansionCoeffs, ebno_linear):
    """Capacity in bits per channel use, linear in Eb/N0 around the zero-rate limit.

    Can be negative below the limit; callers clamp for display.
    """
    if np.any(np.asarray(ebno_linear) <= 0):
        raise InvalidArgumentError("Eb/N0 must be positive")
    fig = wideband_figures(coeffs)
    if fig.unbounded_slope:
        raise InvalidArgumentError("slope is unbounded (c2 = 0)")
    return fig.slope_zeta0 * (np.asarray(ebno_linear, dtype=float) - fig.ebno_lim_linear)


def _raw_value(v) -> float:
    if isinstance(v, CapacityValue) and v.raw is not None:
        return float(v.raw)
    return float(v)


def fit_coeffs_numeric(capacity_fn: Callable[[float], float | CapacityValue],
                       snr_grid: Sequence[float] = DEFAULT_FIT_GRID,
                       channel: ChannelModel = AWGN) -> ExpansionCoeffs:
    """Least-squares estimate of ``(c1, c2)`` from capacity samples near zero.

    Cubic and quartic terms are fitted alongside and discarded so that
    higher-order curvature does not leak into ``c2``; under strong fading the
    higher coefficients grow with the moments of ``chi``.
    """
    s = np.asarray(snr_grid, dtype=float)
    if s.ndim != 1 or s.size < 4:
        raise InvalidArgumentError("fit grid needs at least 4 points")
    if np.any(s <= 0) or np.any(s > 0.05):
        raise InvalidArgumentError("fit grid points must lie in (0, 0.05]")
    if np.unique(s).size != s.size:
        raise InvalidArgumentError("fit grid points must be distinct")
    y = np.array([_raw_value(capacity_fn(v)) for v in s])
    # solve in scaled variables for conditioning
    scale = s.max()
    u = s / scale
    A = np.column_stack([u, u**2, u**3, u**4])
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    return ExpansionCoeffs(float(sol[0] / scale), float(sol[1] / scale**2), channel)
