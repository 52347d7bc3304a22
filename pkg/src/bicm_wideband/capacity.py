"""Coded-modulation and BICM capacities of finite constellations.

Channel: ``y = h * sqrt(snr) * x + z`` with ``z ~ CN(0, 1)`` and the fading
coefficient known at the receiver. Only ``chi = |h|**2`` matters, so fading
is averaged over the gamma law of ``chi`` (Nakagami-nu, unit mean).

Expectations are taken either by product Gauss-Hermite quadrature over the
noise (plus Gauss-Laguerre over ``chi``) or by Monte Carlo. All values are in
nats per channel use.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import logsumexp

from .constellation import Constellation, LabeledConstellation, subconstellation
from .errors import InvalidArgumentError

MC_CHUNK = 8192


# --------------------------------------------------------------------------
# channel and evaluation settings


@dataclass(frozen=True)
class ChannelModel:
    """AWGN (``nu is None``) or fully interleaved Nakagami-``nu`` fading."""

    nu: float | None = None

    def __post_init__(self):
        if self.nu is not None and not (self.nu > 0 and math.isfinite(self.nu)):
            raise InvalidArgumentError(f"Nakagami parameter must be positive, got {self.nu}")

    @classmethod
    def awgn(cls) -> ChannelModel:
        return cls(None)

    @classmethod
    def nakagami(cls, nu: float) -> ChannelModel:
        return cls(float(nu))

    @classmethod
    def parse(cls, text: str) -> ChannelModel:
        """Parse ``awgn`` or ``nakagami:<nu>``."""
        if text == "awgn":
            return cls.awgn()
        kind, _, arg = text.partition(":")
        if kind == "nakagami" and arg:
            try:
                return cls.nakagami(float(arg))
            except ValueError:
                pass
        raise InvalidArgumentError(f"bad channel spec {text!r}; use awgn or nakagami:<nu>")

    @property
    def kind(self) -> str:
        return "awgn" if self.nu is None else "nakagami"

    @property
    def chi_second_moment(self) -> float:
        """``E[chi**2]``; 1 for AWGN."""
        return 1.0 if self.nu is None else 1.0 + 1.0 / self.nu

    def __str__(self) -> str:
        return "awgn" if self.nu is None else f"nakagami:{self.nu:g}"


AWGN = ChannelModel.awgn()


@dataclass(frozen=True)
class Quadrature:
    order: int = 32
    fading_order: int = 64

    def __post_init__(self):
        if self.order < 4 or self.fading_order < 4:
            raise InvalidArgumentError("quadrature order must be >= 4")


@dataclass(frozen=True)
class MonteCarlo:
    """Monte Carlo settings.

    Samples are drawn in fixed-size chunks; chunk ``k`` uses a generator keyed
    by ``(seed, *stream, k)``, so results do not depend on ``workers``.
    """

    samples: int
    seed: int = 0
    stream: tuple[int, ...] = ()
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1000:
            raise InvalidArgumentError("Monte Carlo needs at least 1000 samples")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise InvalidArgumentError("workers must be >= 1")

    def substream(self, *key: int) -> MonteCarlo:
        return MonteCarlo(self.samples, self.seed, self.stream + key, self.workers)


EvalMethod = Union[Quadrature, MonteCarlo]


def parse_method(text: str, seed: int = 0) -> EvalMethod:
    """Parse ``quad:<order>`` or ``mc:<samples>``."""
    kind, _, arg = text.partition(":")
    try:
        if kind == "quad":
            return Quadrature(int(arg)) if arg else Quadrature()
        if kind == "mc" and arg:
            return MonteCarlo(int(float(arg)), seed)
    except ValueError as exc:
        raise InvalidArgumentError(f"bad method spec {text!r}: {exc}") from exc
    raise InvalidArgumentError(f"bad method spec {text!r}; use quad:<order> or mc:<samples>")


@dataclass(frozen=True)
class CapacityValue:
    """Capacity in nats; ``raw`` is the unclamped estimate."""

    nats: float
    std_error: float = 0.0
    raw: float | None = None

    @property
    def bits(self) -> float:
        return self.nats * math.log2(math.e)

    def __float__(self) -> float:
        return self.nats


# --------------------------------------------------------------------------
# quadrature rules


@lru_cache(maxsize=None)
def complex_gauss_hermite(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``E[f(Z)]``, ``Z ~ CN(0, 1)``; weights sum to 1."""
    t, w = np.polynomial.hermite.hermgauss(order)
    z = (t[:, None] + 1j * t[None, :]).ravel()
    wz = (w[:, None] * w[None, :]).ravel() / np.pi
    z.setflags(write=False)
    wz.setflags(write=False)
    return z, wz


@lru_cache(maxsize=None)
def gamma_quadrature(nu: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule for ``E[f(chi)]`` with ``chi ~ Gamma(nu, 1/nu)``.

    Golub-Welsch on the scaled generalized-Laguerre Jacobi matrix, which stays
    finite for large ``nu`` where tabulated weights overflow.
    """
    k = np.arange(order, dtype=float)
    diag = (2 * k + nu) / nu
    off = np.sqrt(k[1:] * (k[1:] + nu - 1)) / nu
    nodes, vecs = eigh_tridiagonal(diag, off)
    weights = vecs[0] ** 2
    weights /= weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _fading_rule(channel: ChannelModel, method: Quadrature) -> tuple[np.ndarray, np.ndarray]:
    if channel.nu is None:
        return np.ones(1), np.ones(1)
    return gamma_quadrature(channel.nu, method.fading_order)


def _clamp(raw: float, M: int) -> float:
    return float(min(max(raw, 0.0), math.log(M)))


def _check_snr(snr: float) -> float:
    snr = float(snr)
    if not snr >= 0 or not math.isfinite(snr):
        raise InvalidArgumentError(f"snr must be a nonnegative finite number, got {snr}")
    return snr


def _log_metrics(x, points, amp, z):
    """``-|amp*(x - x') + z|**2 + |z|**2`` over broadcast ``amp``/``z`` and ``x'``."""
    d = amp[..., None] * (x - points) + z[..., None]
    return np.abs(z[..., None]) ** 2 - np.abs(d) ** 2


# --------------------------------------------------------------------------
# Monte Carlo plumbing


def _chunk_rng(method: MonteCarlo, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(method.seed, spawn_key=(*method.stream, chunk))
    return np.random.Generator(np.random.Philox(ss))


def _draw(rng, n, probs, snr, channel):
    idx = rng.choice(probs.size, size=n, p=probs)
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
    if channel.nu is None:
        chi = np.ones(n)
    else:
        chi = rng.gamma(channel.nu, 1.0 / channel.nu, size=n)
    return idx, z, np.sqrt(chi * snr)


def _mc_mean(sample_fn, method: MonteCarlo) -> tuple[float, float]:
    """Mean and standard error of per-sample values produced chunk by chunk."""
    sizes = [MC_CHUNK] * (method.samples // MC_CHUNK)
    if method.samples % MC_CHUNK:
        sizes.append(method.samples % MC_CHUNK)

    def run(k):
        vals = sample_fn(_chunk_rng(method, k), sizes[k])
        return float(vals.sum()), float((vals**2).sum())

    if method.workers > 1:
        with ThreadPoolExecutor(method.workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    n = method.samples
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1)
    return mean, math.sqrt(var / n)


# --------------------------------------------------------------------------
# capacities


def _cm_raw(c: Constellation, snr: float, channel: ChannelModel, method: EvalMethod):
    pts, probs = c.points, c.probs
    logp = np.log(probs)
    if isinstance(method, Quadrature):
        z, wz = complex_gauss_hermite(method.order)
        chi, wc = _fading_rule(channel, method)
        amp = np.sqrt(chi * snr)[:, None] * np.ones_like(z.real)[None, :]
        zz = np.broadcast_to(z, amp.shape)
        w2 = wc[:, None] * wz[None, :]
        total = 0.0
        for x, px in zip(pts, probs):
            lse = logsumexp(logp + _log_metrics(x, pts, amp, zz), axis=-1)
            total -= float(px) * float(np.sum(w2 * lse))
        return total, 0.0

    def sample(rng, n):
        idx, z, amp = _draw(rng, n, probs, snr, channel)
        d = amp[:, None] * (pts[idx][:, None] - pts[None, :]) + z[:, None]
        metric = logp[None, :] + np.abs(z[:, None]) ** 2 - np.abs(d) ** 2
        return -logsumexp(metric, axis=1)

    return _mc_mean(sample, method)


def cm_capacity(c: Constellation | LabeledConstellation, snr: float,
                channel: ChannelModel = AWGN, method: EvalMethod = Quadrature()) -> CapacityValue:
    """Mutual information between the constellation input and the channel output."""
    snr = _check_snr(snr)
    if isinstance(c, LabeledConstellation):
        c = c.base
    raw, se = _cm_raw(c, snr, channel, method)
    return CapacityValue(_clamp(raw, len(c)), se, float(raw))


def bicm_capacity(lc: LabeledConstellation, snr: float,
                  channel: ChannelModel = AWGN, method: EvalMethod = Quadrature()) -> CapacityValue:
    """BICM capacity as a sum over bit positions of CM-capacity differences.

    Each half-constellation keeps its own (generally nonzero) mean and
    non-unit energy. With Monte Carlo every term uses its own substream and
    standard errors add in quadrature.
    """
    snr = _check_snr(snr)

    def sub_method(k):
        return method.substream(k) if isinstance(method, MonteCarlo) else method

    full, se_full = _cm_raw(lc.base, snr, channel, sub_method(0))
    raw = 0.0
    var = 0.0
    k = 1
    for i in range(1, lc.m + 1):
        for b in (0, 1):
            sub, se = _cm_raw(subconstellation(lc, i, b), snr, channel, sub_method(k))
            raw += 0.5 * (full - sub)
            var += (0.5 * se) ** 2
            k += 1
    var += (lc.m * se_full) ** 2
    return CapacityValue(_clamp(raw, len(lc)), math.sqrt(var), raw)


def bicm_capacity_direct(lc: LabeledConstellation, snr: float,
                         channel: ChannelModel = AWGN, method: EvalMethod = Quadrature()) -> CapacityValue:
    """BICM capacity as the sum of per-bit mutual informations ``I(B_i; Y)``."""
    snr = _check_snr(snr)
    pts = lc.points
    M = len(lc)
    bits = lc.bit_matrix()
    masks = [[bits[:, i] == b for b in (0, 1)] for i in range(lc.m)]
    log_half = math.log(2.0 / M)
    log_full = -math.log(M)

    def per_symbol(metric, n):
        lse_all = logsumexp(metric, axis=-1) + log_full
        out = 0.0
        for i in range(lc.m):
            sub = metric[..., masks[i][bits[n, i]]]
            out = out + logsumexp(sub, axis=-1) + log_half - lse_all
        return out

    if isinstance(method, Quadrature):
        z, wz = complex_gauss_hermite(method.order)
        chi, wc = _fading_rule(channel, method)
        amp = np.sqrt(chi * snr)[:, None] * np.ones_like(z.real)[None, :]
        zz = np.broadcast_to(z, amp.shape)
        w2 = wc[:, None] * wz[None, :]
        raw = 0.0
        for n, x in enumerate(pts):
            raw += float(np.sum(w2 * per_symbol(_log_metrics(x, pts, amp, zz), n))) / M
        return CapacityValue(_clamp(raw, M), 0.0, raw)

    def sample(rng, n):
        idx, z, amp = _draw(rng, n, lc.probs, snr, channel)
        d = amp[:, None] * (pts[idx][:, None] - pts[None, :]) + z[:, None]
        metric = np.abs(z[:, None]) ** 2 - np.abs(d) ** 2
        lse_all = logsumexp(metric, axis=1) + log_full
        vals = np.zeros(n)
        for i in range(lc.m):
            for b in (0, 1):
                rows = bits[idx, i] == b
                sub = metric[np.ix_(rows, masks[i][b])]
                vals[rows] += logsumexp(sub, axis=1) + log_half - lse_all[rows]
        return vals

    raw, se = _mc_mean(sample, method)
    return CapacityValue(_clamp(raw, M), se, raw)


def gaussian_reference(snr: float) -> CapacityValue:
    """Capacity ``log(1 + snr)`` of the Gaussian-input channel."""
    snr = _check_snr(snr)
    v = math.log1p(snr)
    return CapacityValue(v, 0.0, v)
