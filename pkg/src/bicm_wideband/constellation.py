"""Finite complex signal constellations, binary labelings and their moments.

A :class:`Constellation` is an immutable set of complex points with a
probability mass function. A :class:`LabeledConstellation` adds a bijective
m-bit labeling over 2**m equiprobable points; bit positions are numbered
1..m from the left of each label string.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError

MERGE_TOL = 1e-12
PROB_TOL = 1e-12

LABELINGS = ("gray", "set_partitioning", "anti_gray")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _log2_exact(M: int, what: str = "M") -> int:
    if not isinstance(M, (int, np.integer)) or M < 2 or M & (M - 1):
        raise InvalidArgumentError(f"{what} must be a power of two >= 2, got {M!r}")
    return int(M).bit_length() - 1


def gray_code(k: int) -> int:
    """Binary-reflected Gray code of ``k``."""
    return k ^ (k >> 1)


def _bits(value: int, m: int) -> str:
    return format(value, f"0{m}b")


@dataclass(frozen=True, eq=False)
class Constellation:
    """Complex points with probabilities.

    Coincident points (closer than ``MERGE_TOL``) are merged at construction
    and their probabilities summed. Probabilities default to uniform.
    """

    points: np.ndarray
    probs: np.ndarray

    def __init__(self, points: Iterable[complex], probs: Iterable[float] | None = None):
        pts = np.asarray(list(points) if not isinstance(points, np.ndarray) else points,
                         dtype=complex).ravel()
        if pts.size == 0:
            raise InvalidArgumentError("constellation must have at least one point")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("constellation points must be finite")
        if probs is None:
            p = np.full(pts.size, 1.0 / pts.size)
        else:
            p = np.asarray(list(probs) if not isinstance(probs, np.ndarray) else probs,
                           dtype=float).ravel()
            if p.size != pts.size:
                raise InvalidArgumentError(
                    f"points and probs differ in length ({pts.size} vs {p.size})")
            if not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
                raise InvalidArgumentError("probabilities must lie in [0, 1]")
            if abs(p.sum() - 1.0) > PROB_TOL:
                raise InvalidArgumentError(
                    f"probabilities must sum to 1 (got {p.sum():.15g})")
        pts, p = _merge_duplicates(pts, p)
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "probs", _readonly(p))

    def __len__(self) -> int:
        return self.points.size

    def __repr__(self) -> str:
        return f"Constellation(M={len(self)})"

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.probs, 1.0 / len(self), rtol=0, atol=PROB_TOL))

    def scaled(self, factor: complex) -> Constellation:
        """Multiply every point by ``factor`` (a scale and/or rotation)."""
        return Constellation(self.points * factor, self.probs)

    def rotated(self, theta: float) -> Constellation:
        return self.scaled(np.exp(1j * theta))

    def normalized(self, center: bool = False) -> Constellation:
        """Rescale to unit average energy, optionally removing the mean first."""
        pts = self.points - (self.probs @ self.points if center else 0)
        energy = float(self.probs @ np.abs(pts) ** 2)
        if energy <= 0:
            raise InvalidArgumentError("cannot normalize a zero-energy constellation")
        return Constellation(pts / math.sqrt(energy), self.probs)


def _merge_duplicates(pts: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keep_pts: list[complex] = []
    keep_p: list[float] = []
    for x, px in zip(pts, p):
        for n, y in enumerate(keep_pts):
            if abs(x - y) <= MERGE_TOL:
                keep_p[n] += px
                break
        else:
            keep_pts.append(x)
            keep_p.append(px)
    return np.array(keep_pts, dtype=complex), np.array(keep_p, dtype=float)


@dataclass(frozen=True, eq=False)
class LabeledConstellation:
    """Equiprobable constellation of size 2**m with a bijective bit labeling."""

    base: Constellation
    m: int
    labels: tuple[str, ...]

    def __init__(self, points: Iterable[complex], labels: Sequence[str | int], m: int | None = None):
        pts = np.asarray(list(points) if not isinstance(points, np.ndarray) else points,
                         dtype=complex).ravel()
        base = Constellation(pts)
        M = len(base)
        if pts.size != M:
            raise InvalidArgumentError("labeled constellation has coincident points")
        mm = _log2_exact(M, "constellation size")
        if m is not None and m != mm:
            raise InvalidArgumentError(f"m={m} does not match 2**m = {M} points")
        labs = tuple(_bits(l, mm) if isinstance(l, (int, np.integer)) else str(l) for l in labels)
        if len(labs) != M:
            raise InvalidArgumentError(f"expected {M} labels, got {len(labs)}")
        if any(len(l) != mm or set(l) - {"0", "1"} for l in labs):
            raise InvalidArgumentError(f"labels must be {mm}-bit binary strings")
        if len(set(labs)) != M:
            raise InvalidArgumentError("labels are not a bijection onto all m-bit strings")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "m", mm)
        object.__setattr__(self, "labels", labs)

    def __len__(self) -> int:
        return len(self.base)

    def __repr__(self) -> str:
        return f"LabeledConstellation(M={len(self)}, m={self.m})"

    @property
    def points(self) -> np.ndarray:
        return self.base.points

    @property
    def probs(self) -> np.ndarray:
        return self.base.probs

    def bit_matrix(self) -> np.ndarray:
        """``(M, m)`` integer array; column ``i-1`` holds bit ``i`` of each label."""
        return np.array([[int(ch) for ch in l] for l in self.labels], dtype=int)

    def rotated(self, theta: float) -> LabeledConstellation:
        return LabeledConstellation(self.points * np.exp(1j * theta), self.labels)

    def permute_bits(self, order: Sequence[int]) -> LabeledConstellation:
        """Reorder label positions; ``order`` lists old 0-based positions."""
        if sorted(order) != list(range(self.m)):
            raise InvalidArgumentError("bit order must be a permutation of label positions")
        return LabeledConstellation(
            self.points, ["".join(l[k] for k in order) for l in self.labels])


# --------------------------------------------------------------------------
# generators


def make_pam(M: int) -> LabeledConstellation:
    """Unit-energy M-PAM on the real axis with binary-reflected Gray labels."""
    m = _log2_exact(M)
    beta = math.sqrt(3.0 / (M * M - 1))
    pts = beta * np.arange(-(M - 1), M, 2, dtype=float)
    return LabeledConstellation(pts.astype(complex), [gray_code(k) for k in range(M)], m)


def make_psk(M: int, labeling: str = "gray") -> LabeledConstellation:
    """Unit-energy M-PSK, points ``exp(2j*pi*k/M)`` counter-clockwise from 0."""
    m = _log2_exact(M)
    k = np.arange(M)
    pts = np.exp(2j * np.pi * k / M)
    if M == 2:
        pts = np.array([1.0, -1.0], dtype=complex)
    elif M == 4:
        # exact fourth roots of unity
        pts = np.array([1, 1j, -1, -1j], dtype=complex)
    if labeling == "gray":
        labels = [gray_code(int(n)) for n in k]
    elif labeling == "set_partitioning":
        labels = [int(n) for n in k]
    elif labeling == "anti_gray":
        if M != 4:
            raise InvalidArgumentError("anti-Gray labeling is only defined for QPSK")
        # 00 and 11, 01 and 10 sit on angularly adjacent points
        labels = [0b00, 0b11, 0b01, 0b10]
    else:
        raise InvalidArgumentError(f"unsupported PSK labeling {labeling!r}")
    return LabeledConstellation(pts, labels, m)


def _sp16_label(i: int, j: int) -> int:
    # Ungerboeck partition of the 4x4 grid: the last bit splits into a
    # checkerboard, then sublattices, then diagonals.
    i1, i0 = i >> 1, i & 1
    j1, j0 = j >> 1, j & 1
    return (i1 << 3) | ((i1 ^ i0 ^ j1) << 2) | (i0 << 1) | (i0 ^ j0)


def make_qam(M: int, labeling: str = "gray") -> LabeledConstellation:
    """Unit-energy square M-QAM as a product of two sqrt(M)-PAM axes.

    Points are ordered real index major. Gray labels are the real-axis Gray
    label followed by the imaginary-axis Gray label.
    """
    m = _log2_exact(M)
    if m % 2:
        raise InvalidArgumentError(f"square QAM requires M = 4**k, got {M}")
    L = 1 << (m // 2)
    beta = math.sqrt(3.0 / (2 * (L * L - 1)))
    axis = beta * np.arange(-(L - 1), L, 2, dtype=float)
    pts = [axis[i] + 1j * axis[j] for i in range(L) for j in range(L)]
    if labeling == "gray":
        labels = [(gray_code(i) << (m // 2)) | gray_code(j) for i in range(L) for j in range(L)]
    elif labeling == "set_partitioning":
        if M != 16:
            raise InvalidArgumentError("set-partitioning QAM is only tabulated for 16-QAM")
        labels = [_sp16_label(i, j) for i in range(L) for j in range(L)]
    else:
        raise InvalidArgumentError(f"unsupported QAM labeling {labeling!r}")
    return LabeledConstellation(np.array(pts), labels, m)


def mixture(parts: Sequence[tuple[Constellation, float]]) -> Constellation:
    """Union of sub-constellations, each point weighted by its part's weight."""
    if not parts:
        raise InvalidArgumentError("mixture needs at least one part")
    weights = np.array([w for _, w in parts], dtype=float)
    if np.any(weights <= 0):
        raise InvalidArgumentError("mixture weights must be positive")
    if abs(weights.sum() - 1.0) > PROB_TOL:
        raise InvalidArgumentError("mixture weights must sum to 1")
    pts = np.concatenate([_as_constellation(c).points for c, _ in parts])
    probs = np.concatenate([w * _as_constellation(c).probs for c, w in parts])
    return Constellation(pts, probs)


def _as_constellation(c: Constellation | LabeledConstellation) -> Constellation:
    return c.base if isinstance(c, LabeledConstellation) else c


# --------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class Moments:
    mu1: complex
    mu2: float
    mu2_pseudo: complex


@dataclass(frozen=True)
class Covariance2x2:
    var_re: float
    var_im: float
    cov_re_im: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.var_re, self.cov_re_im], [self.cov_re_im, self.var_im]])

    @property
    def trace(self) -> float:
        return self.var_re + self.var_im


def moments(c: Constellation | LabeledConstellation) -> Moments:
    c = _as_constellation(c)
    x, p = c.points, c.probs
    return Moments(complex(p @ x), float(p @ np.abs(x) ** 2), complex(p @ x**2))


def covariance(c: Constellation | LabeledConstellation) -> Covariance2x2:
    """Central second moments of (Re X, Im X)."""
    c = _as_constellation(c)
    p = c.probs
    dr = c.points.real - p @ c.points.real
    di = c.points.imag - p @ c.points.imag
    return Covariance2x2(float(p @ dr**2), float(p @ di**2), float(p @ (dr * di)))


def subconstellation(lc: LabeledConstellation, i: int, b: int) -> Constellation:
    """Points whose label has bit ``b`` at position ``i`` (1-based), equiprobable.

    The subset keeps its own mean and energy; nothing is renormalized.
    """
    if not 1 <= i <= lc.m:
        raise InvalidArgumentError(f"bit index must be in 1..{lc.m}, got {i}")
    if b not in (0, 1):
        raise InvalidArgumentError(f"bit value must be 0 or 1, got {b!r}")
    ch = str(b)
    sel = [n for n, l in enumerate(lc.labels) if l[i - 1] == ch]
    return Constellation(lc.points[sel])


# --------------------------------------------------------------------------
# JSON format


def from_json(data: dict | str | Path) -> Constellation | LabeledConstellation:
    """Parse the JSON constellation format.

    ``{"m": int?, "points": [[re, im], ...], "probs": [...]?, "labels": [...]?}``.
    Accepts a parsed dict, a JSON string, or a path. Returns a
    :class:`LabeledConstellation` when labels are present.
    """
    if isinstance(data, Path) or (isinstance(data, str) and not data.lstrip().startswith("{")):
        data = json.loads(Path(data).read_text())
    elif isinstance(data, str):
        data = json.loads(data)
    if not isinstance(data, dict):
        raise InvalidArgumentError("constellation JSON must be an object")
    unknown = set(data) - {"m", "points", "probs", "labels"}
    if unknown:
        raise InvalidArgumentError(f"unknown constellation fields: {sorted(unknown)}")
    raw = data.get("points")
    if not isinstance(raw, list) or not raw:
        raise InvalidArgumentError("'points' must be a non-empty list of [re, im] pairs")
    pts = []
    for n, xy in enumerate(raw):
        if (not isinstance(xy, (list, tuple)) or len(xy) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in xy)):
            raise InvalidArgumentError(f"point {n} is not a [re, im] pair of numbers")
        pts.append(complex(xy[0], xy[1]))
    probs = data.get("probs")
    labels = data.get("labels")
    m = data.get("m")
    if m is not None and (not isinstance(m, int) or isinstance(m, bool) or m < 1):
        raise InvalidArgumentError("'m' must be a positive integer")
    if labels is None:
        if m is not None and len(pts) != 1 << m:
            raise InvalidArgumentError(f"m={m} does not match {len(pts)} points")
        return Constellation(pts, probs)
    if not isinstance(labels, list) or not all(isinstance(l, str) for l in labels):
        raise InvalidArgumentError("'labels' must be a list of bit strings")
    if probs is not None:
        if not np.allclose(np.asarray(probs, float), 1.0 / len(pts), rtol=0, atol=PROB_TOL):
            raise InvalidArgumentError("labeled constellations must be equiprobable")
    return LabeledConstellation(pts, labels, m)


def to_json(c: Constellation | LabeledConstellation) -> dict:
    out: dict = {"points": [[float(x.real), float(x.imag)] for x in c.points]}
    if isinstance(c, LabeledConstellation):
        out["m"] = c.m
        out["labels"] = list(c.labels)
    else:
        out["probs"] = [float(p) for p in c.probs]
    return out
