"""Command-line front end: ``coeffs``, ``sweep``, ``tradeoff`` and ``verify``.

Tables are written as CSV with a one-line header and six-decimal fields.
SNR values are linear everywhere except at this boundary, where dB uses
``10*log10``. Exit codes: 0 success, 1 runtime or check failure, 2 usage.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import constellation as cs
from .capacity import (ChannelModel, EvalMethod, MonteCarlo, Quadrature, bicm_capacity,
                       cm_capacity, gaussian_reference, parse_method)
from .errors import InvalidArgumentError, NoSolutionError
from .expansion import (ExpansionCoeffs, apply_fading, bicm_coeffs, capacity_series,
                        cm_coeffs, wideband_figures)
from .tradeoff import TradeoffQuery, delta_w_approx, exact_tradeoff

LOG2E = math.log2(math.e)

BUILTINS: dict[str, dict[str, Callable[[], cs.LabeledConstellation]]] = {
    "bpsk": {"gray": lambda: cs.make_psk(2)},
    "qpsk": {"gray": lambda: cs.make_psk(4), "sp": lambda: cs.make_psk(4, "set_partitioning"),
             "anti-gray": lambda: cs.make_psk(4, "anti_gray")},
    "8psk": {"gray": lambda: cs.make_psk(8), "sp": lambda: cs.make_psk(8, "set_partitioning")},
    "16qam": {"gray": lambda: cs.make_qam(16), "sp": lambda: cs.make_qam(16, "set_partitioning")},
    "64qam": {"gray": lambda: cs.make_qam(64)},
}

TABLE_ROWS = ("qpsk:gray", "qpsk:anti-gray", "8psk:gray", "8psk:sp", "16qam:gray", "16qam:sp")


class UsageError(Exception):
    pass


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def builtin(selector: str) -> cs.LabeledConstellation:
    """Built-in labeled constellation for ``name[:labeling]`` (default Gray)."""
    name, _, labeling = selector.partition(":")
    try:
        return BUILTINS[name][labeling or "gray"]()
    except KeyError:
        raise UsageError(
            f"unknown constellation {selector!r}; built-ins are "
            + ", ".join(f"{n}:{l}" for n, ls in BUILTINS.items() for l in ls)) from None


@dataclass(frozen=True)
class Scheme:
    """A constellation plus the capacity notion it is evaluated under."""

    name: str
    const: cs.Constellation | cs.LabeledConstellation
    bicm: bool

    def capacity(self, snr: float, channel: ChannelModel, method: EvalMethod):
        if self.bicm:
            return bicm_capacity(self.const, snr, channel, method)
        return cm_capacity(self.const, snr, channel, method)

    def coeffs(self, channel: ChannelModel) -> ExpansionCoeffs:
        co = bicm_coeffs(self.const) if self.bicm else cm_coeffs(self.const)
        return co if channel.nu is None else apply_fading(co, channel.nu)


def resolve(selector: str) -> Scheme:
    """``name[:labeling]``, ``name:cm`` or a JSON constellation file."""
    path = Path(selector)
    if selector.endswith(".json") or path.is_file():
        return _from_path(selector, path)
    name, _, labeling = selector.partition(":")
    if labeling == "cm":
        return Scheme(selector, builtin(name).base, False)
    return Scheme(selector, builtin(selector), True)


def _from_path(name: str, path: Path) -> Scheme:
    try:
        c = cs.from_json(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return Scheme(name, c, isinstance(c, cs.LabeledConstellation))


def _fmt(v: float | None) -> str:
    if v is None or not math.isfinite(v):
        return ""
    out = f"{v:.6f}"
    return "0.000000" if out == "-0.000000" else out


def db_grid(start: float, stop: float, step: float) -> np.ndarray:
    if not step > 0:
        raise UsageError("step must be positive")
    if not start < stop:
        raise UsageError("start must be below stop")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


def _write(rows: Sequence[Sequence[str]], out: str | None) -> None:
    if out in (None, "-"):
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerows(rows)
        return
    with open(out, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


# --------------------------------------------------------------------------
# commands


def coeffs_table(selectors: Sequence[str], channel: ChannelModel) -> list[list[str]]:
    rows = [["scheme", "c1", "ebno_lim", "ebno_lim_db", "c2", "zeta0"]]
    for sel in selectors:
        co = resolve(sel).coeffs(channel)
        fig = wideband_figures(co)
        zeta = "unbounded" if fig.unbounded_slope else _fmt(fig.slope_zeta0)
        rows.append([sel, _fmt(co.c1), _fmt(fig.ebno_lim_linear), _fmt(fig.ebno_lim_db),
                     _fmt(co.c2), zeta])
    return rows


@dataclass(frozen=True)
class SweepSpec:
    selector: str
    axis: str = "snr_db"
    start: float = -20.0
    stop: float = 10.0
    step: float = 1.0
    channel: ChannelModel = ChannelModel()
    method: EvalMethod = Quadrature()
    workers: int = 1

    def __post_init__(self):
        if self.axis not in ("snr_db", "ebno_db"):
            raise UsageError(f"axis must be snr_db or ebno_db, got {self.axis!r}")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")


def sweep_rows(spec: SweepSpec) -> list[list[str]]:
    """One row per SNR grid point, in increasing SNR order.

    On the Eb/N0 axis ``x_db`` is the Eb/N0 of the scheme's own capacity
    (BICM when labeled, CM otherwise) at that SNR; it need not be monotone.
    """
    scheme = resolve(spec.selector)
    grid = db_grid(spec.start, spec.stop, spec.step)
    try:
        co = scheme.coeffs(spec.channel)
        fig = wideband_figures(co)
    except InvalidArgumentError:
        co, fig = None, None

    def method_for(k: int, j: int) -> EvalMethod:
        if isinstance(spec.method, MonteCarlo):
            return spec.method.substream(k, j)
        return spec.method

    def row(k: int) -> list[str]:
        snr = db_to_linear(float(grid[k]))
        cm = cm_capacity(scheme.const, snr, spec.channel, method_for(k, 0)).bits
        bicm = (bicm_capacity(scheme.const, snr, spec.channel, method_for(k, 1)).bits
                if isinstance(scheme.const, cs.LabeledConstellation) else None)
        main = bicm if scheme.bicm else cm
        ebno = snr / main if main > 0 else math.inf
        series = capacity_series(co, snr) * LOG2E if co is not None else None
        lin = None
        if fig is not None and not fig.unbounded_slope and math.isfinite(ebno):
            lin = max(fig.slope_zeta0 * (ebno - fig.ebno_lim_linear), 0.0)
        x = float(grid[k]) if spec.axis == "snr_db" else (
            linear_to_db(ebno) if math.isfinite(ebno) else None)
        return [_fmt(x), _fmt(cm), _fmt(bicm), _fmt(gaussian_reference(snr).bits),
                _fmt(series), _fmt(lin)]

    header = ["x_db", "cm_bits", "bicm_bits", "gaussian_bits", "series_bits", "linear_approx_bits"]
    if spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            body = list(pool.map(row, range(grid.size)))
    else:
        body = [row(k) for k in range(grid.size)]
    return [header] + body


def tradeoff_rows(sel1: str, sel2: str, snr1_db: float, dp_db: np.ndarray, mode: str,
                  channel: ChannelModel, method: Quadrature, workers: int = 1) -> list[list[str]]:
    s1, s2 = resolve(sel1), resolve(sel2)
    snr1 = db_to_linear(snr1_db)
    q = TradeoffQuery(s1.coeffs(channel), s2.coeffs(channel), snr1)

    def cap1(s):
        return s1.capacity(s, channel, method)

    def cap2(s):
        return s2.capacity(s, channel, method)

    def row(db: float) -> list[str]:
        dp = db_to_linear(db)
        approx = exact = None
        if mode in ("approx", "both"):
            try:
                approx = delta_w_approx(q, dp)
            except NoSolutionError:
                pass
        if mode in ("exact", "both"):
            try:
                exact = exact_tradeoff(cap1, cap2, snr1, dp)
            except NoSolutionError:
                pass
        return [_fmt(db), _fmt(approx), _fmt(exact)]

    header = [["delta_p_db", "delta_w_approx", "delta_w_exact"]]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return header + list(pool.map(row, [float(d) for d in dp_db]))
    return header + [row(float(d)) for d in dp_db]


# --------------------------------------------------------------------------
# argument parsing


def _parse_overrides(items: Sequence[str]) -> dict[str, cs.LabeledConstellation]:
    out = {}
    for item in items:
        sel, eq, path = item.partition("=")
        if not eq or sel not in TABLE_ROWS:
            raise UsageError(f"override must be <{'|'.join(TABLE_ROWS)}>=<file.json>")
        scheme = _from_path(sel, Path(path))
        if not scheme.bicm:
            raise UsageError(f"override {path} has no labels")
        out[sel] = scheme.const
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep exit code 2, but raise so main() controls output
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--channel", default="awgn", help="awgn | nakagami:<nu>")
    shared.add_argument("--method", default="quad:32", help="quad:<order> | mc:<samples>")
    shared.add_argument("--seed", type=int, default=0, help="Monte Carlo seed (u64)")
    shared.add_argument("--out", default=None, help="output path (default stdout)")
    shared.add_argument("--workers", type=int, default=1, help="worker threads")

    p = _Parser(prog="bicm-wideband", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("coeffs", parents=[shared], help="low-SNR coefficient table")
    c.add_argument("schemes", nargs="*", default=list(TABLE_ROWS),
                   help="name[:labeling], name:cm or file.json")

    s = sub.add_parser("sweep", parents=[shared], help="capacity sweep over SNR")
    s.add_argument("scheme")
    s.add_argument("--axis", default="snr_db", choices=["snr_db", "ebno_db"])
    s.add_argument("--start", type=float, default=-20.0, help="first SNR in dB")
    s.add_argument("--stop", type=float, default=10.0, help="last SNR in dB")
    s.add_argument("--step", type=float, default=1.0, help="SNR step in dB")

    t = sub.add_parser("tradeoff", parents=[shared], help="power-bandwidth trade-off")
    t.add_argument("scheme1")
    t.add_argument("scheme2")
    t.add_argument("--snr1-db", type=float, default=-18.0)
    t.add_argument("--dp-start", type=float, default=0.0, help="first power ratio in dB")
    t.add_argument("--dp-stop", type=float, default=3.0)
    t.add_argument("--dp-step", type=float, default=0.1)
    t.add_argument("--mode", default="both", choices=["approx", "exact", "both"])

    v = sub.add_parser("verify", parents=[shared], help="run the self-check suite")
    v.add_argument("--profile", default="standard", choices=["standard", "loose"])
    v.add_argument("--override", action="append", default=[],
                   help="replace a built-in table: <name:labeling>=<file.json>")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not 0 <= args.seed < 2**64:
            raise UsageError("seed must be an unsigned 64-bit integer")
        try:
            channel = ChannelModel.parse(args.channel)
            method = parse_method(args.method, args.seed)
        except InvalidArgumentError as exc:
            raise UsageError(str(exc)) from exc
        if isinstance(method, MonteCarlo):
            method = MonteCarlo(method.samples, method.seed, (), max(args.workers, 1))
        return _dispatch(args, channel, method)
    except UsageError as exc:
        print(f"bicm-wideband: error: {exc}", file=sys.stderr)
        return 2
    except (InvalidArgumentError, NoSolutionError, OSError) as exc:
        print(f"bicm-wideband: {exc}", file=sys.stderr)
        return 1


def _dispatch(args, channel: ChannelModel, method: EvalMethod) -> int:
    if args.command == "coeffs":
        _write(coeffs_table(args.schemes, channel), args.out)
        return 0
    if args.command == "sweep":
        spec = SweepSpec(args.scheme, args.axis, args.start, args.stop, args.step,
                         channel, method, args.workers)
        _write(sweep_rows(spec), args.out)
        return 0
    if args.command == "tradeoff":
        if args.snr1_db > -10:
            print("bicm-wideband: warning: snr1 above -10 dB, the low-SNR "
                  "approximation may be inaccurate", file=sys.stderr)
        if not isinstance(method, Quadrature):
            print("bicm-wideband: warning: exact trade-off always uses quadrature",
                  file=sys.stderr)
            method = Quadrature()
        grid = db_grid(args.dp_start, args.dp_stop, args.dp_step)
        _write(tradeoff_rows(args.scheme1, args.scheme2, args.snr1_db, grid, args.mode,
                             channel, method, args.workers), args.out)
        return 0
    from .verify import run_all

    overrides = _parse_overrides(args.override)
    lines: list[str] = []

    def report(check):
        lines.append(check.line())
        if args.out in (None, "-"):
            print(check.line(), flush=True)

    checks = run_all(args.seed, args.profile, overrides, report)
    failed = sum(not c.passed for c in checks)
    summary = f"{len(checks) - failed}/{len(checks)} checks passed"
    if args.out not in (None, "-"):
        Path(args.out).write_text("\n".join(lines + [summary]) + "\n")
    print(summary)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
