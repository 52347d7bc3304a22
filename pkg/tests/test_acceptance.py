"""Acceptance suite: one marker per criterion, summarized at the end of the run.

Every check runs at the tolerance stated for its criterion. Each test also
prints a single PASS/FAIL line (visible with ``-s``); the per-criterion
summary appears in the terminal report.
"""

import math
import time

import numpy as np
import pytest

from bicm_wideband import (cm_capacity, bicm_capacity, bicm_capacity_direct, bicm_coeffs,
                           apply_fading, cm_coeffs, exact_tradeoff, fit_coeffs_numeric,
                           gaussian_reference, gray_c1, make_pam, make_psk, make_qam,
                           nakagami_penalty, subconstellation, wideband_figures,
                           ChannelModel, Quadrature, TradeoffQuery, delta_w_approx,
                           DivergedError, NoSolutionError)
from bicm_wideband.cli import main
from bicm_wideband.verify import REFERENCE_TABLE

from conftest import TABLE_CASES, riemann_cm_capacity


def report(name, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, detail


@pytest.mark.criterion("1 reference table")
def test_reference_table(table_case):
    name, lc = table_case
    t0 = time.perf_counter()
    co = bicm_coeffs(lc)
    fig = wideband_figures(co)
    elapsed = time.perf_counter() - t0
    c1, _, lim_db, c2, zeta = REFERENCE_TABLE[name]
    errs = []
    if abs(co.c1 - c1) > 5e-4:
        errs.append(f"c1 {co.c1:.5f} vs {c1}")
    if abs(co.c2 - c2) > 5e-4:
        errs.append(f"c2 {co.c2:.5f} vs {c2}")
    if abs(fig.ebno_lim_db - lim_db) > 1e-3:
        errs.append(f"Eb/N0 lim {fig.ebno_lim_db:.4f} dB vs {lim_db}")
    if fig.slope_zeta0 is None or abs(fig.slope_zeta0 / zeta - 1) > 1e-3:
        errs.append(f"zeta0 {fig.slope_zeta0:.4f} vs {zeta}")
    if elapsed >= 1.0:
        errs.append(f"runtime {elapsed:.2f} s")
    report(f"table {name}", not errs, "; ".join(errs) or "all cells within tolerance")


@pytest.mark.criterion("2 Gray closed form")
def test_gray_closed_form():
    t0 = time.perf_counter()
    errs = []
    lims = []
    for M in (2, 4, 8, 16, 32):
        c1, lim = gray_c1(M)
        lims.append(lim)
        pam = bicm_coeffs(make_pam(M)).c1
        if abs(pam - c1) > 1e-12:
            errs.append(f"PAM M={M}: {pam} vs {c1}")
        if M <= 8:
            qam = bicm_coeffs(make_qam(M * M)).c1
            if abs(qam - c1) > 1e-12:
                errs.append(f"QAM M={M * M}: {qam} vs {c1}")
    limit = 4 / 3 * math.log(2)
    if not np.all(np.diff(lims) > 0) or lims[-1] >= limit:
        errs.append("Eb/N0 lim not increasing toward the limit from below")
    gap = 10 * math.log10(limit) - 10 * math.log10(lims[-1])
    if gap > 0.01:
        errs.append(f"M=32 is {gap:.4f} dB from the limit")
    elapsed = time.perf_counter() - t0
    if elapsed >= 1.0:
        errs.append(f"runtime {elapsed:.2f} s")
    report("gray closed form", not errs, "; ".join(errs) or f"M=32 within {gap:.4f} dB")


FIT_TARGETS = {
    "gaussian": (gaussian_reference, lambda: (1.0, -0.5)),
    "cm qpsk": (lambda s: cm_capacity(make_psk(4), s), lambda: _cm(make_psk(4))),
    "cm 8psk": (lambda s: cm_capacity(make_psk(8), s), lambda: _cm(make_psk(8))),
    "cm 16qam": (lambda s: cm_capacity(make_qam(16), s), lambda: _cm(make_qam(16))),
}
for _name, _build in TABLE_CASES.items():
    FIT_TARGETS[f"bicm {_name}"] = (
        lambda s, b=_build: bicm_capacity(b(), s),
        lambda b=_build: (bicm_coeffs(b()).c1, bicm_coeffs(b()).c2))


def _cm(c):
    co = cm_coeffs(c)
    return co.c1, co.c2


@pytest.mark.criterion("3 numeric fit")
@pytest.mark.parametrize("target", list(FIT_TARGETS))
def test_numeric_fit(target):
    fn, expected = FIT_TARGETS[target]
    fit = fit_coeffs_numeric(fn, np.geomspace(1e-3, 3e-2, 8))
    c1, c2 = expected()
    err = max(abs(fit.c1 - c1), abs(fit.c2 - c2))
    report(f"fit {target}", err <= 5e-3, f"max error {err:.2e}")


@pytest.mark.criterion("4 BICM identity")
def test_bicm_identity(table_case):
    name, lc = table_case
    q = Quadrature(32)
    worst = max(abs(bicm_capacity(lc, s, method=q).raw - bicm_capacity_direct(lc, s, method=q).raw)
                for s in (0.01, 0.1, 1.0, 10.0))
    report(f"identity {name}", worst <= 1e-8, f"max |diff| {worst:.2e}")


@pytest.mark.criterion("5 brute-force oracle")
@pytest.mark.parametrize("case", ["qpsk", "16qam gray subset"])
def test_oracle(case):
    c = make_psk(4) if case == "qpsk" else subconstellation(make_qam(16), 1, 0)
    if case != "qpsk":
        assert abs(complex(np.sum(c.probs * c.points))) > 0.1  # genuinely off-centre
    quad = cm_capacity(c, 0.1).raw
    ref = riemann_cm_capacity(c.points, c.probs, 0.1)
    report(f"oracle {case}", abs(quad - ref) <= 1e-6, f"|quad - grid| {abs(quad - ref):.2e}")


ORDERING_CASES = dict(TABLE_CASES, **{"bpsk": lambda: make_psk(2),
                                       "64qam:gray": lambda: make_qam(64)})


@pytest.mark.criterion("6 ordering invariants")
@pytest.mark.parametrize("name", list(ORDERING_CASES))
def test_ordering(name):
    lc = ORDERING_CASES[name]()
    grid = np.geomspace(1e-3, 1e3, 30)
    errs = []
    for s in grid:
        b, c, g = bicm_capacity(lc, s).nats, cm_capacity(lc, s).nats, gaussian_reference(s).nats
        if not (b <= c + 1e-9 and c <= g + 1e-9):
            errs.append(f"snr {s:.3g}: bicm {b:.6f} cm {c:.6f} gauss {g:.6f}")
        if name == "qpsk:gray" and abs(b - c) > 1e-6:
            errs.append(f"snr {s:.3g}: QPSK Gray bicm != cm")
    report(f"ordering {name}", not errs, "; ".join(errs[:3]) or "30 points ordered")


SNR1 = 10 ** (-1.8)
DP_24 = 10 ** 0.24


def _bicm(lc):
    return lambda s: bicm_capacity(lc, s)


@pytest.mark.criterion("7 trade-off reproduction")
def test_tradeoff_qpsk_to_16qam():
    dw = exact_tradeoff(_bicm(make_psk(4)), _bicm(make_qam(16)), SNR1, DP_24)
    report("QPSK to 16-QAM at +2.4 dB", 0.01 <= dw <= 0.03, f"dW = {dw:.5f}")


@pytest.mark.criterion("7 trade-off reproduction")
def test_tradeoff_qpsk_to_qpsk():
    dw = exact_tradeoff(_bicm(make_psk(4)), _bicm(make_psk(4)), SNR1, DP_24)
    report("QPSK to QPSK at +2.4 dB", 0.02 <= dw <= 0.045, f"dW = {dw:.5f}")


@pytest.mark.criterion("7 trade-off reproduction")
@pytest.mark.parametrize("pair", ["qpsk>16qam", "qpsk>qpsk"])
def test_tradeoff_approx_vs_exact(pair):
    t0 = time.perf_counter()
    a, b = (make_psk(4) if n == "qpsk" else make_qam(16) for n in pair.split(">"))
    q = TradeoffQuery(bicm_coeffs(a), bicm_coeffs(b), SNR1)
    errs = []
    infeasible = 0
    for db in np.linspace(0.0, 0.8, 9):
        dp = 10 ** (db / 10)
        try:
            approx = delta_w_approx(q, dp)
        except DivergedError:
            approx = None
        try:
            exact = exact_tradeoff(_bicm(a), _bicm(b), SNR1, dp)
        except NoSolutionError:
            exact = None
        if approx is None and exact is None:
            infeasible += 1  # below the zero-rate power ratio neither has a solution
            continue
        if approx is None or exact is None:
            errs.append(f"{db:.1f} dB: approx {approx}, exact {exact}")
            continue
        rel = abs(approx - exact) / exact
        if rel > 0.05:
            errs.append(f"{db:.1f} dB: {rel:.1%} apart")
    elapsed = time.perf_counter() - t0
    if elapsed >= 300:
        errs.append(f"runtime {elapsed:.0f} s")
    report(f"approx vs exact {pair}", not errs, "; ".join(errs) or
           f"within 5% on the grid ({infeasible} points infeasible for both)")


@pytest.mark.criterion("8 Nakagami scaling")
def test_nakagami_fit():
    ch = ChannelModel.nakagami(1.0)
    lc = make_psk(4)
    fit = fit_coeffs_numeric(lambda s: bicm_capacity(lc, s, ch), channel=ch)
    ref = apply_fading(bicm_coeffs(lc), 1.0)
    err = max(abs(fit.c1 - ref.c1), abs(fit.c2 - ref.c2))
    ok = err <= 5e-3 and ref.c2 == 2 * bicm_coeffs(lc).c2
    report("Nakagami-1 QPSK", ok, f"fit ({fit.c1:.5f}, {fit.c2:.5f}) vs ({ref.c1}, {ref.c2})")


@pytest.mark.criterion("8 Nakagami scaling")
def test_nakagami_penalty():
    pt = nakagami_penalty(bicm_coeffs(make_psk(4)), 1.0, 0.01, "fix_power")
    report("penalty nu=1", pt.delta_w == 2.0 and pt.delta_p == 1.0, f"{pt}")


def _sweep(tmp_path, tag, *extra):
    out = tmp_path / f"{tag}.csv"
    argv = ["sweep", "16qam", "--start", "-10", "--stop", "10", "--step", "2",
            "--seed", "7", "--out", str(out), *extra]
    assert main(argv) == 0
    return out.read_bytes()


@pytest.mark.criterion("9 determinism")
@pytest.mark.parametrize("method", ["quad:32", "mc:20000"])
def test_determinism(tmp_path, method):
    runs = [_sweep(tmp_path, "a", "--method", method),
            _sweep(tmp_path, "b", "--method", method),
            _sweep(tmp_path, "w1", "--method", method, "--workers", "1"),
            _sweep(tmp_path, "w8", "--method", method, "--workers", "8")]
    same = all(r == runs[0] for r in runs)
    report(f"determinism {method}", same and len(runs[0]) > 0, "byte-identical" if same else "outputs differ")
