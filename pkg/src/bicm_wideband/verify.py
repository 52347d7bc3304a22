"""Self-check harness behind ``bicm-wideband verify``.

Each check returns a :class:`Check`; nothing here raises on a failed
comparison, so a report always covers every check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

from . import constellation as cs
from .capacity import (MonteCarlo, Quadrature, bicm_capacity, bicm_capacity_direct,
                       cm_capacity, gaussian_reference)
from .expansion import bicm_coeffs, fit_coeffs_numeric, gray_c1, wideband_figures

# Published low-SNR figures for BICM in AWGN:
# (c1, Eb/N0 lim linear, Eb/N0 lim dB, c2, zeta0)
REFERENCE_TABLE: dict[str, tuple[float, float, float, float, float]] = {
    "qpsk:gray": (1.000, 0.693, -1.592, -0.500, 4.163),
    "qpsk:anti-gray": (0.500, 1.386, 1.419, 0.250, -1.041),
    "8psk:gray": (0.854, 0.812, -0.904, -0.239, 5.410),
    "8psk:sp": (0.427, 1.624, 2.106, 0.005, -29.966),
    "16qam:gray": (0.800, 0.866, -0.627, -0.160, 6.660),
    "16qam:sp": (0.500, 1.386, 1.419, -0.310, 0.839),
}

PROFILES: dict[str, dict[str, float]] = {
    "standard": {"coeff": 5e-4, "db": 1e-3, "zeta_rel": 1e-3, "fit": 5e-3,
                 "identity": 1e-8, "mc_sigmas": 4.0},
    "loose": {"coeff": 5e-3, "db": 1e-2, "zeta_rel": 1e-2, "fit": 2e-2,
              "identity": 1e-6, "mc_sigmas": 5.0},
}


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def builtin_tables(overrides: Mapping[str, cs.LabeledConstellation] | None = None
                   ) -> dict[str, cs.LabeledConstellation]:
    from .cli import builtin  # local import: cli imports this module

    out = {name: builtin(name) for name in REFERENCE_TABLE}
    out.update(overrides or {})
    return out


def check_reference_table(tables, tol) -> list[Check]:
    checks = []
    for name, ref in REFERENCE_TABLE.items():
        co = bicm_coeffs(tables[name])
        fig = wideband_figures(co)
        errs = []
        if abs(co.c1 - ref[0]) > tol["coeff"]:
            errs.append(f"c1 {co.c1:.4f} != {ref[0]:.3f}")
        if abs(co.c2 - ref[3]) > tol["coeff"]:
            errs.append(f"c2 {co.c2:.4f} != {ref[3]:.3f}")
        if abs(fig.ebno_lim_db - ref[2]) > tol["db"]:
            errs.append(f"Eb/N0 lim {fig.ebno_lim_db:.4f} dB != {ref[2]:.3f} dB")
        if fig.slope_zeta0 is None or abs(fig.slope_zeta0 / ref[4] - 1) > tol["zeta_rel"]:
            errs.append(f"zeta0 {fig.slope_zeta0} != {ref[4]}")
        detail = "; ".join(errs) if errs else (
            f"c1={co.c1:.3f} c2={co.c2:.3f} lim={fig.ebno_lim_db:.3f} dB zeta0={fig.slope_zeta0:.3f}")
        checks.append(Check(f"table {name}", not errs, detail))
    return checks


def check_gray_closed_form() -> list[Check]:
    checks = []
    prev = -math.inf
    for M in (2, 4, 8, 16, 32):
        c1, lim = gray_c1(M)
        pam = bicm_coeffs(cs.make_pam(M)).c1
        qam = bicm_coeffs(cs.make_qam(M * M)).c1 if M <= 8 else c1
        ok = abs(pam - c1) <= 1e-12 and abs(qam - c1) <= 1e-12 and lim > prev
        prev = lim
        checks.append(Check(f"gray closed form M={M}", ok,
                            f"c1={c1:.12f} pam={pam:.12f} qam={qam:.12f}"))
    lim32 = 10 * math.log10(gray_c1(32)[1])
    limit = 10 * math.log10(4 / 3 * math.log(2))
    checks.append(Check("gray limit M=32", abs(lim32 - limit) <= 0.01 and lim32 < limit,
                        f"{lim32:.4f} dB vs {limit:.4f} dB"))
    return checks


def check_numeric_fits(tables, tol) -> list[Check]:
    checks = []
    fit = fit_coeffs_numeric(gaussian_reference)
    ok = abs(fit.c1 - 1) <= tol["fit"] and abs(fit.c2 + 0.5) <= tol["fit"]
    checks.append(Check("fit gaussian", ok, f"({fit.c1:.5f}, {fit.c2:.5f})"))
    for name, lc in tables.items():
        ref = bicm_coeffs(lc)
        fit = fit_coeffs_numeric(lambda s, lc=lc: bicm_capacity(lc, s))
        ok = abs(fit.c1 - ref.c1) <= tol["fit"] and abs(fit.c2 - ref.c2) <= tol["fit"]
        checks.append(Check(f"fit {name}", ok,
                            f"numeric ({fit.c1:.5f}, {fit.c2:.5f}) closed ({ref.c1:.5f}, {ref.c2:.5f})"))
    return checks


def check_bicm_identity(tables, tol, snrs=(0.01, 0.1, 1.0, 10.0)) -> list[Check]:
    checks = []
    for name, lc in tables.items():
        worst = max(abs(bicm_capacity(lc, s).raw - bicm_capacity_direct(lc, s).raw) for s in snrs)
        checks.append(Check(f"bicm identity {name}", worst <= tol["identity"],
                            f"max |diff| = {worst:.2e}"))
    return checks


def check_monte_carlo(tables, tol, seed: int) -> list[Check]:
    checks = []
    for name in ("qpsk:gray", "16qam:gray"):
        lc = tables[name]
        q = cm_capacity(lc, 1.0)
        mc = cm_capacity(lc, 1.0, method=MonteCarlo(50_000, seed))
        diff = abs(q.nats - mc.nats)
        checks.append(Check(f"monte carlo {name}", diff <= tol["mc_sigmas"] * mc.std_error,
                            f"|quad - mc| = {diff:.2e}, std error {mc.std_error:.2e}"))
    return checks


def run_all(seed: int = 0, profile: str = "standard",
            overrides: Mapping[str, cs.LabeledConstellation] | None = None,
            progress: Callable[[Check], None] | None = None) -> list[Check]:
    tol = PROFILES[profile]
    tables = builtin_tables(overrides)
    groups = [
        lambda: check_reference_table(tables, tol),
        check_gray_closed_form,
        lambda: check_numeric_fits(tables, tol),
        lambda: check_bicm_identity(tables, tol),
        lambda: check_monte_carlo(tables, tol, seed),
    ]
    out = []
    for g in groups:
        for c in g():
            out.append(c)
            if progress:
                progress(c)
    return out
