"""End-to-end acceptance checks: the quantitative targets of the laboratory.

Each check prints one PASS/FAIL line with the measured margins (visible
in the terminal regardless of capture settings) and then asserts the
stated tolerances.  Experiments run once per session through the real
driver on the stock configurations.

Two checks document targets this discretization family cannot reach and
fail honestly rather than being weakened:

* the sector/lattice cross-check at sector cutoff M = 8 asks the lowest
  ten 2D eigenvalues to match merged sector values within 5%, but the
  lattice window carries ten near-zero modes while a cutoff of M = 8
  contributes only eight zero-mode sectors, so two lattice values have
  no counterpart (the M = 10 control printed alongside passes);
* the merged-spectrum max-gap ceiling of 0.15 at M = 40 is below the
  first excited level of the outermost sector, which scales like
  3*M^(-1/3) ~ 0.85 at M = 40, so no window refinement at this cutoff
  can reach it (the strict-decrease and frozen-baseline checks pass).
"""

import json
import math
import time
import warnings
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.special import jn_zeros

from dirac_lab import (
    Box,
    GridSpec,
    TridiagOperator,
    assemble_dirac,
    assemble_mag_laplacian,
    build_sector_ops,
    check_relations,
    chirality_anticommutator,
    constant_field,
    dense_eigs,
    jz_sector,
    lanczos_lowest,
    make_rep,
    miller_simon,
    tridiag_eigs,
)
from dirac_lab.cli import main
from dirac_lab.sectors import sector_vs_lattice

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def announce(capsys, line: str) -> None:
    with capsys.disabled():
        print("\n" + line)


def run_experiment(tmp_path_factory, experiment: str, config: str) -> dict:
    out = tmp_path_factory.mktemp(f"accept_{config[:-5]}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rc = main([experiment, "--config", str(CONFIGS / config), "--out", str(out)])
    report = json.loads((out / "report.json").read_text())
    report["_rc"] = rc
    return report


@pytest.fixture(scope="session")
def verify_report(tmp_path_factory):
    return run_experiment(tmp_path_factory, "verify", "verify.toml")


@pytest.fixture(scope="session")
def spectrum2d_report(tmp_path_factory):
    return run_experiment(tmp_path_factory, "spectrum2d", "spectrum2d.toml")


@pytest.fixture(scope="session")
def sectors_report(tmp_path_factory):
    return run_experiment(tmp_path_factory, "sectors", "sectors.toml")


@pytest.fixture(scope="session")
def weyl_report(tmp_path_factory):
    return run_experiment(tmp_path_factory, "weyl", "weyl.toml")


@pytest.fixture(scope="session")
def weyl_free_report(tmp_path_factory):
    return run_experiment(tmp_path_factory, "weyl", "weyl_free.toml")


@pytest.fixture(scope="session")
def gauge_report(tmp_path_factory):
    return run_experiment(tmp_path_factory, "gauge", "gauge.toml")


# ---------------------------------------------------------------------------


def test_01_clifford_algebra_exact(capsys):
    t0 = time.time()
    rep = make_rep()
    report = check_relations(rep)
    worst = max(report.values())
    extra = max(float(np.abs(1j * rep.omega - rep.chirality).max()),
                float(np.abs(rep.nu @ rep.gamma1 + rep.gamma1 @ rep.nu).max()),
                float(np.abs(rep.nu @ rep.gamma2 + rep.gamma2 @ rep.nu).max()))
    ok = worst == 0.0 and extra == 0.0
    announce(capsys, f"[accept 01] Clifford relations exact: "
                     f"{'PASS' if ok else 'FAIL'} — max violation {max(worst, extra):.1e} "
                     f"({len(report)} relations, {time.time() - t0:.2f}s)")
    assert worst == 0.0 and extra == 0.0


def test_02_squared_operator_identity_order(capsys, verify_report):
    legs = [l for l in verify_report["legs"]
            if l["identity"] == "lichnerowicz" and l["stencil_order"] == 4]
    pots = {l["potential"] for l in legs}
    spinors = {l["spinor"] for l in legs}
    fitted = [l["estimated_order"] for l in legs if not l["machine_floor"]]
    ok = (len(pots) >= 3 and len(spinors) >= 2
          and all(l["pass"] for l in legs)
          and all(o >= 3.5 for o in fitted))
    announce(capsys, f"[accept 02] squared-operator identity order: "
                     f"{'PASS' if ok else 'FAIL'} — min fitted order "
                     f"{min(fitted):.2f} >= 3.5 over {len(pots)} potentials x "
                     f"{len(spinors)} spinors ({sum(l['machine_floor'] for l in legs)} legs at machine floor)")
    assert len(pots) >= 3 and len(spinors) >= 2
    assert all(l["pass"] for l in legs)
    assert min(fitted) >= 3.5


def test_03_mass_term_identity_order(capsys, verify_report):
    legs = [l for l in verify_report["legs"] if l["identity"].startswith("mass[")]
    confining = [l for l in legs if "confining" in l["identity"]]
    constant = [l for l in legs if "constant" in l["identity"]]
    fitted = [l["estimated_order"] for l in legs if not l["machine_floor"]]
    ok = confining and constant and all(l["pass"] for l in legs) and min(fitted) >= 3.5
    announce(capsys, f"[accept 03] mass-term identity order: "
                     f"{'PASS' if ok else 'FAIL'} — min fitted order {min(fitted):.2f} "
                     f">= 3.5; constant-mass legs at machine floor: "
                     f"{sum(l['machine_floor'] for l in constant)}/{len(constant)}")
    assert confining and constant
    assert all(l["pass"] for l in legs)
    assert min(fitted) >= 3.5


def test_04_diamagnetic_inequality(capsys, verify_report):
    rows = verify_report["diamagnetic"]
    total = sum(r["checked"] for r in rows)
    violations = sum(r["violations"] for r in rows)
    ok = len(rows) >= 3 and all(r["checked"] == 200 for r in rows) and violations == 0
    announce(capsys, f"[accept 04] diamagnetic inequality: "
                     f"{'PASS' if ok else 'FAIL'} — {violations} violations over "
                     f"{total} points in {len(rows)} field/spinor configurations "
                     f"(worst excess {max(r['max_excess'] for r in rows):.1e})")
    assert len(rows) >= 3
    assert all(r["checked"] == 200 and r["violations"] == 0 for r in rows)


def test_05_gauge_machinery(capsys, gauge_report):
    recon = gauge_report["reconstruction"]
    cov = gauge_report["covariance"]
    decay = gauge_report["decay"]
    recon_ok = all(r["max_curl_error"] <= r["tolerance"] for r in recon)
    cov_ok = all(c["max_rel_eig_dev"] <= 1e-10 for c in cov)
    decay_ok = all(d["sup_A"] <= d["bound_4n_supB"] for d in decay)
    ok = recon_ok and cov_ok and decay_ok
    announce(capsys, f"[accept 05] gauge machinery: {'PASS' if ok else 'FAIL'} — "
                     f"curl error {max(r['max_curl_error'] for r in recon):.1e} "
                     f"<= {recon[0]['tolerance']:.1e}; covariance eig dev "
                     f"{max(c['max_rel_eig_dev'] for c in cov):.1e} <= 1e-10; "
                     f"sup|A| <= 4n sup|B| on {len(decay)} far balls")
    assert recon_ok and cov_ok and decay_ok


def test_06_quasimode_residual_decay(capsys, weyl_report, weyl_free_report):
    mono = weyl_report["monotonicity"]
    mono_ok = all(mono[k]["strictly_decreasing"] for k in ("0.0", "1.0"))
    fit = weyl_free_report["free_fit"]
    fit_ok = all(fit[k]["worst_factor"] <= 3.0 for k in fit)
    r0 = mono["0.0"]["r_by_n"]
    r1 = mono["1.0"]["r_by_n"]
    ok = mono_ok and fit_ok
    announce(capsys, f"[accept 06] quasimode residual decay: "
                     f"{'PASS' if ok else 'FAIL'} — r(4)>r(8)>r(16): "
                     f"lambda=0 ({r0[0]:.3f},{r0[1]:.3f},{r0[2]:.3f}), "
                     f"lambda=1 ({r1[0]:.3f},{r1[1]:.3f},{r1[2]:.3f}); free-case "
                     f"c/sqrt(n) fit factor {max(fit[k]['worst_factor'] for k in fit):.2f} <= 3")
    assert mono_ok and fit_ok


def test_07_confined_stabilizes_free_collapses(capsys, spectrum2d_report):
    stab = spectrum2d_report["stabilization"]
    collapse = spectrum2d_report["collapse"]
    worst_rel = max(s["rel_change"] for s in stab)
    stab_ok = len(stab) >= 5 and worst_rel <= 0.02
    drop = collapse["drop_fraction"]
    collapse_ok = drop >= 0.6
    ok = stab_ok and collapse_ok and spectrum2d_report["all_pass"]
    announce(capsys, f"[accept 07] confined spectrum stabilizes, free collapses: "
                     f"{'PASS' if ok else 'FAIL'} — lowest-5 change {worst_rel:.2e} "
                     f"<= 2% across box doubling; free lowest value drops "
                     f"{100 * drop:.1f}% >= 60%")
    assert stab_ok and collapse_ok


def test_08_sector_lattice_cross_check(capsys):
    grid = GridSpec(Box((0.0, 0.0), 10.0), 64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pinned = sector_vs_lattice(0.5, grid, M=8, K=8, n_match=10)
        control = sector_vs_lattice(0.5, grid, M=10, K=8, n_match=10)
    dev = pinned["max_rel_deviation"]
    ok = pinned["matched_count"] == 10 and dev <= 0.05
    announce(capsys, f"[accept 08] sector/lattice cross-check (M=8, lowest 10): "
                     f"{'PASS' if ok else 'FAIL'} — max rel deviation {dev:.3f} vs 0.05 "
                     f"(10 lattice near-zero modes, only 8 zero-mode sectors at M=8; "
                     f"M=10 control: {control['max_rel_deviation']:.4f} <= 0.05 "
                     f"{'PASS' if control['max_rel_deviation'] <= 0.05 else 'FAIL'})")
    assert control["max_rel_deviation"] <= 0.05, "control must isolate the cutoff effect"
    assert pinned["matched_count"] == 10
    assert dev <= 0.05


def test_09_sector_density_max_gap(capsys, sectors_report):
    sweep = {row["M"]: row["max_gap"] for row in sectors_report["gap_sweep"]}
    decrease_ok = sweep[40] < sweep[10]
    baseline_ok = sectors_report["baseline_check"]["pass"]
    final_gap = sectors_report["final_max_gap"]
    ceiling_ok = final_gap <= 0.15
    ok = decrease_ok and baseline_ok and ceiling_ok
    announce(capsys, f"[accept 09] merged-spectrum density metric: "
                     f"{'PASS' if ok else 'FAIL'} — max gap M=40 {sweep[40]:.4f} < "
                     f"M=10 {sweep[10]:.4f} ({'PASS' if decrease_ok else 'FAIL'}); "
                     f"frozen baseline reproduced to 1e-6 "
                     f"({'PASS' if baseline_ok else 'FAIL'}); ceiling 0.15 "
                     f"{'PASS' if ceiling_ok else 'FAIL'} (outermost sector's first "
                     f"excited level ~ 3*M^(-1/3) ~ 0.87 at M=40)")
    assert decrease_ok and baseline_ok
    assert ceiling_ok


def test_10_spectral_symmetry_pairing(capsys):
    t0 = time.time()
    grid = GridSpec(Box((0.0, 0.0), 3.0), 20)
    D = assemble_dirac(grid, miller_simon(0.5))
    anti = chirality_anticommutator(D)
    out = dense_eigs(D)
    by_abs = np.sort(np.abs(out.values))
    pair_dev = float(np.abs(by_abs[0::2] - by_abs[1::2]).max())
    allowance = 2.0 * float(out.residuals.max())
    ok = anti == 0.0 and pair_dev <= allowance
    announce(capsys, f"[accept 10] spectral symmetry: {'PASS' if ok else 'FAIL'} — "
                     f"chirality anticommutator {anti:.1e} (exact); +/- pairing "
                     f"deviation {pair_dev:.1e} <= 2x residual {allowance:.1e} "
                     f"({time.time() - t0:.1f}s)")
    assert anti == 0.0
    assert pair_dev <= allowance


def test_11_solver_cross_validation(capsys):
    t0 = time.time()
    # shared instance 1: free 1D Laplacian, n = 120
    n = 120
    T1 = TridiagOperator(diagonal=np.full(n, 2.0), offdiagonal=np.full(n - 1, -1.0),
                         rho_max=float(n), n=n, step=1.0)
    S1 = sp.diags([T1.offdiagonal, T1.diagonal, T1.offdiagonal], [-1, 0, 1]).tocsr()
    # shared instance 2: radial sector operator
    T2 = build_sector_ops(jz_sector(2, 0.5)[0], 20.0, 400)
    S2 = sp.diags([T2.offdiagonal, T2.diagonal, T2.offdiagonal], [-1, 0, 1]).tocsr()
    pairwise = 0.0
    for T, S in ((T1, S1), (T2, S2)):
        # explicit tol: the default scales with the Gershgorin bound, which
        # on the radial instance (~1/step^2) would sit above the 1e-8 target
        tri = tridiag_eigs(T, count=8, tol=1e-12).values
        lan = lanczos_lowest(S, K=8, tol=1e-12, max_iter=S.shape[0]).values
        den = dense_eigs(S.toarray()).values[:8]
        pairwise = max(pairwise,
                       float(np.abs(tri - lan).max()),
                       float(np.abs(tri - den).max()),
                       float(np.abs(lan - den).max()))
    pairwise_ok = pairwise <= 1e-8

    # radial free-disk limit vs Bessel zeros at n = 4000
    rho_max, nrad = 20.0, 4000
    bessel_dev = 0.0
    for spec, j1 in ((jz_sector(-1)[1], float(jn_zeros(0, 1)[0])),
                     (jz_sector(0)[1], float(jn_zeros(1, 1)[0]))):
        op = build_sector_ops(spec, rho_max, nrad, include_field_terms=False)
        lowest = float(tridiag_eigs(op, count=1, tol=1e-12).values[0])
        expected = (j1 / rho_max) ** 2
        bessel_dev = max(bessel_dev, abs(lowest - expected) / expected)
    bessel_ok = bessel_dev <= 0.005

    # uniform-field lowest level on the largest guard-legal box
    b = 1.0
    grid = GridSpec(Box((0.0, 0.0), 8.0), 129)
    H = assemble_mag_laplacian(grid, constant_field(b))
    landau = lanczos_lowest(H, K=1, tol=1e-5, max_iter=700)
    landau_dev = abs(float(landau.values[0]) - b) / b
    landau_ok = landau.converged and landau_dev <= 0.05

    ok = pairwise_ok and bessel_ok and landau_ok
    announce(capsys, f"[accept 11] solver cross-validation: "
                     f"{'PASS' if ok else 'FAIL'} — pairwise {pairwise:.1e} <= 1e-8 "
                     f"on 2 shared instances; Bessel-limit deviation "
                     f"{100 * bessel_dev:.3f}% <= 0.5%; lowest uniform-field level "
                     f"off by {100 * landau_dev:.2f}% <= 5% ({time.time() - t0:.0f}s)")
    assert pairwise_ok
    assert bessel_ok
    assert landau_ok
