"""Gauge-covariant lattice discretizations on truncated square grids.

Independent oracles: the free covariant Laplacian must coincide with the
classical 5-point Dirichlet Laplacian, whose spectrum is a closed form in
1D cosines; a uniform field must produce the harmonic-oscillator ladder
(lowest level = b); and unitary link-phase conjugation must leave spectra
untouched to rounding.
"""

import math
import os

import numpy as np
import pytest

from dirac_lab import (
    Box,
    GridSpec,
    assemble_dirac,
    assemble_mag_laplacian,
    chirality_anticommutator,
    confining_mass,
    constant_field,
    constant_scalar,
    dense_eigs,
    export_coo,
    gauge_conjugate,
    gauge_shift,
    grid_nodes,
    lanczos_lowest,
    miller_simon,
    sigma3_pattern,
    xy_gauge_function,
    zero_field,
)

SMALL = GridSpec(Box((0.0, 0.0), 2.0), 12)
MS = miller_simon(0.5)


# ---------------------------------------------------------------------------
# structure


def test_grid_spec_geometry():
    grid = GridSpec(Box((1.0, -2.0), 4.0), 9)
    assert grid.h == pytest.approx(1.0)
    xs, ys = grid.axis_coords()
    assert xs[0] == pytest.approx(-3.0) and xs[-1] == pytest.approx(5.0)
    assert ys[0] == pytest.approx(-6.0) and ys[-1] == pytest.approx(2.0)
    xf, yf = grid_nodes(grid)
    assert xf.shape == (81,)
    with pytest.raises(ValueError, match="n_per_side"):
        GridSpec(Box((0.0, 0.0), 1.0), 4)


def test_assemblies_exactly_hermitian():
    for mat in (assemble_dirac(SMALL, MS),
                assemble_dirac(SMALL, MS, V=confining_mass(1.0, 1.0),
                               A0=constant_scalar(0.2, role="electric A0")),
                assemble_mag_laplacian(SMALL, MS)):
        defect = (mat.entries - mat.entries.getH()).nnz
        assert defect == 0


def test_dirac_dimension_and_kind():
    mat = assemble_dirac(SMALL, MS)
    assert mat.dimension == 2 * 12 * 12
    assert mat.kind == "dirac"
    massive = assemble_dirac(SMALL, MS, V=constant_scalar(1.0))
    assert massive.kind == "dirac-mass"
    assert "miller-simon" in mat.fingerprint


def test_sigma3_pattern():
    assert np.array_equal(sigma3_pattern(6), [1, -1, 1, -1, 1, -1])


# ---------------------------------------------------------------------------
# chirality symmetry


def test_chirality_anticommutator_exact_zero():
    assert chirality_anticommutator(assemble_dirac(SMALL, MS)) == 0.0
    assert chirality_anticommutator(assemble_dirac(SMALL, zero_field())) == 0.0


def test_chirality_broken_by_mass():
    mat = assemble_dirac(SMALL, MS, V=constant_scalar(0.7))
    assert chirality_anticommutator(mat) == pytest.approx(1.4)


def test_chirality_rejects_scalar_kind():
    with pytest.raises(ValueError, match="kind"):
        chirality_anticommutator(assemble_mag_laplacian(SMALL, MS))


def test_eigenvalues_pair_plus_minus():
    mat = assemble_dirac(SMALL, MS)
    res = dense_eigs(mat.entries)
    by_abs = np.sort(np.abs(res.values))
    tol = 2.0 * float(np.max(res.residuals))
    assert np.max(np.abs(by_abs[0::2] - by_abs[1::2])) <= max(tol, 1e-10)


# ---------------------------------------------------------------------------
# free-case oracle: classical 5-point Laplacian


def test_free_laplacian_matches_dirichlet_closed_form():
    n = 9
    grid = GridSpec(Box((0.0, 0.0), 2.0), n)
    mat = assemble_mag_laplacian(grid, zero_field())
    res = dense_eigs(mat.entries)
    h = grid.h
    one_d = [(2.0 - 2.0 * math.cos(j * math.pi / (n + 1))) / h ** 2
             for j in range(1, n + 1)]
    expected = np.sort([a + b for a in one_d for b in one_d])
    assert np.max(np.abs(res.values - expected)) < 1e-10


def test_mag_laplacian_positive_semidefinite():
    for P in (zero_field(), MS, constant_field(1.0)):
        mat = assemble_mag_laplacian(SMALL, P)
        res = dense_eigs(mat.entries)
        assert float(res.values[0]) >= -1e-12


# ---------------------------------------------------------------------------
# link-phase guard


def test_link_phase_guard_rejects_coarse_grid():
    # uniform b = 1 on half-width 12 with ~0.25 spacing: edge integrals
    # reach h * sup|A| ~ 3, far past the resolvable range
    grid = GridSpec(Box((0.0, 0.0), 12.0), 96)
    with pytest.raises(ValueError, match="under-resolved"):
        assemble_mag_laplacian(grid, constant_field(1.0))


def test_link_phase_guard_accepts_resolved_grid():
    grid = GridSpec(Box((0.0, 0.0), 12.0), 400)
    assemble_mag_laplacian(grid, constant_field(1.0))


# ---------------------------------------------------------------------------
# gauge covariance


def test_gauge_conjugate_is_unitary_similarity():
    mat = assemble_dirac(SMALL, MS)
    f = xy_gauge_function(0.8)
    conj = gauge_conjugate(mat, f)
    base = dense_eigs(mat.entries).values
    moved = dense_eigs(conj.entries).values
    assert np.max(np.abs(base - moved)) < 1e-10


@pytest.mark.parametrize("assemble", [assemble_dirac, assemble_mag_laplacian],
                         ids=["dirac", "mag-laplacian"])
def test_exact_difference_covariance(assemble):
    grid = GridSpec(Box((0.0, 0.0), 2.0), 16)
    P = constant_field(1.0)
    f = xy_gauge_function(1.0)
    base = assemble(grid, P)
    conj = gauge_conjugate(base, f)
    reassembled = assemble(grid, gauge_shift(P, f), link_rule="exact-difference")
    diff = conj.entries - reassembled.entries
    assert float(np.max(np.abs(diff.data)) if diff.nnz else 0.0) <= 1e-12
    ev_a = dense_eigs(conj.entries).values
    ev_b = dense_eigs(reassembled.entries).values
    rel = np.max(np.abs(ev_a - ev_b) / np.maximum(np.abs(ev_b), 1e-6))
    assert rel <= 1e-10


def test_midpoint_rule_covariance_is_second_order():
    # under the midpoint link rule the same comparison is only O(h^2)
    grid = GridSpec(Box((0.0, 0.0), 2.0), 16)
    P = constant_field(1.0)
    f = xy_gauge_function(1.0)
    conj = gauge_conjugate(assemble_dirac(grid, P), f)
    reassembled = assemble_dirac(grid, gauge_shift(P, f), link_rule="midpoint")
    diff = conj.entries - reassembled.entries
    worst = float(np.max(np.abs(diff.data)))
    assert 0.0 < worst < 1.0


def test_constant_gauge_function_is_global_phase():
    mat = assemble_dirac(SMALL, MS)
    conj = gauge_conjugate(mat, constant_scalar(0.37, role="gauge", name="const"))
    diff = conj.entries - mat.entries
    assert float(np.max(np.abs(diff.data)) if diff.nnz else 0.0) <= 1e-14


# ---------------------------------------------------------------------------
# uniform-field ladder


def test_uniform_field_lowest_level():
    # scalar magnetic Laplacian in uniform b: lowest level b (5% at this
    # resolution), independent of the gauge used for assembly
    grid = GridSpec(Box((0.0, 0.0), 6.0), 97)
    mat = assemble_mag_laplacian(grid, constant_field(1.0))
    res = lanczos_lowest(mat.entries, K=1, tol=1e-5, max_iter=600)
    assert res.converged
    assert abs(float(res.values[0]) - 1.0) <= 0.05


# ---------------------------------------------------------------------------
# export


def test_export_coo_round_trip(tmp_path):
    mat = assemble_dirac(SMALL, MS)
    path = os.path.join(tmp_path, "matrix.coo")
    export_coo(mat, path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("# kind=dirac")
    assert lines[1].startswith("# fingerprint=")
    rows, cols, vals = [], [], []
    for line in lines[2:]:
        r, c, re, im = line.split()
        rows.append(int(r))
        cols.append(int(c))
        vals.append(float(re) + 1j * float(im))
    import scipy.sparse as sp

    rebuilt = sp.csr_matrix((vals, (rows, cols)), shape=mat.entries.shape)
    assert (rebuilt != mat.entries).nnz == 0
