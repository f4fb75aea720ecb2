"""Pointwise operator identities on closed-form fields.

The central oracle is a hand-derived closed form for the squared operator
applied to a Gaussian in a uniform field (linear gauge A = (-y, 0), b = 1):

    psi = (e^{-rho^2}, 0)
    D^2 psi = ((5 - 4x^2 - 3y^2 - 4ixy) e^{-rho^2}, 0)

obtained from -Delta psi - 2i (A.grad) psi + |A|^2 psi + b * psi on the
first component.  Everything else is checked through convergence orders of
the residuals, which are independent of any one expansion.
"""

import math

import numpy as np
import pytest

from dirac_lab import (
    StencilSpec,
    constant_field,
    constant_scalar,
    confining_mass,
    convergence_order,
    diamagnetic_check,
    gaussian_pair_spinor,
    gaussian_poly_spinor,
    gaussian_spinor,
    jz_commutator_residual,
    lichnerowicz_residual,
    mass_identity_residual,
    miller_simon,
    modulated_gaussian_spinor,
    pairing_defect,
    zero_field,
)
from dirac_lab.identities import dirac_closure

POINTS = [(0.3, 0.2), (-0.7, 0.5), (1.1, -0.4), (0.05, -0.9)]
H_SEQ = [0.1, 0.05, 0.025]


def max_residual(res_fn, s):
    return max(float(res_fn(p, s)) for p in POINTS)


# ---------------------------------------------------------------------------
# squared-operator closed form


def test_squared_operator_closed_form_uniform_field():
    P = constant_field(1.0)
    psi = gaussian_spinor(1.0)
    apply_D = dirac_closure(P, None, None, StencilSpec(0.01, 4))
    d2 = apply_D(apply_D(psi.value))
    for x, y in POINTS:
        got = np.asarray(d2(x, y)).reshape(2)
        g = math.exp(-(x * x + y * y))
        expected = np.array([(5.0 - 4.0 * x * x - 3.0 * y * y - 4.0j * x * y) * g,
                             0.0j])
        assert np.max(np.abs(got - expected)) < 1e-6, (x, y)


def test_free_dirac_squares_to_laplacian():
    # A = 0: D^2 psi = -Delta psi; for the Gaussian: (4 rho^2 - 4) e^{-rho^2}
    apply_D = dirac_closure(zero_field(), None, None, StencilSpec(0.01, 4))
    d2 = apply_D(apply_D(gaussian_spinor(1.0).value))
    x, y = 0.6, -0.3
    got = np.asarray(d2(x, y)).reshape(2)
    expected = (4.0 - 4.0 * (x * x + y * y)) * math.exp(-(x * x + y * y))
    assert abs(got[0] - expected) < 1e-7
    assert abs(got[1]) < 1e-9


# ---------------------------------------------------------------------------
# squared-operator identity: convergence orders


@pytest.mark.parametrize("P", [zero_field(), constant_field(1.0),
                               miller_simon(0.5)],
                         ids=["zero", "constant", "miller-simon"])
@pytest.mark.parametrize("psi", [gaussian_spinor(1.0), gaussian_pair_spinor(1.0)],
                         ids=["gaussian", "gaussian-pair"])
def test_lichnerowicz_identity_order4(P, psi):
    rep = convergence_order(
        lambda h: max_residual(lambda p, s: lichnerowicz_residual(P, psi, p, s),
                               StencilSpec(h, 4)), H_SEQ)
    at_floor = max(rep.residuals) <= 1e-12
    assert at_floor or (rep.converged and rep.order >= 3.5), rep


def test_lichnerowicz_identity_order2_scales_down():
    P = miller_simon(0.5)
    psi = gaussian_pair_spinor(1.0)
    rep = convergence_order(
        lambda h: max_residual(lambda p, s: lichnerowicz_residual(P, psi, p, s),
                               StencilSpec(h, 2)), H_SEQ)
    assert rep.converged and 1.5 <= rep.order <= 2.5, rep


# ---------------------------------------------------------------------------
# mass cross-term identity


def test_mass_identity_confining_order4():
    P = miller_simon(0.5)
    V = confining_mass(1.0, 1.0)
    psi = gaussian_pair_spinor(1.0)
    rep = convergence_order(
        lambda h: max_residual(lambda p, s: mass_identity_residual(P, V, psi, p, s),
                               StencilSpec(h, 4)), H_SEQ)
    assert rep.converged and rep.order >= 3.5, rep


def test_mass_identity_constant_v_exact():
    # constant V has no gradient cross-term; the identity is stencil-exact
    P = miller_simon(0.5)
    V = constant_scalar(0.7)
    psi = gaussian_pair_spinor(1.0)
    for h in H_SEQ:
        assert max_residual(lambda p, s: mass_identity_residual(P, V, psi, p, s),
                            StencilSpec(h, 4)) <= 1e-12


# ---------------------------------------------------------------------------
# rotation generator


@pytest.mark.parametrize("P", [zero_field(), miller_simon(0.5)],
                         ids=["zero", "miller-simon"])
def test_jz_commutator_vanishes_for_radial_gauges(P):
    psi = gaussian_pair_spinor(1.0)
    rep = convergence_order(
        lambda h: max_residual(lambda p, s: jz_commutator_residual(P, psi, p, s),
                               StencilSpec(h, 4)), H_SEQ)
    at_floor = max(rep.residuals) <= 1e-12
    assert at_floor or (rep.converged and rep.order >= 3.5), rep


def test_jz_commutator_negative_control():
    # the linear gauge A = (-y, 0) is not rotation covariant: the commutator
    # residual must NOT converge to zero
    P = constant_field(1.0)
    psi = gaussian_pair_spinor(1.0)
    r = max_residual(lambda p, s: jz_commutator_residual(P, psi, p, s),
                     StencilSpec(0.01, 4))
    assert r > 0.01, r


# ---------------------------------------------------------------------------
# diamagnetic inequality


DIA_CONFIGS = [
    (zero_field(), gaussian_spinor(1.0)),
    (miller_simon(0.5), gaussian_poly_spinor(1.0)),
    (constant_field(1.0), modulated_gaussian_spinor(2.0, -1.0)),
]


@pytest.mark.parametrize("P,phi", DIA_CONFIGS,
                         ids=["zero/gauss", "ms/poly", "const/modulated"])
def test_diamagnetic_no_violations(P, phi):
    rng = np.random.default_rng(11)
    samples = rng.uniform(-3.0, 3.0, size=(200, 2))
    rep = diamagnetic_check(P, phi, samples, StencilSpec(0.01, 4))
    assert rep.violations == 0
    assert rep.checked + len(rep.skipped) == 200


def test_diamagnetic_strict_slack_with_phase():
    # pure phase gradient, A = 0: |d|phi|| < |grad phi| strictly
    phi = modulated_gaussian_spinor(10.0, 0.0)
    samples = [(0.3, 0.1), (-0.5, 0.4), (0.9, -0.2)]
    rep = diamagnetic_check(zero_field(), phi, samples, StencilSpec(0.005, 4))
    assert rep.violations == 0
    assert rep.max_excess < -1.0  # slack at least |phi| * |k| order


# ---------------------------------------------------------------------------
# formal symmetry of the operator under grid quadrature


def test_pairing_defect_small_for_localized_fields():
    psi = gaussian_spinor(1.0)
    phi = gaussian_poly_spinor(1.0)
    defect = pairing_defect(miller_simon(0.5), confining_mass(1.0, 1.0), None,
                            psi, phi, half_width=6.0, n=49, s=StencilSpec(0.01, 4))
    assert defect < 1e-8, defect
