"""Pointwise verification of operator identities on closed-form fields.

Applies the first-order operator D = sum_j gamma_j d_j (plus magnetic,
mass, and electric terms) to closed-form spinor fields with centered
finite-difference stencils, and measures residuals of:

  * the squared-operator identity
        D_A(D_A psi) = H_A psi + i B gamma1 gamma2 psi,
    where H_A = -(dxx+dyy) - 2i(A . grad) - i(div A) + |A|^2 applied
    componentwise (positive-Laplacian convention),
  * the mass-coupling identity
        D_{A,V}(D_{A,V} psi) = D_A(D_A psi) + i dV.(nu psi) + V^2 psi,
  * rotation covariance [D_A, J_z] = 0 for radial-gauge potentials,
        J_z = -i(x d_y - y d_x) + (1/2) diag(1,-1),
  * the diamagnetic inequality |d|phi|| <= |(grad + iA) phi|.

All identity assertions downstream are convergence-order assertions
(residual decays at the stencil order as h shrinks), never absolute
thresholds; this keeps them scale-free in the field magnitudes.
Second derivatives are formed by applying the first-derivative stencil
twice so a single stencil code path covers every operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .clifford import clifford_mul, make_rep
from .fields import _FD_COEFFS, PotentialField, ScalarField

__all__ = [
    "ClosedFormSpinorField",
    "StencilSpec",
    "DiamagneticReport",
    "ConvergenceReport",
    "apply_dirac",
    "dirac_closure",
    "jz_closure",
    "lichnerowicz_residual",
    "mass_identity_residual",
    "jz_commutator_residual",
    "diamagnetic_check",
    "convergence_order",
    "pairing_defect",
    "gaussian_spinor",
    "gaussian_pair_spinor",
    "gaussian_poly_spinor",
    "modulated_gaussian_spinor",
    "constant_spinor",
    "spinor_from_config",
]

_REP = make_rep()


@dataclass(frozen=True)
class ClosedFormSpinorField:
    """Smooth two-component test field: value(x, y) -> complex pair.

    value accepts scalars or broadcasting arrays and returns an array of
    shape (2,) + broadcast shape.
    """

    value: Callable
    description: str = "spinor field"


@dataclass(frozen=True)
class StencilSpec:
    """Centered-difference stencil: step h and order (2 or 4)."""

    h: float
    order: int = 4

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"stencil.h: must be > 0, got {self.h!r}")
        if self.order not in (2, 4):
            raise ValueError(f"stencil.order: must be 2 or 4, got {self.order!r}")


# ---------------------------------------------------------------------------
# stencil differentiation of vector-valued maps


def _partial(fn: Callable, x, y, axis: int, s: StencilSpec):
    """Centered stencil d/dx_axis of fn(x, y); fn may return any array shape."""
    acc = None
    for k, c in _FD_COEFFS[s.order]:
        term = fn(x + k * s.h, y) if axis == 0 else fn(x, y + k * s.h)
        term = c * np.asarray(term, dtype=complex)
        acc = term if acc is None else acc + term
    return acc / s.h


def _mat(M: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Apply a 2x2 matrix along the leading spinor axis."""
    return np.einsum("ij,j...->i...", M, phi)


def _spinor_norm(v) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(v)) ** 2)))


# ---------------------------------------------------------------------------
# operator closures


def dirac_closure(P: PotentialField, V: Optional[ScalarField],
                  A0: Optional[ScalarField], s: StencilSpec) -> Callable:
    """Return a map sending a spinor function to the pointwise function

        x |-> (sum_j gamma_j d_j + i A. + i V nu + A0) fn  (x),

    with derivatives at the stencil order.  Composable: applying it twice
    yields the squared operator at nested-stencil accuracy.
    """

    def apply_to(fn: Callable) -> Callable:
        def dfn(x, y):
            val = np.asarray(fn(x, y), dtype=complex)
            dx = _partial(fn, x, y, 0, s)
            dy = _partial(fn, x, y, 1, s)
            out = clifford_mul((1.0, 0.0), dx) + clifford_mul((0.0, 1.0), dy)
            out = out + 1j * clifford_mul((P.a1(x, y), P.a2(x, y)), val)
            if V is not None:
                out = out + 1j * V.value(x, y) * _mat(_REP.nu, val)
            if A0 is not None:
                out = out + A0.value(x, y) * val
            return out

        return dfn

    return apply_to


def jz_closure(s: StencilSpec) -> Callable:
    """Total rotation generator J_z = -i(x d_y - y d_x) + (1/2) diag(1,-1)."""

    def apply_to(fn: Callable) -> Callable:
        def jfn(x, y):
            val = np.asarray(fn(x, y), dtype=complex)
            dx = _partial(fn, x, y, 0, s)
            dy = _partial(fn, x, y, 1, s)
            orbital = -1j * (np.asarray(x) * dy - np.asarray(y) * dx)
            return orbital + 0.5 * _mat(_REP.chirality.astype(complex), val)

        return jfn

    return apply_to


def apply_dirac(P: PotentialField, V: Optional[ScalarField], A0: Optional[ScalarField],
                psi: ClosedFormSpinorField, x: Sequence[float], s: StencilSpec):
    """Evaluate (D + iA. + iV nu + A0) psi at the point x = (x1, x2)."""
    return dirac_closure(P, V, A0, s)(psi.value)(x[0], x[1])


# ---------------------------------------------------------------------------
# identity residuals


def _bochner_side(P: PotentialField, fn: Callable, x, y, s: StencilSpec):
    """H_A fn + i B gamma1 gamma2 fn at (x, y), stencil derivatives.

    H_A = -(dxx + dyy) - 2i(a1 dx + a2 dy) - i(div A) + |A|^2, acting
    componentwise; the field term i B gamma1 gamma2 = B diag(1,-1).
    """
    val = np.asarray(fn(x, y), dtype=complex)
    dx = _partial(fn, x, y, 0, s)
    dy = _partial(fn, x, y, 1, s)
    dxx = _partial(lambda u, v: _partial(fn, u, v, 0, s), x, y, 0, s)
    dyy = _partial(lambda u, v: _partial(fn, u, v, 1, s), x, y, 1, s)
    a1 = P.a1(x, y)
    a2 = P.a2(x, y)
    h_a = (-(dxx + dyy)
           - 2j * (a1 * dx + a2 * dy)
           - 1j * P.div_a(x, y) * val
           + (a1 ** 2 + a2 ** 2) * val)
    field_term = P.b(x, y) * _mat(1j * _REP.omega, val)
    return h_a + field_term


def lichnerowicz_residual(P: PotentialField, psi: ClosedFormSpinorField,
                          x: Sequence[float], s: StencilSpec) -> float:
    """|D_A(D_A psi) - (H_A psi + i B gamma1 gamma2 psi)| at the point x."""
    apply_a = dirac_closure(P, None, None, s)
    lhs = apply_a(apply_a(psi.value))(x[0], x[1])
    rhs = _bochner_side(P, psi.value, x[0], x[1], s)
    return _spinor_norm(lhs - rhs)


def mass_identity_residual(P: PotentialField, V: ScalarField,
                           psi: ClosedFormSpinorField, x: Sequence[float],
                           s: StencilSpec) -> float:
    """|D_{A,V}^2 psi - (D_A^2 psi + i dV.(nu psi) + V^2 psi)| at x."""
    if V.grad is None:
        raise ValueError("mass_identity_residual: V.grad must be present")
    apply_av = dirac_closure(P, V, None, s)
    apply_a = dirac_closure(P, None, None, s)
    lhs = apply_av(apply_av(psi.value))(x[0], x[1])
    d2 = apply_a(apply_a(psi.value))(x[0], x[1])
    val = np.asarray(psi.value(x[0], x[1]), dtype=complex)
    gx, gy = V.grad(x[0], x[1])
    rhs = d2 + 1j * clifford_mul((gx, gy), _mat(_REP.nu, val)) + V.value(x[0], x[1]) ** 2 * val
    return _spinor_norm(lhs - rhs)


def jz_commutator_residual(P: PotentialField, psi: ClosedFormSpinorField,
                           x: Sequence[float], s: StencilSpec) -> float:
    """|D_A(J_z psi) - J_z(D_A psi)| at x.

    Decays at the stencil order for rotation-covariant (radial-gauge)
    potentials; stalls at a nonzero value otherwise.
    """
    apply_a = dirac_closure(P, None, None, s)
    jz = jz_closure(s)
    lhs = apply_a(jz(psi.value))(x[0], x[1])
    rhs = jz(apply_a(psi.value))(x[0], x[1])
    return _spinor_norm(lhs - rhs)


@dataclass(frozen=True)
class DiamagneticReport:
    violations: int
    max_excess: Optional[float]
    checked: int
    skipped: tuple
    tolerance: float


def diamagnetic_check(P: PotentialField, phi: ClosedFormSpinorField,
                      samples, s: StencilSpec) -> DiamagneticReport:
    """Count sample points violating |d|phi|| <= |(grad + iA) phi| + tol.

    tol = 100 * h^order absorbs stencil truncation.  Points with
    |phi| <= 1e-8 are skipped (the modulus is non-differentiable through
    zeros) and reported.
    """
    tol = 100.0 * s.h ** s.order

    def modulus(x, y):
        return np.sqrt(np.sum(np.abs(np.asarray(phi.value(x, y))) ** 2, axis=0))

    skipped = []
    violations = 0
    checked = 0
    max_excess = None
    for point in samples:
        px, py = float(point[0]), float(point[1])
        val = np.asarray(phi.value(px, py), dtype=complex)
        if _spinor_norm(val) <= 1e-8:
            skipped.append((px, py))
            continue
        gx = _partial(modulus, px, py, 0, s)
        gy = _partial(modulus, px, py, 1, s)
        lhs = float(np.hypot(np.real(gx), np.real(gy)))
        dxv = _partial(phi.value, px, py, 0, s)
        dyv = _partial(phi.value, px, py, 1, s)
        cov_x = dxv + 1j * P.a1(px, py) * val
        cov_y = dyv + 1j * P.a2(px, py) * val
        rhs = math.sqrt(float(np.sum(np.abs(cov_x) ** 2) + np.sum(np.abs(cov_y) ** 2)))
        excess = lhs - rhs
        checked += 1
        max_excess = excess if max_excess is None else max(max_excess, excess)
        if excess > tol:
            violations += 1
    return DiamagneticReport(violations=violations, max_excess=max_excess,
                             checked=checked, skipped=tuple(skipped), tolerance=tol)


@dataclass(frozen=True)
class ConvergenceReport:
    order: float
    converged: bool
    steps: tuple
    residuals: tuple


def convergence_order(residual_fn: Callable, h_sequence) -> ConvergenceReport:
    """Least-squares slope of log(residual) vs log(h) over a halving sweep.

    Requires >= 3 steps, each at most half the previous (1% slack).
    The converged flag drops when any residual grows by more than 10x
    as h decreases.
    """
    steps = [float(h) for h in h_sequence]
    if len(steps) < 3:
        raise ValueError(f"h_sequence: need >= 3 steps, got {len(steps)}")
    for a, b in zip(steps, steps[1:]):
        if not b <= 0.5 * a * 1.01:
            raise ValueError(
                f"h_sequence: each step must be <= half the previous (1% slack); got {b} after {a}"
            )
    residuals = [float(residual_fn(h)) for h in steps]
    converged = all(r2 <= 10.0 * r1 for r1, r2 in zip(residuals, residuals[1:]))
    floored = np.maximum(residuals, 1e-300)
    slope = float(np.polyfit(np.log(steps), np.log(floored), 1)[0])
    return ConvergenceReport(order=slope, converged=converged,
                             steps=tuple(steps), residuals=tuple(residuals))


def pairing_defect(P: PotentialField, V: Optional[ScalarField], A0: Optional[ScalarField],
                   psi: ClosedFormSpinorField, phi: ClosedFormSpinorField,
                   half_width: float, n: int, s: StencilSpec) -> float:
    """Grid-quadrature symmetry defect |<D psi, phi> - <psi, D phi>|.

    Both fields are sampled on an n x n grid over [-half_width, half_width]^2;
    for fields that effectively vanish at the window edge, the defect decays
    at the stencil order (defect of formal self-adjointness under quadrature).
    """
    coords = np.linspace(-half_width, half_width, n)
    xg, yg = np.meshgrid(coords, coords, indexing="ij")
    cell = (coords[1] - coords[0]) ** 2
    apply_op = dirac_closure(P, V, A0, s)
    dpsi = apply_op(psi.value)(xg, yg)
    dphi = apply_op(phi.value)(xg, yg)
    psi_v = np.asarray(psi.value(xg, yg), dtype=complex)
    phi_v = np.asarray(phi.value(xg, yg), dtype=complex)
    left = np.sum(np.conj(dpsi) * phi_v) * cell
    right = np.sum(np.conj(psi_v) * dphi) * cell
    return abs(left - right)


# ---------------------------------------------------------------------------
# closed-form spinor corpus


def constant_spinor(c1: complex = 1.0, c2: complex = 0.0) -> ClosedFormSpinorField:
    def value(x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.stack([np.full(shape, c1, dtype=complex),
                         np.full(shape, c2, dtype=complex)])

    return ClosedFormSpinorField(value=value, description=f"constant ({c1}, {c2})")


def gaussian_spinor(rate: float = 1.0) -> ClosedFormSpinorField:
    """psi = (exp(-rate*rho^2), 0)."""

    def value(x, y):
        g = np.exp(-rate * (np.asarray(x) ** 2 + np.asarray(y) ** 2))
        return np.stack([g.astype(complex), np.zeros_like(g, dtype=complex)])

    return ClosedFormSpinorField(value=value, description=f"gaussian rate={rate}, first component")


def gaussian_pair_spinor(rate: float = 1.0) -> ClosedFormSpinorField:
    """psi = exp(-rate*rho^2) * (1, i)."""

    def value(x, y):
        g = np.exp(-rate * (np.asarray(x) ** 2 + np.asarray(y) ** 2)).astype(complex)
        return np.stack([g, 1j * g])

    return ClosedFormSpinorField(value=value, description=f"gaussian rate={rate} times (1, i)")


def gaussian_poly_spinor(rate: float = 1.0) -> ClosedFormSpinorField:
    """psi = (exp(-rate*rho^2), (x+iy) exp(-rate*rho^2))."""

    def value(x, y):
        xx = np.asarray(x)
        yy = np.asarray(y)
        g = np.exp(-rate * (xx ** 2 + yy ** 2)).astype(complex)
        return np.stack([g, (xx + 1j * yy) * g])

    return ClosedFormSpinorField(value=value,
                                 description=f"gaussian rate={rate} with (x+iy) partner")


def modulated_gaussian_spinor(k1: float, k2: float, rate: float = 1.0) -> ClosedFormSpinorField:
    """psi = (exp(i k.x) exp(-rate*rho^2), 0)."""

    def value(x, y):
        xx = np.asarray(x)
        yy = np.asarray(y)
        g = np.exp(1j * (k1 * xx + k2 * yy)) * np.exp(-rate * (xx ** 2 + yy ** 2))
        return np.stack([g.astype(complex), np.zeros_like(g, dtype=complex)])

    return ClosedFormSpinorField(value=value,
                                 description=f"plane wave k=({k1},{k2}) times gaussian rate={rate}")


def spinor_from_config(spec: dict) -> ClosedFormSpinorField:
    """Build a corpus spinor from {"family": ..., parameters...}."""
    family = spec.get("family")
    if family == "constant":
        return constant_spinor(spec.get("c1", 1.0), spec.get("c2", 0.0))
    if family == "gaussian":
        return gaussian_spinor(spec.get("rate", 1.0))
    if family == "gaussian-pair":
        return gaussian_pair_spinor(spec.get("rate", 1.0))
    if family == "gaussian-poly":
        return gaussian_poly_spinor(spec.get("rate", 1.0))
    if family == "modulated-gaussian":
        return modulated_gaussian_spinor(spec.get("k1", 1.0), spec.get("k2", 0.0),
                                         spec.get("rate", 1.0))
    raise ValueError(
        f"spinor.family: unknown family {family!r} (expected one of 'constant', "
        "'gaussian', 'gaussian-pair', 'gaussian-poly', 'modulated-gaussian')"
    )
