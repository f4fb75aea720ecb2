"""Closed-form and reconstructed potential data on flat R^2.

Provides magnetic one-forms A = (a1, a2) with field B = curl A and
divergence div A, scalar potentials (electric, mass, gauge functions),
the slowly-decaying radial-gauge family A = (-y, x)/(1+rho)^gamma, a
gauge-potential reconstruction A1(x,y) = -int_0^y B(x,t) dt from a field
map, and an empirical checker for the confinement hypotheses used by the
discrete-spectrum experiments.

All field callables are numpy-vectorized: they accept scalars or arrays
for (x, y) and broadcast elementwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

__all__ = [
    "PotentialField",
    "ScalarField",
    "Box",
    "zero_field",
    "miller_simon",
    "constant_field",
    "gauge_from_field",
    "gauge_shift",
    "confining_mass",
    "constant_scalar",
    "zero_scalar",
    "xy_gauge_function",
    "check_confinement_conditions",
    "potential_from_config",
    "scalar_from_config",
    "fd_derivative",
]

# ---------------------------------------------------------------------------
# finite-difference helpers (centered, order 2 or 4)

_FD_COEFFS = {
    2: ((-1, -0.5), (1, 0.5)),
    4: ((-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)),
}


def fd_derivative(fn: Callable, x, y, axis: int, h: float, order: int = 4):
    """Centered finite-difference d/dx_axis of a scalar map fn(x, y)."""
    coeffs = _FD_COEFFS[order]
    acc = 0.0
    for k, c in coeffs:
        if axis == 0:
            acc = acc + c * fn(x + k * h, y)
        else:
            acc = acc + c * fn(x, y + k * h)
    return acc / h


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Box:
    """Axis-aligned square truncation window: center +/- half_width."""

    center: tuple[float, float]
    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError(f"box.half_width: must be > 0, got {self.half_width}")

    def contains(self, x, y, margin: float = 0.0) -> bool:
        cx, cy = self.center
        hw = self.half_width - margin
        return bool(np.all(np.abs(np.asarray(x) - cx) <= hw) and np.all(np.abs(np.asarray(y) - cy) <= hw))


@dataclass(frozen=True)
class PotentialField:
    """Magnetic data: one-form components, field B = curl A, and div A.

    a1, a2  : maps R^2 -> R, the one-form components (units 1/length)
    b       : map R^2 -> R, the curl dA coefficient (1/length^2)
    div_a   : map R^2 -> R (1/length^2)
    gamma_exponent : decay exponent for radial-gauge family members, else None
    provenance     : "closed-form" or "reconstructed"
    gauge_parts    : (base PotentialField, gauge ScalarField) when the field
                     was produced by gauge_shift; enables exact-difference
                     link integrals in lattice assembly.
    """

    a1: Callable
    a2: Callable
    b: Callable
    div_a: Callable
    gamma_exponent: Optional[float] = None
    provenance: str = "closed-form"
    name: str = "potential"
    gauge_parts: Optional[tuple] = None

    def A(self, x, y):
        return self.a1(x, y), self.a2(x, y)

    def B(self, x, y):
        return self.b(x, y)

    def divA(self, x, y):
        return self.div_a(x, y)

    def A_norm(self, x, y):
        ax, ay = self.A(x, y)
        return np.hypot(ax, ay)


@dataclass(frozen=True)
class ScalarField:
    """Scalar potential data: electric A0, mass V, or gauge function f."""

    value: Callable
    grad: Optional[Callable] = None  # (x, y) -> (gx, gy)
    laplacian: Optional[Callable] = None
    role: str = "mass V"
    name: str = "scalar"

    def grad_or_fd(self, x, y, h: float = 1e-3, order: int = 4):
        if self.grad is not None:
            return self.grad(x, y)
        gx = fd_derivative(self.value, x, y, 0, h, order)
        gy = fd_derivative(self.value, x, y, 1, h, order)
        return gx, gy

    def laplacian_or_fd(self, x, y, h: float = 1e-3, order: int = 4):
        if self.laplacian is not None:
            return self.laplacian(x, y)
        gx = lambda u, v: self.grad_or_fd(u, v, h, order)[0]
        gy = lambda u, v: self.grad_or_fd(u, v, h, order)[1]
        return fd_derivative(gx, x, y, 0, h, order) + fd_derivative(gy, x, y, 1, h, order)


def _zeros(x, y):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


# ---------------------------------------------------------------------------
# closed-form families


def zero_field() -> PotentialField:
    """A = 0, B = 0, div A = 0."""
    return PotentialField(a1=_zeros, a2=_zeros, b=_zeros, div_a=_zeros, name="zero")


def miller_simon(gamma_exponent: float) -> PotentialField:
    """Radial gauge field A = (-y, x)/(1+rho)^gamma with 0 < gamma < 1.

    Closed forms: B(rho) = 2/(1+rho)^gamma - gamma*rho/(1+rho)^(gamma+1),
    div A = 0.  |A| = rho/(1+rho)^gamma is unbounded while B -> 0 at
    infinity; the slow decay drives the dense-point-spectrum experiments.
    """
    g = float(gamma_exponent)
    if not (0.0 < g < 1.0):
        raise ValueError(
            f"gamma_exponent: must lie in the open interval (0, 1), got {g!r}"
        )

    def a1(x, y):
        rho = np.hypot(x, y)
        return -y / (1.0 + rho) ** g

    def a2(x, y):
        rho = np.hypot(x, y)
        return x / (1.0 + rho) ** g

    def b(x, y):
        rho = np.hypot(x, y)
        return 2.0 / (1.0 + rho) ** g - g * rho / (1.0 + rho) ** (g + 1.0)

    return PotentialField(
        a1=a1, a2=a2, b=b, div_a=_zeros, gamma_exponent=g,
        name=f"miller-simon{{gamma={g}}}",
    )


def constant_field(b: float) -> PotentialField:
    """Uniform field b in the linear gauge A = (-b*y, 0)."""
    bb = float(b)

    def a1(x, y):
        return -bb * y + _zeros(x, y)

    def bmap(x, y):
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, bb)

    return PotentialField(a1=a1, a2=_zeros, b=bmap, div_a=_zeros, name=f"constant{{b={bb}}}")


def confining_mass(power: float, scale: float) -> ScalarField:
    """Smooth confining scalar V = scale*(1+rho^2)^(power/2), power >= 1.

    The gradient magnitude satisfies |dV| <= power * V, so the derivative
    growth condition used by the discrete-spectrum experiments holds.
    """
    p = float(power)
    s = float(scale)
    if not p >= 1.0:
        raise ValueError(f"power: must be >= 1, got {p!r}")
    if not s > 0.0:
        raise ValueError(f"scale: must be > 0, got {s!r}")
    q = p / 2.0

    def value(x, y):
        r2 = np.asarray(x) ** 2 + np.asarray(y) ** 2
        return s * (1.0 + r2) ** q

    def grad(x, y):
        r2 = np.asarray(x) ** 2 + np.asarray(y) ** 2
        common = s * p * (1.0 + r2) ** (q - 1.0)
        return common * np.asarray(x), common * np.asarray(y)

    def laplacian(x, y):
        r2 = np.asarray(x) ** 2 + np.asarray(y) ** 2
        return 2.0 * s * p * (1.0 + r2) ** (q - 2.0) * ((q - 1.0) * r2 + 1.0 + r2)

    return ScalarField(
        value=value, grad=grad, laplacian=laplacian, role="mass V",
        name=f"confining{{power={p},scale={s}}}",
    )


def constant_scalar(c: float, role: str = "mass V", name: Optional[str] = None) -> ScalarField:
    cc = float(c)

    def value(x, y):
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, cc)

    def grad(x, y):
        return _zeros(x, y), _zeros(x, y)

    return ScalarField(value=value, grad=grad, laplacian=_zeros, role=role,
                       name=name or f"constant{{value={cc}}}")


def zero_scalar(role: str = "mass V") -> ScalarField:
    return constant_scalar(0.0, role=role, name="zero")


def xy_gauge_function(c: float = 1.0) -> ScalarField:
    """Gauge function f = c*x*y with closed-form gradient (c*y, c*x)."""
    cc = float(c)

    def value(x, y):
        return cc * np.asarray(x) * np.asarray(y)

    def grad(x, y):
        return cc * np.asarray(y) + _zeros(x, y), cc * np.asarray(x) + _zeros(x, y)

    return ScalarField(value=value, grad=grad, laplacian=_zeros,
                       role="gauge function f", name=f"xy{{c={cc}}}")


# ---------------------------------------------------------------------------
# gauge machinery


def gauge_shift(P: PotentialField, f: ScalarField) -> PotentialField:
    """Shift the one-form by an exact differential: A -> A + grad f.

    B is unchanged.  div A gains the Laplacian of f (closed form when f
    provides one, otherwise finite differences of f at evaluation time).
    The returned field remembers (P, f) so lattice assembly can compute
    the grad-f part of link integrals as exact endpoint differences.
    """
    if f.grad is None:
        raise ValueError("gauge_shift: f.grad must be present (closed-form gradient)")

    def a1(x, y):
        return P.a1(x, y) + f.grad(x, y)[0]

    def a2(x, y):
        return P.a2(x, y) + f.grad(x, y)[1]

    def div_a(x, y):
        return P.div_a(x, y) + f.laplacian_or_fd(x, y)

    return PotentialField(
        a1=a1, a2=a2, b=P.b, div_a=div_a,
        gamma_exponent=None, provenance=P.provenance,
        name=f"{P.name}+d({f.name})", gauge_parts=(P, f),
    )


def _simpson_batch(bfun, x, y0, y1, step: float, chunk: int = 200_000):
    """Per-point integrals int_{y0}^{y1} bfun(x, t) dt, composite Simpson.

    A common even subinterval count is chosen from the largest |y1-y0| in
    the batch so every point integrates with substep <= step.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y0 = np.broadcast_to(np.asarray(y0, dtype=float), x.shape)
    y1 = np.broadcast_to(np.asarray(y1, dtype=float), x.shape)
    span = y1 - y0
    longest = float(np.max(np.abs(span))) if span.size else 0.0
    nsub = max(2, 2 * math.ceil(longest / (2.0 * step))) if longest > 0 else 2
    weights = np.ones(nsub + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    s_nodes = np.linspace(0.0, 1.0, nsub + 1)

    out = np.empty(x.shape)
    flat_x = x.ravel()
    flat_y0 = y0.ravel()
    flat_span = span.ravel()
    flat_out = out.ravel()
    block = max(1, chunk // (nsub + 1))
    for start in range(0, flat_x.size, block):
        sl = slice(start, min(start + block, flat_x.size))
        t = flat_y0[sl, None] + flat_span[sl, None] * s_nodes[None, :]
        vals = bfun(flat_x[sl, None] + 0.0 * t, t)
        flat_out[sl] = (vals @ weights) * (flat_span[sl] / nsub) / 3.0
    return out


def gauge_from_field(B: Callable, box: Box, quadrature_step: float) -> PotentialField:
    """Reconstruct a potential with curl = B on a simply connected box.

    In box-centered coordinates: A1(x, y) = -int_{cy}^{y} B(x, t) dt and
    A2 = 0, evaluated by composite Simpson with substep <= quadrature_step.
    The sup bound |A| <= box.half_width * sup|B| holds by construction.
    div A (= d/dx A1) is supplied by finite differences of the
    reconstruction.
    """
    if not quadrature_step > 0:
        raise ValueError(f"quadrature_step: must be > 0, got {quadrature_step!r}")
    if quadrature_step > box.half_width / 8.0:
        raise ValueError(
            "quadrature_step: must be <= box.half_width/8 "
            f"(= {box.half_width / 8.0}), got {quadrature_step!r}"
        )
    cy = box.center[1]
    step = float(quadrature_step)

    def a1(x, y):
        scalar_in = np.isscalar(x) and np.isscalar(y)
        xx = np.atleast_1d(np.asarray(x, dtype=float))
        yy = np.broadcast_to(np.asarray(y, dtype=float), np.broadcast(np.asarray(x), np.asarray(y)).shape)
        xx = np.broadcast_to(xx, yy.shape)
        vals = -_simpson_batch(B, xx, np.full(yy.shape, cy), yy, step)
        return float(vals[()] if vals.shape == () else vals.ravel()[0]) if scalar_in else vals

    def div_a(x, y):
        return fd_derivative(a1, x, y, axis=0, h=step, order=4)

    def bmap(x, y):
        return B(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    return PotentialField(
        a1=a1, a2=_zeros, b=bmap, div_a=div_a,
        provenance="reconstructed", name="reconstructed",
    )


# ---------------------------------------------------------------------------
# confinement-hypothesis checker


def check_confinement_conditions(P: PotentialField, V: ScalarField, A0: ScalarField,
                                 radii, epsilon: float) -> dict:
    """Empirical per-radius check of the four confinement hypotheses.

    Samples 64 equispaced angles on each circle and reports, per radius:
    min |V|, sup |A|, sup of (|dV|+|dA|+|dA0|+|div A|)/|V| and sup |A0|/|V|.
    Flags (sampling evidence, not proof):

      (i)   |V| -> infinity      : min|V| strictly increasing along radii
      (ii)  A bounded            : sup|A| does not grow (10% slack)
      (iii) derivatives = O(V)   : the derivative/V ratio does not grow
      (iv)  |A0| <= epsilon |V|  : holds at every sampled point

    Radii where min |V| = 0 are flagged unconditionally (division guard).
    """
    radii = [float(r) for r in radii]
    if len(radii) < 2:
        raise ValueError("radii: need at least two radii to compare growth")
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon: must lie in (0, 1), got {epsilon!r}")
    theta = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)

    rows = []
    degenerate = False
    for r in radii:
        x = r * np.cos(theta)
        y = r * np.sin(theta)
        vabs = np.abs(V.value(x, y))
        asup = float(np.max(P.A_norm(x, y)))
        gvx, gvy = V.grad_or_fd(x, y)
        g0x, g0y = A0.grad_or_fd(x, y)
        deriv = (np.hypot(gvx, gvy) + np.abs(P.B(x, y))
                 + np.hypot(g0x, g0y) + np.abs(P.divA(x, y)))
        a0abs = np.abs(A0.value(x, y))
        minv = float(np.min(vabs))
        if minv == 0.0:
            degenerate = True
            rows.append({"radius": r, "min_V": 0.0, "sup_A": asup,
                         "sup_deriv_ratio": math.inf, "sup_A0_ratio": math.inf,
                         "degenerate": True})
            continue
        rows.append({
            "radius": r,
            "min_V": minv,
            "sup_A": asup,
            "sup_deriv_ratio": float(np.max(deriv / vabs)),
            "sup_A0_ratio": float(np.max(a0abs / vabs)),
            "degenerate": False,
        })

    slack = 1.10
    tiny = 1e-12
    minv_seq = [row["min_V"] for row in rows]
    supa_seq = [row["sup_A"] for row in rows]
    ratio_seq = [row["sup_deriv_ratio"] for row in rows]
    a0_seq = [row["sup_A0_ratio"] for row in rows]

    flag_i = (not degenerate) and all(b > a for a, b in zip(minv_seq, minv_seq[1:]))
    flag_ii = supa_seq[-1] <= supa_seq[0] * slack + tiny
    flag_iii = (not degenerate) and (ratio_seq[-1] <= ratio_seq[0] * slack + tiny)
    flag_iv = (not degenerate) and all(v <= epsilon for v in a0_seq)

    return {
        "per_radius": rows,
        "epsilon": epsilon,
        "flags": {
            "i_V_to_infinity": flag_i,
            "ii_A_bounded": flag_ii,
            "iii_derivatives_O_of_V": flag_iii,
            "iv_A0_below_epsilon_V": flag_iv,
        },
        "degenerate_radii": degenerate,
    }


# ---------------------------------------------------------------------------
# named-family construction from configuration mappings


def potential_from_config(spec: dict) -> PotentialField:
    """Build a PotentialField from {"family": ..., parameters...}."""
    family = spec.get("family")
    if family == "miller-simon":
        if "gamma" not in spec:
            raise ValueError("potential.gamma: required for family 'miller-simon'")
        gamma = spec["gamma"]
        if not (0.0 < float(gamma) < 1.0):
            raise ValueError(
                f"potential.gamma: must lie in the open interval (0, 1), got {gamma!r}"
            )
        return miller_simon(gamma)
    if family == "constant":
        return constant_field(spec.get("b", 1.0))
    if family == "zero":
        return zero_field()
    raise ValueError(
        f"potential.family: unknown family {family!r} "
        "(expected one of 'miller-simon', 'constant', 'zero')"
    )


def scalar_from_config(spec: Optional[dict], role: str = "mass V") -> ScalarField:
    """Build a ScalarField from {"family": ..., parameters...} (None -> 0)."""
    if spec is None:
        return zero_scalar(role)
    family = spec.get("family")
    if family == "confining":
        power = spec.get("power", 1.0)
        scale = spec.get("scale", 1.0)
        if not float(power) >= 1.0:
            raise ValueError(f"scalar.power: must be >= 1, got {power!r}")
        if not float(scale) > 0.0:
            raise ValueError(f"scalar.scale: must be > 0, got {scale!r}")
        return confining_mass(power, scale)
    if family == "constant":
        return constant_scalar(spec.get("value", 0.0), role=role)
    if family == "zero":
        return zero_scalar(role)
    raise ValueError(
        f"scalar.family: unknown family {family!r} "
        "(expected one of 'confining', 'constant', 'zero')"
    )
