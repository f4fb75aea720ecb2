"""Concrete two-dimensional Clifford module over flat R^2.

Fixes a 2x2 matrix representation in which tangent vectors act as
skew-adjoint endomorphisms squaring to -|v|^2:

    gamma1 = i*sigma1,  gamma2 = i*sigma2,

with sigma1, sigma2 the first two Pauli matrices.  The grading operator
(chirality) is sigma3 = diag(1,-1) and the odd mass map is nu = i*sigma3,
so that i*gamma1*gamma2 = diag(1,-1) holds exactly.  All entries are
exact small integers (times i), so the algebraic relations below are
checked for *exact* zero violation, not within a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["CliffordRep", "make_rep", "clifford_mul", "check_relations"]

_SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _frozen(mat: np.ndarray) -> np.ndarray:
    out = np.asarray(mat, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CliffordRep:
    """The fixed 2x2 generators and derived operators.

    gamma1, gamma2 : Clifford generators ({gamma_j, gamma_k} = -2 delta_jk).
    nu             : skew-adjoint odd map anticommuting with gamma1, gamma2.
    omega          : gamma1 @ gamma2 (volume element).
    chirality      : diag(1,-1), the Z2-grading; equals i*omega.
    """

    gamma1: np.ndarray
    gamma2: np.ndarray
    nu: np.ndarray
    omega: np.ndarray
    chirality: np.ndarray


def make_rep() -> CliffordRep:
    """Return the fixed representation (immutable matrices)."""
    gamma1 = 1j * _SIGMA1
    gamma2 = 1j * _SIGMA2
    nu = 1j * _SIGMA3
    omega = gamma1 @ gamma2
    chirality = _SIGMA3.copy()
    return CliffordRep(
        gamma1=_frozen(gamma1),
        gamma2=_frozen(gamma2),
        nu=_frozen(nu),
        omega=_frozen(omega),
        chirality=_frozen(chirality),
    )


def clifford_mul(v, phi):
    """Clifford action (v1*gamma1 + v2*gamma2) applied to the spinor phi.

    Parameters
    ----------
    v : pair of reals (or arrays, broadcast elementwise)
    phi : pair of complex values (or arrays)

    Returns the image spinor as an array whose leading axis has length 2.
    In components: v.gamma = [[0, i v1 + v2], [i v1 - v2, 0]].
    """
    v1, v2 = v[0], v[1]
    p1, p2 = phi[0], phi[1]
    out1 = (1j * v1 + v2) * p2
    out2 = (1j * v1 - v2) * p1
    return np.stack([np.asarray(out1, dtype=complex), np.asarray(out2, dtype=complex)])


def _maxabs(mat: np.ndarray) -> float:
    return float(np.max(np.abs(mat)))


def check_relations(rep: CliffordRep) -> dict[str, float]:
    """Max absolute violation of every algebraic relation of the module.

    For make_rep() every reported violation is exactly 0.0.
    """
    g1, g2, nu, omega, chi = rep.gamma1, rep.gamma2, rep.nu, rep.omega, rep.chirality
    eye = np.eye(2, dtype=complex)
    report = {
        # {gamma_j, gamma_k} = -2 delta_jk
        "anticommutator_11": _maxabs(g1 @ g1 + g1 @ g1 + 2.0 * eye),
        "anticommutator_12": _maxabs(g1 @ g2 + g2 @ g1),
        "anticommutator_22": _maxabs(g2 @ g2 + g2 @ g2 + 2.0 * eye),
        # skew-adjointness of the generators and of nu
        "skew_adjoint_gamma1": _maxabs(g1.conj().T + g1),
        "skew_adjoint_gamma2": _maxabs(g2.conj().T + g2),
        "skew_adjoint_nu": _maxabs(nu.conj().T + nu),
        # nu anticommutes with Clifford multiplication and squares to -1
        "nu_anticommutes_gamma1": _maxabs(nu @ g1 + g1 @ nu),
        "nu_anticommutes_gamma2": _maxabs(nu @ g2 + g2 @ nu),
        "nu_squared_plus_identity": _maxabs(nu @ nu + eye),
        # volume element and grading
        "omega_equals_gamma1_gamma2": _maxabs(omega - g1 @ g2),
        "i_omega_equals_diag_1_m1": _maxabs(1j * omega - _SIGMA3),
        "chirality_anticommutes_gamma1": _maxabs(chi @ g1 + g1 @ chi),
        "chirality_anticommutes_gamma2": _maxabs(chi @ g2 + g2 @ chi),
        "chirality_squared_minus_identity": _maxabs(chi @ chi - eye),
    }
    return report
