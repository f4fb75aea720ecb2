"""Eigensolvers, quasimode construction, and spectral gap metrics.

Three solver tiers, cross-validated against each other by the test
suite:

  * tridiag_eigs   — Sturm-sequence bisection for symmetric tridiagonal
                     operators; eigenvalue counts in intervals are exact,
                     eigenvectors by inverse iteration on demand.
  * lanczos_lowest — Lanczos with full reorthogonalization for sparse
                     Hermitian operators, deterministic via a fixed
                     recorded seed; the projected problem is solved with
                     the same Sturm machinery.
  * dense_eigs     — dense Hermitian oracle for small matrices.

Also provides the localized plane-wave bump states ("quasimodes") used
to probe approximate spectrum: psi = e^{i f}, e^{i k.x} g(|x - q|) Phi
with a C^2 radial cutoff g equal to 1 inside radius n and 0 outside 2n,
the residual pair r = |(H - lambda) psi| / |psi| and its resolvent-
weighted variant, and max/mean gap statistics over spectral windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fields import ScalarField
from .lattice import GridSpec, SparseHermitian, grid_nodes

__all__ = [
    "EigenResult",
    "QuasimodeSpec",
    "WeylResidual",
    "SpacingMetrics",
    "tridiag_eigs",
    "lanczos_lowest",
    "dense_eigs",
    "quasimode",
    "weyl_residual",
    "spacing_metrics",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 1729


# ---------------------------------------------------------------------------
# results


@dataclass
class EigenResult:
    """Sorted eigenvalues with per-pair residual certificates.

    residuals are |Hv - lambda v| when vectors are computed, otherwise
    the certified bisection interval half-widths; either way the spectrum
    intersects [value - residual, value + residual] for converged pairs.
    """

    values: np.ndarray
    vectors: Optional[np.ndarray]
    residuals: np.ndarray
    solver: str
    iterations: int
    converged: bool = True
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "values": [float(v) for v in self.values],
            "residuals": [float(r) for r in self.residuals],
            "solver": self.solver,
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "meta": {k: (float(v) if isinstance(v, (np.floating,)) else v)
                     for k, v in self.meta.items()},
        }


# ---------------------------------------------------------------------------
# Sturm-sequence machinery

def _sturm_counts_kernel(d, e2, shifts, out):
    for j in range(shifts.shape[0]):
        x = shifts[j]
        cnt = 0
        q = d[0] - x
        if q < 0.0:
            cnt += 1
        for i in range(1, d.shape[0]):
            denom = q
            if denom == 0.0:
                denom = 1e-300
            q = d[i] - x - e2[i - 1] / denom
            if q < 0.0:
                cnt += 1
        out[j] = cnt


try:  # compiled kernel when available; the numpy fallback is identical
    import numba

    _sturm_counts_fast = numba.njit(cache=True, fastmath=False)(_sturm_counts_kernel)

    def _sturm_counts(d, e2, shifts):
        out = np.empty(shifts.shape[0], dtype=np.int64)
        _sturm_counts_fast(d, e2, shifts, out)
        return out

except Exception:  # pragma: no cover - exercised only without numba

    def _sturm_counts(d, e2, shifts):
        q = d[0] - shifts
        cnt = (q < 0.0).astype(np.int64)
        for i in range(1, d.shape[0]):
            q = np.where(q == 0.0, 1e-300, q)
            q = d[i] - shifts - e2[i - 1] / q
            cnt += q < 0.0
        return cnt


def _as_tridiag(T) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(T, "diagonal") and hasattr(T, "offdiagonal"):
        d = np.asarray(T.diagonal, dtype=float)
        e = np.asarray(T.offdiagonal, dtype=float)
    else:
        d, e = T
        d = np.asarray(d, dtype=float)
        e = np.asarray(e, dtype=float)
    if e.shape[0] not in (0, d.shape[0] - 1):
        raise ValueError(
            f"offdiagonal: expected length {d.shape[0] - 1}, got {e.shape[0]}"
        )
    return d, e


def _gershgorin(d: np.ndarray, e: np.ndarray) -> tuple[float, float]:
    rad = np.zeros_like(d)
    if e.size:
        rad[:-1] += np.abs(e)
        rad[1:] += np.abs(e)
    return float(np.min(d - rad)), float(np.max(d + rad))


def _bisect_indices(d: np.ndarray, e: np.ndarray, indices: np.ndarray,
                    tol: float) -> tuple[np.ndarray, np.ndarray, int]:
    """Bisection for the (1-based) indexed eigenvalues; exact Sturm counts.

    Maintains count(< lo_j) < j <= count(< hi_j) per index, so the final
    interval provably brackets the j-th smallest eigenvalue.
    """
    e2 = e ** 2
    lo0, hi0 = _gershgorin(d, e)
    span = max(hi0 - lo0, 1e-30)
    lo = np.full(indices.shape[0], lo0 - 1e-12 * span - 1e-300)
    hi = np.full(indices.shape[0], hi0 + 1e-12 * span + 1e-300)
    sweeps = 0
    while float(np.max(hi - lo)) > tol:
        mid = 0.5 * (lo + hi)
        counts = _sturm_counts(d, e2, mid)
        take_hi = counts >= indices
        hi = np.where(take_hi, mid, hi)
        lo = np.where(take_hi, lo, mid)
        sweeps += 1
        if sweeps > 200:  # 2^-200 of the Gershgorin span: unreachable tol
            break
    return 0.5 * (lo + hi), 0.5 * (hi - lo), sweeps


def _inverse_iteration_vectors(d: np.ndarray, e: np.ndarray, values: np.ndarray,
                               rng: np.random.Generator) -> np.ndarray:
    n = d.shape[0]
    K = values.shape[0]
    V = np.empty((n, K))
    scale = max(np.max(np.abs(values), initial=0.0), 1.0)
    cluster_tol = 1e-8 * scale
    ab = np.zeros((3, n))
    if e.size:
        ab[0, 1:] = e
        ab[2, :-1] = e
    for j in range(K):
        lam = values[j]
        cluster = [i for i in range(j) if abs(values[i] - lam) <= cluster_tol]
        shift = lam + (1e-12 + 1e-13 * len(cluster)) * scale
        v = rng.standard_normal(n)
        for _ in range(4):
            for i in cluster:
                v -= np.dot(V[:, i], v) * V[:, i]
            nv = np.linalg.norm(v)
            if nv == 0.0:
                v = rng.standard_normal(n)
                nv = np.linalg.norm(v)
            v /= nv
            ab[1, :] = d - shift
            try:
                v = scipy.linalg.solve_banded((1, 1), ab, v)
            except np.linalg.LinAlgError:
                shift += 1e-10 * scale
                continue
        for i in cluster:
            v -= np.dot(V[:, i], v) * V[:, i]
        V[:, j] = v / np.linalg.norm(v)
    return V


def _tridiag_matvec(d: np.ndarray, e: np.ndarray, V: np.ndarray) -> np.ndarray:
    out = d[:, None] * V
    if e.size:
        out[:-1] += e[:, None] * V[1:]
        out[1:] += e[:, None] * V[:-1]
    return out


def tridiag_eigs(T, count: Optional[int] = None,
                 interval: Optional[Sequence[float]] = None,
                 vectors: bool = False, seed: int = DEFAULT_SEED,
                 tol: Optional[float] = None) -> EigenResult:
    """Eigenvalues of a symmetric tridiagonal operator by Sturm bisection.

    Exactly one of `count` (lowest K) or `interval` ([a, b]; the number of
    returned eigenvalues is the exact count in the closed interval) must
    be given.  `tol` is the absolute half-width at which bisection stops;
    default 1e-10 * max(1, |spectral bound|).
    """
    d, e = _as_tridiag(T)
    n = d.shape[0]
    if (count is None) == (interval is None):
        raise ValueError("tridiag_eigs: give exactly one of count or interval")
    lo0, hi0 = _gershgorin(d, e)
    if tol is None:
        tol = 1e-10 * max(1.0, abs(lo0), abs(hi0))
    elif not tol > 0.0:
        raise ValueError(f"tol: must be > 0, got {tol!r}")
    e2 = e ** 2

    if count is not None:
        if not 1 <= count <= n:
            raise ValueError(f"count: must be in [1, {n}], got {count}")
        indices = np.arange(1, count + 1)
    else:
        a, b = float(interval[0]), float(interval[1])
        if a >= b:
            raise ValueError(f"interval: need a < b, got [{a}, {b}]")
        below_a = int(_sturm_counts(d, e2, np.array([a]))[0])
        below_b = int(_sturm_counts(d, e2, np.array([np.nextafter(b, np.inf)]))[0])
        indices = np.arange(below_a + 1, below_b + 1)
        if indices.size == 0:
            return EigenResult(values=np.empty(0), vectors=None,
                               residuals=np.empty(0), solver="sturm-bisection",
                               iterations=0, meta={"tol": tol, "count_in_interval": 0})

    values, half_widths, sweeps = _bisect_indices(d, e, indices, tol)
    vecs = None
    residuals = half_widths
    if vectors:
        rng = np.random.default_rng(seed)
        vecs = _inverse_iteration_vectors(d, e, values, rng)
        residuals = np.linalg.norm(_tridiag_matvec(d, e, vecs) - values[None, :] * vecs,
                                   axis=0)
    return EigenResult(values=values, vectors=vecs, residuals=residuals,
                       solver="sturm-bisection", iterations=sweeps,
                       meta={"tol": tol, "seed": seed,
                             "certified_half_widths": [float(w) for w in half_widths]})


# ---------------------------------------------------------------------------
# Lanczos with full reorthogonalization


def _as_matrix(H):
    if isinstance(H, SparseHermitian):
        return H.entries
    return H


def lanczos_lowest(H, K: int, tol: float = 1e-8, seed: int = DEFAULT_SEED,
                   max_iter: Optional[int] = None) -> EigenResult:
    """Lowest K eigenpairs of a Hermitian operator, |Hv - lv| <= tol*|H|_est.

    Full reorthogonalization (classical Gram-Schmidt, applied twice) at
    every step; deterministic start vector from the recorded seed.  The
    projected tridiagonal problem is solved with the in-house Sturm
    machinery.  Non-convergence after max_iter returns partial results
    with converged=False.
    """
    mat = _as_matrix(H)
    dim = mat.shape[0]
    if not 1 <= K <= dim // 4:
        raise ValueError(f"K: must satisfy 1 <= K <= dimension/4 = {dim // 4}, got {K}")
    if max_iter is None:
        max_iter = int(min(dim, max(4 * K + 80, 200)))
    max_iter = int(min(max(max_iter, 2 * K + 2), dim))
    rng = np.random.default_rng(seed)

    Q = np.empty((dim, max_iter), dtype=complex)
    alphas = np.empty(max_iter)
    betas = np.empty(max_iter)  # betas[j] links q_j to q_{j+1}
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    Q[:, 0] = v

    def reorth(w, m):
        for _ in range(2):
            w -= Q[:, :m] @ (Q[:, :m].conj().T @ w)
        return w

    norm_est = 0.0
    m = 0
    converged = False
    while m < max_iter:
        w = mat @ Q[:, m]
        alphas[m] = float(np.real(np.vdot(Q[:, m], w)))
        w = reorth(w, m + 1)
        beta = float(np.linalg.norm(w))
        betas[m] = beta
        m += 1
        norm_est = max(norm_est, abs(alphas[m - 1]) + (betas[m - 2] if m >= 2 else 0.0) + beta)

        check_now = (m >= max(2 * K, K + 8)) and (m % 5 == 0 or m == max_iter or beta <= 1e-13 * max(norm_est, 1.0))
        if check_now:
            sub = tridiag_eigs((alphas[:m], betas[:m - 1]), count=min(K, m),
                               vectors=True, seed=seed)
            bounds = beta * np.abs(sub.vectors[m - 1, :])
            scale = max(norm_est, 1.0)
            if m >= K and (np.all(bounds <= tol * scale) or beta <= 1e-13 * scale):
                converged = True
                break
        if beta <= 1e-13 * max(norm_est, 1.0):
            # invariant subspace before K pairs: restart orthogonally
            if m >= max_iter:
                break
            v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            v = reorth(v, m)
            nv = np.linalg.norm(v)
            if nv < 1e-12:
                break
            Q[:, m] = v / nv
            continue
        if m < max_iter:
            Q[:, m] = w / beta

    sub = tridiag_eigs((alphas[:m], betas[:m - 1]), count=min(K, m), vectors=True,
                       seed=seed)
    X = Q[:, :m] @ sub.vectors.astype(complex)
    X /= np.linalg.norm(X, axis=0, keepdims=True)
    # Rayleigh quotients on the original operator: removes the bisection
    # quantization of the projected solve (error becomes O(residual^2/gap)).
    AX = mat @ X
    values = np.real(np.einsum("ij,ij->j", X.conj(), AX))
    order = np.argsort(values)
    values, X, AX = values[order], X[:, order], AX[:, order]
    residuals = np.linalg.norm(AX - X * values[None, :], axis=0)
    scale = max(norm_est, 1.0)
    if not converged:
        converged = bool(np.all(residuals <= tol * scale))
    return EigenResult(values=values, vectors=X, residuals=residuals,
                       solver="lanczos", iterations=m, converged=converged,
                       meta={"seed": seed, "tol": tol, "norm_estimate": norm_est,
                             "partial": not converged})


def dense_eigs(H) -> EigenResult:
    """Full spectrum of a small Hermitian matrix (oracle solver)."""
    mat = _as_matrix(H)
    if sp.issparse(mat):
        mat = mat.toarray()
    mat = np.asarray(mat)
    dim = mat.shape[0]
    if dim > 5000:
        raise ValueError(f"dense_eigs: dimension cap 5000 exceeded ({dim})")
    values, vectors = np.linalg.eigh(mat)
    if dim <= 2048:
        residuals = np.linalg.norm(mat @ vectors - vectors * values[None, :], axis=0)
    else:
        bound = dim * np.finfo(float).eps * float(np.max(np.abs(values), initial=0.0))
        residuals = np.full(dim, bound)
    return EigenResult(values=values, vectors=vectors, residuals=residuals,
                       solver="dense-hermitian", iterations=1,
                       meta={"dimension": dim})


# ---------------------------------------------------------------------------
# quasimodes and residual probes


@dataclass(frozen=True)
class QuasimodeSpec:
    """Localized plane-wave bump: e^{i f} e^{i k.x} g_n(|x - center|) Phi."""

    k: tuple[float, float]
    n: int
    center: tuple[float, float]
    Phi: tuple[complex, complex] = (1.0, 0.0)
    f_tilde: Optional[ScalarField] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"quasimode.n: must be >= 1, got {self.n}")
        amp = math.sqrt(abs(self.Phi[0]) ** 2 + abs(self.Phi[1]) ** 2)
        if not amp > 0:
            raise ValueError("quasimode.Phi: must be a nonzero spinor")


def _cutoff_profile(rho: np.ndarray, n: int) -> np.ndarray:
    """C^2 radial bump: 1 on [0, n], quintic transition on [n, 2n], 0 after.

    The transition 1 - (6t^5 - 15t^4 + 10t^3) has |g'| <= 1.875/n and
    |g''| <= 5.7735/n^2, comfortably inside the 2/n gradient budget the
    residual estimates rely on.
    """
    t = np.clip((rho - n) / float(n), 0.0, 1.0)
    return 1.0 - (6.0 * t ** 5 - 15.0 * t ** 4 + 10.0 * t ** 3)


def quasimode(grid: GridSpec, spec: QuasimodeSpec) -> np.ndarray:
    """Grid samples of the bump state, interleaved spinor layout, unit norm."""
    cx, cy = grid.box.center
    hw = grid.box.half_width
    margin = 2.0 * grid.h
    need_x = abs(spec.center[0] - cx) + 2.0 * spec.n + margin
    need_y = abs(spec.center[1] - cy) + 2.0 * spec.n + margin
    if need_x > hw or need_y > hw:
        raise ValueError(
            "quasimode: ball of radius 2n around the center does not fit in the "
            f"grid box with margin 2h; need half_width >= {max(need_x, need_y):.6g}, "
            f"got {hw:.6g}"
        )
    xs, ys = grid_nodes(grid)
    rho = np.hypot(xs - spec.center[0], ys - spec.center[1])
    g = _cutoff_profile(rho, spec.n)
    phase = spec.k[0] * xs + spec.k[1] * ys
    if spec.f_tilde is not None:
        phase = phase + np.asarray(spec.f_tilde.value(xs, ys), dtype=float)
    scalar = np.exp(1j * phase) * g
    out = np.empty(2 * xs.shape[0], dtype=complex)
    out[0::2] = scalar * spec.Phi[0]
    out[1::2] = scalar * spec.Phi[1]
    nrm = np.linalg.norm(out)
    if nrm == 0.0:
        raise ValueError("quasimode: cutoff support does not meet the grid")
    return out / nrm


@dataclass(frozen=True)
class WeylResidual:
    r: float
    r_tilde: float
    solve_converged: bool


def weyl_residual(H, lam: float, psi: np.ndarray, solve_tol: float = 1e-8,
                  max_cg_iter: int = 5000) -> WeylResidual:
    """Residual pair certifying approximate spectrum near lambda.

    r = |(H - lam) psi| / |psi| (a Rayleigh-type certificate: spectrum
    intersects [lam - r, lam + r]); r_tilde additionally applies
    (H + 1)^{-1} by conjugate gradients (valid for H with spectrum
    > -1, e.g. squared or Laplacian kinds).
    """
    mat = _as_matrix(H)
    nrm = float(np.linalg.norm(psi))
    if not nrm > 0:
        raise ValueError("weyl_residual: psi must be nonzero")
    w = mat @ psi - lam * psi
    r = float(np.linalg.norm(w)) / nrm

    shifted = spla.LinearOperator(
        mat.shape, matvec=lambda v: mat @ v + v, dtype=complex)
    try:
        z, info = spla.cg(shifted, w, rtol=solve_tol, atol=0.0, maxiter=max_cg_iter)
    except TypeError:  # older scipy spells the relative tolerance 'tol'
        z, info = spla.cg(shifted, w, tol=solve_tol, atol=0.0, maxiter=max_cg_iter)
    r_tilde = float(np.linalg.norm(z)) / nrm
    return WeylResidual(r=r, r_tilde=r_tilde, solve_converged=(info == 0))


@dataclass(frozen=True)
class SpacingMetrics:
    max_gap: float
    mean_gap: float
    count: int


def spacing_metrics(values, window: Sequence[float]) -> SpacingMetrics:
    """Gap statistics of values within [a, b], window ends as boundaries."""
    a, b = float(window[0]), float(window[1])
    if not a < b:
        raise ValueError(f"window: need a < b, got [{a}, {b}]")
    vals = np.sort(np.asarray([v for v in np.asarray(values, dtype=float).ravel()
                               if a <= v <= b]))
    seq = np.concatenate([[a], vals, [b]])
    gaps = np.diff(seq)
    return SpacingMetrics(max_gap=float(np.max(gaps)),
                          mean_gap=float(np.mean(gaps)),
                          count=int(vals.size))
