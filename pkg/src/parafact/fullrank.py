"""Spectral factorization of full-rank positive definite Laurent matrices.

Given S(z) = sum_{|n| <= N} C_n z^n, Hermitian positive definite a.e. on the
unit circle, computes the analytic factor S+ with S = S+ S+~, S+ of order N,
det S+(z) != 0 for |z| < 1, normalized to a canonical representative of the
right-unitary equivalence class.

The scalar case pairs the roots of z^N f(z) across the unit circle and keeps
the outer representative of each pair.  The matrix case runs Bauer's method
(Cholesky of a block Toeplitz section, whose deep rows converge to the factor
coefficients), then polishes with damped Gauss-Newton least squares on the
quadratic coefficient equations, and finally reflects any stray interior
determinant zeros back across the circle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotFactorableError, NumericalFailureError
from .laurent import AnalyticPolyMatrix, LaurentMatrix, LaurentPoly
from .roots import cluster_points, laurent_roots, poly_roots, reflect_column_zero

__all__ = [
    "FactorOptions",
    "CanonicalForm",
    "scalar_factor",
    "factor_positive_definite",
    "canonicalize",
]

# Relative screen for "full rank at z = 0" inside canonicalize.
_RANK0_TOL = 1e-12
# Off-diagonal coefficient mass below this (relative) treats S as diagonal.
_DIAG_TOL = 1e-12
# Unit-circle detection band for scalar root pairing.
_CIRCLE_TOL = 1e-7
# Interior determinant zeros beyond this band from the circle get reflected.
_REFLECT_BAND = 1e-7


def _next_pow2(n: int) -> int:
    m = 1
    while m < n:
        m *= 2
    return m


@dataclass(frozen=True)
class FactorOptions:
    """Tuning knobs for the full-rank factorization.

    tol is the relative residual target (coefficientwise, against the
    largest input coefficient).  bauer_block_count and grid_count are
    floors; the implementation raises them to at least 2*order + 2 and
    2*order + 1 respectively.  max_refine_iters bounds the number of
    block-count doublings.
    """

    tol: float = 1e-9
    bauer_block_count: int = 32
    max_refine_iters: int = 6
    grid_count: int = 64

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.bauer_block_count < 2:
            raise ValueError("bauer_block_count must be at least 2")
        if self.max_refine_iters < 0:
            raise ValueError("max_refine_iters must be nonnegative")
        if self.grid_count < 1:
            raise ValueError("grid_count must be positive")


@dataclass(frozen=True)
class CanonicalForm:
    """A canonical factor and the constant unitary that produced it."""

    factor: AnalyticPolyMatrix
    applied_unitary: np.ndarray


def _unit_grid_count(order: int, opts: FactorOptions) -> int:
    return _next_pow2(max(opts.grid_count, 2 * order + 1, 64))


def scalar_factor(f: LaurentPoly, tol: float = 1e-9) -> LaurentPoly:
    """Outer spectral factor of a scalar symbol: q analytic with q q~ = f.

    f must be para-Hermitian and nonnegative on the unit circle.  The roots
    of z^N f(z) come in pairs reflected across the circle; q takes the outer
    representative of each pair and half of every (necessarily even) cluster
    of unit-circle roots.  q is normalized so q(0) is real positive, which
    pins the unit-modulus phase freedom.

    Raises NotFactorableError when f is negative beyond tol on the circle or
    has a unit-circle zero of odd multiplicity, and NumericalFailureError
    when the reconstruction misses the tol target.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    f = f.trim(1e-14)
    if f.is_zero:
        return LaurentPoly.zero()
    scale = f.max_abs
    if not f.is_parahermitian(max(tol, 1e-12)):
        raise ValueError("symbol is not para-Hermitian within tolerance")
    N = f.hi
    grid = _next_pow2(max(64, 2 * N + 1))
    samples = f.eval_unit_grid(grid).real
    if samples.min() < -tol * scale:
        raise NotFactorableError(
            "symbol is negative on the unit circle (min %.3e of scale %.3e)"
            % (samples.min(), scale)
        )
    if N == 0:
        c = f.coeff(0).real
        if c <= 0:
            raise NotFactorableError("constant symbol is not positive")
        return LaurentPoly.constant(np.sqrt(c))

    roots = poly_roots(f.coeff_array(-N, N))
    chosen = None
    parity_error = None
    for widen in (1.0, 10.0, 100.0):
        band = _CIRCLE_TOL * widen
        try:
            candidate = _pair_roots(roots, band)
        except NotFactorableError as exc:
            parity_error = exc
            continue
        if len(candidate) == N:
            chosen = candidate
            break
    if chosen is None:
        if parity_error is not None:
            raise parity_error
        raise NumericalFailureError(
            "could not pair %d roots into %d factor zeros" % (len(roots), N)
        )

    monic = np.poly(chosen) if len(chosen) else np.array([1.0 + 0j])
    asc = monic[::-1]
    g0 = float(np.sum(np.abs(asc) ** 2))
    s = f.coeff(0).real / g0
    if s <= 0:
        raise NotFactorableError("mean of the symbol is not positive")
    q = LaurentPoly.from_coeffs(np.sqrt(s) * asc, 0)
    q0 = q.coeff(0)
    if abs(q0) > 0:
        q = q * (q0.conjugate() / abs(q0))
    residual = (q * q.adjoint() - f).max_abs
    if residual > tol * scale:
        raise NumericalFailureError(
            "scalar factor residual %.3e exceeds tolerance" % (residual / scale),
            residual=residual / scale,
        )
    return q


def _pair_roots(roots: np.ndarray, band: float):
    """Split roots into outer representatives plus halves of circle clusters.

    Raises NotFactorableError when a circle cluster has odd multiplicity.
    """
    on_circle = []
    outer = []
    for a in roots:
        r = abs(a)
        if abs(r - 1.0) <= band:
            on_circle.append(complex(a))
        elif r > 1.0:
            outer.append(complex(a))
    chosen = list(outer)
    if on_circle:
        for center, count in cluster_points(on_circle, 3.0 * band):
            if count % 2 != 0:
                raise NotFactorableError(
                    "unit-circle zero near %s has odd multiplicity %d"
                    % (center, count)
                )
            unit_center = center / abs(center)
            chosen.extend([unit_center] * (count // 2))
    return chosen


def _is_diagonal(S: LaurentMatrix) -> bool:
    scale = S.max_abs
    if scale == 0:
        return True
    off = 0.0
    for _, C in S.terms.items():
        D = C.copy()
        np.fill_diagonal(D, 0)
        off = max(off, float(np.max(np.abs(D))))
    return off <= _DIAG_TOL * scale


def _screen_definite(S: LaurentMatrix, opts: FactorOptions) -> None:
    """Reject non-para-Hermitian or indefinite input."""
    if S.rows != S.cols:
        raise ValueError("spectrum must be square")
    if not S.is_parahermitian(max(opts.tol, 1e-12)):
        raise ValueError("spectrum is not para-Hermitian within tolerance")
    grid = _unit_grid_count(S.hi, opts)
    samples = S.eval_unit_grid(grid)
    samples = 0.5 * (samples + np.conj(np.transpose(samples, (0, 2, 1))))
    eigs = np.linalg.eigvalsh(samples)
    top = float(eigs.max()) if eigs.size else 0.0
    if eigs.min() < -opts.tol * max(top, 1e-300):
        raise NotFactorableError(
            "spectrum is indefinite on the unit circle (min eig %.3e)" % eigs.min()
        )


def _bauer_last_row(C: list, k: int, N: int, L: int) -> np.ndarray:
    """Deep-row block Cholesky estimate of the factor coefficients.

    Builds the Hermitian block Toeplitz section T[i, j] = C_{i-j} of L block
    rows in banded storage, factors it, and reads the last block row, whose
    blocks converge to (A_N, ..., A_0) as L grows.  Returns A with shape
    (N + 1, k, k).
    """
    n = k * L
    bw = k * (N + 1) - 1
    ab = np.zeros((bw + 1, n), dtype=complex)
    for d in range(N + 1):
        Cd = C[d]
        reps = L - d
        for p in range(k):
            for q in range(k):
                if d == 0 and p < q:
                    continue
                r = d * k + p - q
                ab[r, q : q + k * reps : k] = Cd[p, q]
    scale = max(float(np.max(np.abs(Cd))) for Cd in C)
    lift = 0.0
    for bump in range(4):
        try:
            if lift:
                ab_try = ab.copy()
                ab_try[0, :] += lift
            else:
                ab_try = ab
            chol = scipy.linalg.cholesky_banded(ab_try, lower=True, check_finite=False)
            break
        except scipy.linalg.LinAlgError:
            lift = scale * (1e-13 * 100.0**bump)
    else:
        raise NumericalFailureError("block Toeplitz section is not positive definite")
    A = np.zeros((N + 1, k, k), dtype=complex)
    base = (L - 1) * k
    for d in range(N + 1):
        col0 = (L - 1 - d) * k
        for p in range(k):
            for q in range(k):
                A[d, p, q] = chol[d * k + p - q, col0 + q]
    return A


def _conv_coeffs(A: np.ndarray) -> np.ndarray:
    """Coefficients D_n = sum_q A_{n+q} A_q^H for n = 0..N."""
    Np1 = A.shape[0]
    D = np.zeros_like(A)
    for n in range(Np1):
        for q in range(Np1 - n):
            D[n] += A[n + q] @ A[q].conj().T
    return D


def _residual_rel(C: np.ndarray, A: np.ndarray, scale: float) -> float:
    D = _conv_coeffs(A)
    return float(np.max(np.abs(C - D))) / scale


def _gauss_newton(C: np.ndarray, A0: np.ndarray, scale: float, target: float):
    """Damped Gauss-Newton on the coefficient equations sum A_{n+q} A_q^H = C_n.

    The unknown is the real/imaginary stack of all A coefficients; each step
    solves the linearized system in the least-squares sense, which handles
    the right-unitary gauge freedom (a genuinely rank-deficient Jacobian).
    Returns (A, relative_residual).
    """
    Np1, k, _ = A0.shape
    P = Np1 * k * k

    def unpack(x):
        cm = x[:P] + 1j * x[P:]
        return cm.reshape(Np1, k, k)

    def pack(A):
        flat = A.reshape(-1)
        return np.concatenate([flat.real, flat.imag])

    def resid_vec(A):
        R = C - _conv_coeffs(A)
        flat = R.reshape(-1)
        return np.concatenate([flat.real, flat.imag])

    x = pack(A0)
    A = A0.copy()
    r = resid_vec(A)
    best_A, best_rel = A, _residual_rel(C, A, scale)
    stall = 0
    for _ in range(30):
        if best_rel <= target:
            break
        J = np.zeros((2 * P, 2 * P))
        col = 0
        for part in (1.0, 1.0j):
            for p in range(Np1):
                for i in range(k):
                    for j in range(k):
                        dR = np.zeros((Np1, k, k), dtype=complex)
                        for n in range(Np1):
                            if 0 <= p - n <= Np1 - 1:
                                dR[n, i, :] -= part * np.conj(A[p - n][:, j])
                            if 0 <= n + p <= Np1 - 1:
                                dR[n, :, i] -= np.conj(part) * A[n + p][:, j]
                        flat = dR.reshape(-1)
                        J[:, col] = np.concatenate([flat.real, flat.imag])
                        col += 1
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        rn = float(np.linalg.norm(r))
        t = 1.0
        improved = False
        for _ in range(10):
            x_try = x + t * step
            A_try = unpack(x_try)
            r_try = resid_vec(A_try)
            if float(np.linalg.norm(r_try)) < rn:
                x, A, r = x_try, A_try, r_try
                improved = True
                break
            t *= 0.5
        if not improved:
            break
        rel = _residual_rel(C, A, scale)
        if rel < best_rel:
            best_A, best_rel = A, rel
            stall = 0
        else:
            stall += 1
            if stall >= 3:
                break
    return best_A, best_rel


def _reflect_interior_zeros(F: LaurentMatrix, tol: float):
    """Reflect determinant zeros with |a| < 1 - band across the unit circle.

    Zeros within the band of the circle belong to semidefinite spectra and
    stay put.  Each reflection preserves F F~ exactly up to the division
    remainder, which is checked against tol.
    """
    det = F.det().trim(1e-12)
    if det.is_zero:
        raise NumericalFailureError("factor determinant vanished identically")
    inner = [a for a in laurent_roots(det) if abs(a) < 1.0 - _REFLECT_BAND]
    inner.sort(key=lambda w: (abs(w), w.real, w.imag))
    scale = F.max_abs
    for a in inner:
        Fa = F.eval(a)
        _, sv, vh = np.linalg.svd(Fa)
        F, _, rem = reflect_column_zero(F, a, vh[-1].conj())
        if rem > 1e3 * tol * max(scale, 1e-300):
            raise NumericalFailureError(
                "interior zero reflection left remainder %.3e" % rem,
                residual=rem / max(scale, 1e-300),
            )
    return F


def canonicalize(F: LaurentMatrix) -> CanonicalForm:
    """Rotate an analytic factor to its canonical right-unitary representative.

    With F(0) = W Sigma V^H (thin SVD), applies V D where the diagonal phase
    D makes the first largest-magnitude entry of each column of W Sigma real
    positive.  Requires full column rank at z = 0.
    """
    if not F.is_zero and F.lo < 0:
        raise ValueError("canonicalize expects an analytic matrix")
    F0 = F.coeff(0)
    W, sv, Vh = np.linalg.svd(F0, full_matrices=False)
    if sv.size == 0 or sv[-1] <= _RANK0_TOL * max(sv[0], 1e-300):
        raise ValueError("factor is rank deficient at z = 0")
    B = W * sv
    phases = np.ones(F.cols, dtype=complex)
    for j in range(F.cols):
        idx = int(np.argmax(np.abs(B[:, j])))
        x = B[idx, j]
        phases[j] = x.conjugate() / abs(x)
    applied = Vh.conj().T @ np.diag(phases)
    factor = (F @ LaurentMatrix.constant(applied)).as_analytic(0.0)
    return CanonicalForm(factor=factor, applied_unitary=applied)


def factor_positive_definite(
    S: LaurentMatrix, opts: FactorOptions | None = None
) -> AnalyticPolyMatrix:
    """Canonical analytic spectral factor of a full-rank definite spectrum.

    Postconditions: S+ is analytic of the same order as S, S+ S+~ matches S
    within opts.tol relative to the largest coefficient, det S+ has no zeros
    in the open unit disk (up to the reflection band), and S+ is the
    canonical representative of its right-unitary class.
    """
    opts = opts or FactorOptions()
    S = S.trim(0.0)
    if S.is_zero:
        raise NotFactorableError("zero spectrum has no full-rank factor")
    _screen_definite(S, opts)
    k = S.rows
    N = S.hi
    scale = S.max_abs

    if N == 0:
        C0 = S.coeff(0)
        C0 = 0.5 * (C0 + C0.conj().T)
        w, V = np.linalg.eigh(C0)
        if w[0] <= opts.tol * w[-1]:
            raise NotFactorableError("constant spectrum is numerically singular")
        F = LaurentMatrix.constant(V @ np.diag(np.sqrt(np.maximum(w, 0.0))))
        return canonicalize(F).factor

    if k == 1:
        q = scalar_factor(S.entry(0, 0), tol=opts.tol)
        F = LaurentMatrix.from_entries([[q]])
        return canonicalize(F).factor

    if _is_diagonal(S):
        qs = [scalar_factor(S.entry(i, i), tol=opts.tol) for i in range(k)]
        F = LaurentMatrix.diagonal(qs)
        return canonicalize(F).factor

    C = np.stack([S.coeff(n) for n in range(N + 1)])
    L = max(opts.bauer_block_count, 2 * N + 2)
    best_A, best_rel = None, np.inf
    for _ in range(opts.max_refine_iters + 1):
        A = _bauer_last_row(list(C), k, N, L)
        rel = _residual_rel(C, A, scale)
        if rel < best_rel:
            best_A, best_rel = A, rel
        if best_rel > opts.tol:
            A2, rel2 = _gauss_newton(C, best_A, scale, target=0.3 * opts.tol)
            if rel2 < best_rel:
                best_A, best_rel = A2, rel2
        if best_rel <= opts.tol:
            break
        L *= 2
    if best_rel > opts.tol:
        raise NumericalFailureError(
            "factorization residual %.3e exceeds tol %.3e" % (best_rel, opts.tol),
            residual=best_rel,
        )

    F = LaurentMatrix(k, k, {n: best_A[n] for n in range(N + 1)})
    F = _reflect_interior_zeros(F, opts.tol)
    factor = canonicalize(F).factor

    final = (factor @ factor.adjoint() - S).max_abs / scale
    if final > 10.0 * opts.tol:
        raise NumericalFailureError(
            "post-reflection residual %.3e exceeds tolerance" % final,
            residual=final,
        )
    return factor
