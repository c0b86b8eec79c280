"""Positive definite (full-rank) spectral factorization tests.

The scalar cases have closed-form oracles: a spectrum built as q q~ from a
known outer q must come back as q exactly, up to the pinned phase.  Matrix
cases are checked through the defining identity and the canonical form.
"""

import numpy as np
import pytest

from parafact.errors import NotFactorableError
from parafact.fullrank import (
    FactorOptions,
    canonicalize,
    factor_positive_definite,
    scalar_factor,
)
from parafact.laurent import LaurentMatrix, LaurentPoly


def circle_residual(F, S, count=64):
    dev = 0.0
    for j in range(count):
        z = np.exp(2j * np.pi * j / count)
        dev = max(dev, np.max(np.abs(F.eval(z) @ F.eval(z).conj().T - S.eval(z))))
    return dev / max(S.max_abs, 1e-300)


def random_pd_spectrum(rng, m, N):
    terms = {
        n: (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
        / np.sqrt(2)
        for n in range(N + 1)
    }
    A = LaurentMatrix(m, m, terms)
    return (A @ A.adjoint()).trim(0.0), A


class TestScalarFactor:
    def test_known_outer_polynomial(self):
        q = LaurentPoly({0: 2.0, 1: 0.5})
        f = q * q.adjoint()
        got = scalar_factor(f)
        assert (got - q).max_abs < 1e-10

    def test_phase_is_pinned_real_positive(self):
        q = LaurentPoly({0: -1.0 + 1.0j, 1: 0.25j})
        f = (q * q.adjoint()).trim(0.0)
        got = scalar_factor(f)
        assert abs(got.coeff(0).imag) < 1e-10
        assert got.coeff(0).real > 0
        assert ((got * got.adjoint()) - f).max_abs < 1e-9

    def test_inner_root_is_reflected_out(self):
        inner = LaurentPoly({0: -0.3, 1: 1.0})
        f = inner * inner.adjoint()
        got = scalar_factor(f)
        roots = np.roots([got.coeff(1), got.coeff(0)])
        assert all(abs(r) > 1.0 for r in roots)
        assert ((got * got.adjoint()) - f).max_abs < 1e-10

    def test_even_unit_circle_zero_passes(self):
        q = LaurentPoly({0: 1.0, 1: -1.0})
        f = q * q.adjoint()
        got = scalar_factor(f)
        assert ((got * got.adjoint()) - f).max_abs < 1e-8

    def test_sign_changing_symbol_raises(self):
        f = LaurentPoly({-1: 0.5j, 1: -0.5j})
        assert abs(f.eval(np.exp(0.5j)) - np.sin(0.5)) < 1e-12
        with pytest.raises(NotFactorableError):
            scalar_factor(f)

    def test_negative_symbol_raises(self):
        with pytest.raises(NotFactorableError):
            scalar_factor(LaurentPoly({0: -1.0}))


class TestFactorPositiveDefinite:
    def test_residual_and_order_small_instances(self):
        rng = np.random.default_rng(50)
        for m, N in [(1, 3), (2, 2), (3, 1), (2, 4)]:
            S, _ = random_pd_spectrum(rng, m, N)
            F = factor_positive_definite(S)
            assert F.lo >= 0
            assert F.trim(1e-12).hi == N
            assert circle_residual(F, S) < 1e-9

    def test_constant_spectrum(self):
        C = np.array([[2.0, 0.5], [0.5, 1.0]])
        S = LaurentMatrix.constant(C)
        F = factor_positive_definite(S)
        assert circle_residual(F, S) < 1e-10
        assert (F.hi or 0) == 0

    def test_diagonal_spectrum_factors_entrywise(self):
        d0 = LaurentPoly({0: 2.0, 1: 0.5})
        f0 = d0 * d0.adjoint()
        S = LaurentMatrix.diagonal([f0, LaurentPoly.constant(4.0)])
        F = factor_positive_definite(S)
        assert circle_residual(F, S) < 1e-10

    def test_indefinite_raises(self):
        S = LaurentMatrix.constant(np.diag([1.0, -1.0]))
        with pytest.raises(NotFactorableError):
            factor_positive_definite(S)

    def test_options_validation(self):
        with pytest.raises(ValueError):
            FactorOptions(tol=0.0)


class TestCanonicalize:
    def test_canonical_form_is_idempotent(self):
        rng = np.random.default_rng(51)
        S, _ = random_pd_spectrum(rng, 3, 2)
        F = factor_positive_definite(S)
        once = canonicalize(F)
        twice = canonicalize(once.factor)
        assert (once.factor - twice.factor).max_abs < 1e-10
        assert np.max(np.abs(twice.applied_unitary - np.eye(3))) < 1e-8

    def test_unitary_rotation_lands_on_same_representative(self):
        rng = np.random.default_rng(52)
        S, _ = random_pd_spectrum(rng, 2, 2)
        F = canonicalize(factor_positive_definite(S)).factor
        theta = 0.7
        Q = np.array(
            [
                [np.cos(theta), -np.sin(theta)],
                [np.sin(theta), np.cos(theta)],
            ]
        )
        rotated = F @ LaurentMatrix.constant(Q)
        back = canonicalize(rotated).factor
        assert (back - F).max_abs < 1e-9

    def test_applied_unitary_is_unitary(self):
        rng = np.random.default_rng(53)
        S, _ = random_pd_spectrum(rng, 2, 1)
        form = canonicalize(factor_positive_definite(S))
        U = form.applied_unitary
        assert np.max(np.abs(U.conj().T @ U - np.eye(2))) < 1e-10
