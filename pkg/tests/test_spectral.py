"""Fourier engine: transforms, multipliers, Helmholtz projections."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from emlab import Grid3, MultiplierSymbol, SpectralField, apply_multiplier
from emlab.errors import ConstraintViolation
from emlab.spectral import (grad_hat, helmholtz_P, helmholtz_Q, imag_part_hat,
                            real_part_hat, reflect_conj)

from conftest import random_scalar, random_vector, single_mode


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid3(32.0, 7)
    with pytest.raises(ValueError):
        Grid3(32.0, 6)
    with pytest.raises(ValueError):
        Grid3(-1.0, 16)


def test_lattice_contains_zero_and_negation(grid16):
    j = grid16.j1
    assert 0 in j
    for idx in j:
        if idx != -grid16.n // 2:  # Nyquist has no mirror
            assert -idx in j


def test_fft_roundtrip(grid16):
    f = random_scalar(grid16, 0)
    v = f.values()
    back = grid16.ifft(grid16.fft(v)).real
    assert_allclose(back, v, rtol=0, atol=1e-12 * np.abs(v).max())


def test_hermitian_symmetry_of_real_fields(grid16):
    f = random_scalar(grid16, 1)
    assert f.hermitian_error() < 1e-12


def test_reflect_conj_matches_physical_parts(grid16):
    rng = np.random.default_rng(2)
    z = rng.standard_normal((16, 16, 16)) + 1j * rng.standard_normal((16, 16, 16))
    F = grid16.fft(z)
    re_hat = real_part_hat(F)
    im_hat = imag_part_hat(F)
    assert_allclose(grid16.ifft(re_hat), z.real, atol=1e-12)
    assert_allclose(grid16.ifft(im_hat), z.imag, atol=1e-12)
    assert_allclose(reflect_conj(reflect_conj(F)), F, atol=0)


def test_bracket_eigenvalue_single_mode(grid16):
    # exact eigenvalue sqrt(1 + alpha^2 |k|^2) on one exponential
    f = single_mode(grid16, (2, 0, 0))
    k = 2.0 * np.pi * 2 / grid16.box_length
    out = apply_multiplier(f, MultiplierSymbol("bracket", alpha=0.5))
    ratio = out.coeffs[(2, 0, 0)] / f.coeffs[(2, 0, 0)]
    assert abs(ratio - np.sqrt(1.0 + 0.25 * k**2)) < 1e-12


def test_bracket_eigenvalue_sqrt2():
    # box sized so the index-(2,0,0) mode sits exactly at |k| = 2
    grid = Grid3(2.0 * np.pi, 16)
    f = single_mode(grid, (2, 0, 0))
    out = apply_multiplier(f, MultiplierSymbol("bracket", alpha=0.5))
    ratio = out.coeffs[(2, 0, 0)] / f.coeffs[(2, 0, 0)]
    assert abs(ratio - np.sqrt(2.0)) < 1e-12  # sqrt(1 + 0.25 * 4)


def test_bracket_fixes_the_mean(grid16):
    f = random_scalar(grid16, 3, zero_mean=False)
    out = apply_multiplier(f, MultiplierSymbol("bracket", alpha=2.5,
                                               zero_mode_policy="identity"))
    assert abs(out.coeffs[0, 0, 0] - f.coeffs[0, 0, 0]) < 1e-12 * abs(f.coeffs[0, 0, 0])


def test_riesz_identity(grid16):
    # sum_j R_j^2 = -Id on zero-mean fields
    f = random_scalar(grid16, 4)
    sym = MultiplierSymbol("riesz")
    vec = apply_multiplier(f, sym)
    back = apply_multiplier(vec, sym)
    assert_allclose(back.values(), -f.values(), atol=1e-12 * np.abs(f.values()).max())


def test_zero_mode_error_policy(grid16):
    f = random_scalar(grid16, 5, zero_mean=False)
    sym = MultiplierSymbol("riesz", zero_mode_policy="error")
    with pytest.raises(ConstraintViolation, match="velocity"):
        apply_multiplier(f, sym, name="velocity")


def test_identity_policy_rejected_for_singular_kinds():
    with pytest.raises(ValueError):
        MultiplierSymbol("riesz", zero_mode_policy="identity")
    with pytest.raises(ValueError):
        MultiplierSymbol("bracket_over_modulus", zero_mode_policy="identity")


def test_multipliers_commute(grid16):
    f = random_scalar(grid16, 6)
    br = MultiplierSymbol("bracket", alpha=0.7)
    mo = MultiplierSymbol("modulus")
    a = apply_multiplier(apply_multiplier(f, br), mo)
    b = apply_multiplier(apply_multiplier(f, mo), br)
    assert_allclose(a.coeffs, b.coeffs, atol=1e-12 * np.abs(a.coeffs).max())


def test_reality_flag_preserved(grid16):
    f = random_scalar(grid16, 7)
    for sym in (MultiplierSymbol("bracket", alpha=0.3),
                MultiplierSymbol("modulus"),
                MultiplierSymbol("bracket_over_modulus", alpha=0.5)):
        out = apply_multiplier(f, sym)
        assert out.real_valued
        assert out.hermitian_error() < 1e-12
    v = apply_multiplier(f, MultiplierSymbol("riesz"))
    assert v.real_valued and v.hermitian_error() < 1e-12


def test_custom_multiplier_reality_detection(grid16):
    odd_real = MultiplierSymbol("custom", table=lambda kx, ky, kz: kx * 0 + kx)
    f = random_scalar(grid16, 8)
    out = apply_multiplier(f, odd_real)  # real odd symbol does not preserve reality
    assert not out.real_valued


# -- Helmholtz ---------------------------------------------------------------

def test_projection_annihilates_gradients(grid16):
    f = random_scalar(grid16, 10)
    grad = SpectralField(grid16, grad_hat(grid16, f.coeffs), True)
    p = helmholtz_P(grad)
    assert np.abs(p.coeffs).max() < 1e-12 * np.abs(grad.coeffs).max()
    q = helmholtz_Q(grad)
    assert_allclose(q.coeffs, grad.coeffs, atol=1e-12 * np.abs(grad.coeffs).max())


def test_curl_fields_pass_projection(grid16):
    from emlab.spectral import curl_hat
    w = random_vector(grid16, 11)
    curl = SpectralField(grid16, curl_hat(grid16, w.coeffs), True)
    p = helmholtz_P(curl)
    assert_allclose(p.coeffs, curl.coeffs, atol=1e-12 * np.abs(curl.coeffs).max())


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_projector_algebra(grid16, seed):
    v = random_vector(grid16, 20 + seed)
    scale = np.abs(v.coeffs).max()
    p = helmholtz_P(v)
    q = helmholtz_Q(v)
    assert_allclose((p + q).coeffs, v.coeffs, atol=1e-12 * scale)
    assert_allclose(helmholtz_P(p).coeffs, p.coeffs, atol=1e-12 * scale)
    assert_allclose(helmholtz_Q(q).coeffs, q.coeffs, atol=1e-12 * scale)
    assert np.abs(helmholtz_Q(p).coeffs).max() < 1e-12 * scale
    assert np.abs(helmholtz_P(q).coeffs).max() < 1e-12 * scale


def test_divergence_free_output(grid16):
    from emlab.spectral import div_hat
    v = random_vector(grid16, 30)
    p = helmholtz_P(v)
    d = div_hat(grid16, p.coeffs)
    assert np.abs(d).max() < 1e-12 * np.abs(grad_hat(grid16, v.coeffs[0])).max()


def test_dealias_mask_strict_third(grid16):
    # products of retained modes cannot alias back into the retained band
    kcut = grid16.dealias_cutoff
    assert 3 * kcut < grid16.n
    assert not grid16.dealias_mask[-grid16.n // 2, 0, 0]  # Nyquist excluded
