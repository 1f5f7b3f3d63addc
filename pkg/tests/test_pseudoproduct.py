"""Bilinear pseudo-products: identity symbol, factored reduction, oracle."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from emlab import BilinearSymbol, Grid3, SpectralField, pseudo_product
from emlab.errors import CostGuardError
from emlab.pseudoproduct import IDENTITY_SYMBOL

from conftest import random_scalar


def brute_force_convolution(grid, symbol_fn, fh, gh):
    """Independent oracle: plain double-lattice sum of the defining formula.

    Inputs are truncated to the dealias band first (part of the operator's
    contract), then F[T](xi) = (1/L^3) sum_eta m(xi,eta) f(eta) g(xi-eta)
    with out-of-lattice xi-eta dropped (true, non-cyclic convolution).
    """
    n = grid.n
    half = n // 2
    j1 = grid.j1
    scale = 2.0 * np.pi / grid.box_length
    fh = fh * grid.dealias_mask
    gh = gh * grid.dealias_mask
    out = np.zeros((n, n, n), complex)
    for ax in range(n):
        for ay in range(n):
            for az in range(n):
                if not grid.dealias_mask[ax, ay, az]:
                    continue
                xi_j = np.array([j1[ax], j1[ay], j1[az]])
                acc = 0.0 + 0.0j
                for bx in range(n):
                    for by in range(n):
                        for bz in range(n):
                            fv = fh[bx, by, bz]
                            if fv == 0.0:
                                continue
                            eta_j = np.array([j1[bx], j1[by], j1[bz]])
                            dj = xi_j - eta_j
                            if np.any(dj < -half) or np.any(dj > half - 1):
                                continue
                            gv = gh[dj[0], dj[1], dj[2]]
                            if gv == 0.0:
                                continue
                            acc += symbol_fn(xi_j * scale, eta_j * scale) * fv * gv
                out[ax, ay, az] = acc / grid.volume
    return out


@pytest.fixture(scope="module")
def grid8():
    return Grid3(16.0, 8)


def test_identity_symbol_is_pointwise_product(grid16):
    f = random_scalar(grid16, 0, band_fraction=0.2)
    g = random_scalar(grid16, 1, band_fraction=0.1)
    prod = pseudo_product(IDENTITY_SYMBOL, f, g)
    expect = grid16.dealias(grid16.fft(f.values() * g.values()))
    assert_allclose(prod.coeffs, expect, atol=1e-12 * np.abs(expect).max())


def test_m0_only_reduces_to_multiplier_of_product(grid16):
    sym = BilinearSymbol(m0=lambda kx, ky, kz: np.sqrt(1 + kx**2 + ky**2 + kz**2))
    f = random_scalar(grid16, 2, band_fraction=0.2)
    g = random_scalar(grid16, 3, band_fraction=0.2)
    out = pseudo_product(sym, f, g)
    br = grid16.bracket(1.0)
    expect = br * grid16.dealias(grid16.fft(f.values() * g.values()))
    assert_allclose(out.coeffs, expect, atol=1e-12 * np.abs(expect).max())


def _test_symbols():
    return [
        ("identity", IDENTITY_SYMBOL),
        ("m0_bracket", BilinearSymbol(
            m0=lambda kx, ky, kz: np.sqrt(1 + kx**2 + ky**2 + kz**2))),
        ("m1_smooth", BilinearSymbol(
            m1=lambda kx, ky, kz: 1.0 / (1.0 + kx**2 + ky**2 + kz**2))),
        ("all_factors", BilinearSymbol(
            m0=lambda kx, ky, kz: np.sqrt(1 + 0.25 * (kx**2 + ky**2 + kz**2)),
            m1=lambda kx, ky, kz: np.exp(-0.1 * (kx**2 + ky**2 + kz**2)),
            m2=lambda kx, ky, kz: 1.0 / (1.0 + 0.5 * (kx**2 + ky**2 + kz**2)))),
    ]


@pytest.mark.parametrize("label,sym", _test_symbols())
def test_fast_path_matches_brute_force(grid8, label, sym):
    f = random_scalar(grid8, 5, band_fraction=0.45)
    g = random_scalar(grid8, 6, band_fraction=0.45)
    fast = pseudo_product(sym, f, g, method="fast")
    truth = brute_force_convolution(
        grid8, lambda xi, eta: sym.values_pairwise(xi[None, :], eta[None, :])[0],
        f.coeffs, g.coeffs)
    assert_allclose(fast.coeffs, truth, atol=1e-10 * max(np.abs(truth).max(), 1e-30))


def test_direct_path_matches_fast_path(grid8):
    sym = _test_symbols()[3][1]
    f = random_scalar(grid8, 7, band_fraction=0.45)
    g = random_scalar(grid8, 8, band_fraction=0.45)
    fast = pseudo_product(sym, f, g, method="fast")
    direct = pseudo_product(sym, f, g, method="direct")
    assert_allclose(direct.coeffs, fast.coeffs,
                    atol=1e-10 * np.abs(fast.coeffs).max())


def test_nonseparable_symbol_direct_only(grid8):
    sym = BilinearSymbol(full=lambda xi, eta: np.exp(
        -0.05 * np.sum((xi - 0.5 * eta) ** 2, axis=-1)))
    f = random_scalar(grid8, 9, band_fraction=0.45)
    g = random_scalar(grid8, 10, band_fraction=0.45)
    out = pseudo_product(sym, f, g)  # auto -> direct
    truth = brute_force_convolution(
        grid8, lambda xi, eta: sym.full(xi[None, :], eta[None, :])[0],
        f.coeffs, g.coeffs)
    assert_allclose(out.coeffs, truth, atol=1e-10 * np.abs(truth).max())
    with pytest.raises(ValueError):
        pseudo_product(sym, f, g, method="fast")


def test_cost_guard_refuses_large_direct(grid32):
    f = random_scalar(grid32, 11)
    g = random_scalar(grid32, 12)
    sym = BilinearSymbol(full=lambda xi, eta: np.ones(xi.shape[:-1]))
    with pytest.raises(CostGuardError):
        pseudo_product(sym, f, g, method="direct")


def test_reality_preservation(grid16):
    sym = _test_symbols()[3][1]  # real even factors
    f = random_scalar(grid16, 13)
    g = random_scalar(grid16, 14)
    out = pseudo_product(sym, f, g)
    assert out.real_valued
    assert out.hermitian_error() < 1e-12
