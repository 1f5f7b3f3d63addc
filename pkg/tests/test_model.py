"""Diagonalization, recovery, right-hand sides, constraint structure."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from emlab import (DiagState, EMState, PhysicalParams, diagonalize,
                   random_state, reconstruct, rhs_diagonal, rhs_primitive)
from emlab.errors import ConstraintViolation
from emlab.model import constraint_residuals, single_mode_state
from emlab.spectral import div_hat

from conftest import state_diff_l2, state_l2


def test_params_validation():
    with pytest.raises(ValueError):
        PhysicalParams(1.0)
    with pytest.raises(ValueError):
        PhysicalParams(0.0)
    assert PhysicalParams(0.3).pressure(1.0) == pytest.approx(0.03)


def test_zero_state_roundtrip(grid16, params):
    z = EMState.zero(grid16)
    d = diagonalize(z, params)
    assert np.abs(d.A).max() == 0.0 and np.abs(d.Bc).max() == 0.0
    back = reconstruct(d, params)
    assert state_l2(back) == 0.0


def test_gradient_velocity_gives_imaginary_A(grid16, params):
    # u = grad(phi) single mode, n = E = B = 0: the acoustic variable is
    # (i/2) (grad/|D|) . u, so Re(A) = 0 in physical space (n-part vanishes)
    n = grid16.n
    fh = np.zeros((n, n, n), complex)
    fh[2, 0, 0] = grid16.volume / 2
    fh[-2, 0, 0] = grid16.volume / 2
    from emlab.spectral import grad_hat
    uh = grad_hat(grid16, fh)
    s = EMState(grid16, grid16.ifft(uh).real, np.zeros((n, n, n)),
                np.zeros((3, n, n, n)), np.zeros((3, n, n, n)), 0.0)
    d = diagonalize(s, params)
    A_phys = grid16.ifft(d.A)
    assert np.abs(A_phys.real).max() < 1e-14 * np.abs(A_phys.imag).max()
    assert np.abs(d.Bc).max() == 0.0


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_roundtrip_random_states(grid32, params, seed):
    s = random_state(grid32, params, seed=seed, amplitude=1e-3)
    d = diagonalize(s, params)
    back = reconstruct(d, params)
    for a, b in ((s.u, back.u), (s.n, back.n), (s.E, back.E), (s.B, back.B)):
        assert np.abs(a - b).max() < 1e-11 * max(np.abs(a).max(), 1e-30)
    d2 = diagonalize(back, params)
    scale = max(np.abs(d.A).max(), np.abs(d.Bc).max())
    assert np.abs(d2.A - d.A).max() < 1e-11 * scale
    assert np.abs(d2.Bc - d.Bc).max() < 1e-11 * scale


def test_diagonalize_rejects_bad_states(grid16, params):
    s = random_state(grid16, params, seed=0, amplitude=1e-3)
    s.E[0] += 1e-3  # breaks nothing (constant shifts E mean) -> mean violation
    with pytest.raises(ConstraintViolation):
        diagonalize(s, params)
    s2 = random_state(grid16, params, seed=1, amplitude=1e-3)
    s2.n = np.roll(s2.n, 3, axis=0)  # breaks the Gauss law
    with pytest.raises(ConstraintViolation) as err:
        diagonalize(s2, params)
    assert "gauss" in str(err.value)


def test_decoupled_recovery(grid16, params):
    s = random_state(grid16, params, seed=2, amplitude=1e-3)
    d = diagonalize(s, params)
    d_ac = DiagState(grid16, d.A, np.zeros_like(d.Bc), 0.0)
    em = reconstruct(d_ac, params)
    assert np.abs(em.B).max() == 0.0
    from emlab.spectral import project_div_free_hat
    pu = project_div_free_hat(grid16, grid16.fft(em.u))
    assert np.abs(pu).max() < 1e-13 * max(np.abs(grid16.fft(em.u)).max(), 1e-30)


def test_reconstructed_states_satisfy_constraints(grid16, params):
    s = random_state(grid16, params, seed=3, amplitude=1e-2)
    res = constraint_residuals(s)
    assert res["gauss"] < 1e-11 and res["div_b"] < 1e-11 and res["curl"] < 1e-11


def test_constraint_residual_scaling(grid16, params):
    s = random_state(grid16, params, seed=4, amplitude=1.0)
    bump = 1e-3 * np.cos(2 * np.pi * 2 / grid16.box_length * grid16.axes())
    s.B[0] += bump[:, None, None]  # one-mode perturbation of B - curl u
    res = constraint_residuals(s)
    bh = grid16.fft(s.B)
    b_l2 = np.sqrt(np.sum(np.abs(bh) ** 2) / grid16.volume)
    bump_l2 = 1e-3 * np.sqrt(grid16.volume / 2.0)
    assert res["curl"] == pytest.approx(bump_l2 / b_l2, rel=1e-6)


def test_zero_rhs(grid16, params):
    z = EMState.zero(grid16)
    dz = rhs_primitive(z, params)
    assert state_l2(dz) == 0.0
    d = diagonalize(z, params)
    dd = rhs_diagonal(d, params)
    assert np.abs(dd.A).max() == 0.0 and np.abs(dd.Bc).max() == 0.0


def test_linearization_quadratic_remainder(grid16, params):
    # || rhs - rhs_linear || = O(amplitude^2): fitted slope 2 +/- 0.1
    amps = [1e-2, 1e-3, 1e-4]
    norms = []
    for a in amps:
        s = random_state(grid16, params, seed=5, amplitude=a)
        full = rhs_primitive(s, params)
        lin = rhs_primitive(s, params, linear_only=True)
        norms.append(state_diff_l2(full, lin))
    slope = np.polyfit(np.log(amps), np.log(norms), 1)[0]
    assert abs(slope - 2.0) < 0.1


def test_diagonal_quadratic_remainder(grid16, params):
    amps = [1e-2, 1e-3, 1e-4]
    norms = []
    for a in amps:
        s = random_state(grid16, params, seed=6, amplitude=a)
        d = diagonalize(s, params)
        full = rhs_diagonal(d, params)
        lin = rhs_diagonal(d, params, linear_only=True)
        w = 1.0 / grid16.volume
        norms.append(np.sqrt(w * (np.sum(np.abs(full.A - lin.A) ** 2)
                                  + np.sum(np.abs(full.Bc - lin.Bc) ** 2))))
    slope = np.polyfit(np.log(amps), np.log(norms), 1)[0]
    assert abs(slope - 2.0) < 0.1


def test_gauss_law_propagation(grid16, params):
    # d/dt (div E + n) = 0 identically under the primitive right-hand side
    s = random_state(grid16, params, seed=7, amplitude=0.1)
    rates = rhs_primitive(s, params)
    g = grid16
    resid = div_hat(g, g.fft(rates.E)) + g.fft(rates.n)
    scale = max(np.abs(g.fft(rates.n)).max(), 1e-30)
    assert np.abs(resid).max() < 1e-12 * scale


def test_rhs_consistency_between_formulations(grid32, params):
    # chain rule through the primitive system matches the diagonal system
    s = random_state(grid32, params, seed=8, amplitude=1e-3)
    d = diagonalize(s, params)
    rates = rhs_primitive(s, params)
    chain = diagonalize(rates, params, check=False)
    direct = rhs_diagonal(d, params)
    scale = max(np.abs(direct.A).max(), np.abs(direct.Bc).max())
    assert np.abs(direct.A - chain.A).max() < 1e-9 * scale
    assert np.abs(direct.Bc - chain.Bc).max() < 1e-9 * scale


def test_acoustic_forcing_of_b_is_curl_form(grid16, params):
    # acoustic-only data: dBc/dt is a pure quadratic curl, divergence-free
    s = random_state(grid16, params, seed=9, amplitude=1e-2)
    d = diagonalize(s, params)
    d_ac = DiagState(grid16, d.A, np.zeros_like(d.Bc), 0.0)
    rates = rhs_diagonal(d_ac, params)
    g = grid16
    div = (g.kx * rates.Bc[0] + g.ky * rates.Bc[1] + g.kz * rates.Bc[2])
    assert np.abs(div).max() < 1e-12 * max(np.abs(rates.Bc).max(), 1e-30)
    assert np.abs(rates.Bc).max() > 0.0  # forcing present


def test_single_mode_states_satisfy_constraints(grid16, params):
    for kind in ("acoustic", "electromagnetic"):
        s = single_mode_state(grid16, params, j=(2, 0, 0), kind=kind)
        res = constraint_residuals(s)
        assert res["gauss"] < 1e-12 and res["div_b"] < 1e-12
        assert res["curl"] < 1e-12
