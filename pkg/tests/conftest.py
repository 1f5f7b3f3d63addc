import numpy as np
import pytest

from emlab import Grid3, PhysicalParams, SpectralField


@pytest.fixture(scope="session")
def grid16():
    return Grid3(32.0, 16)


@pytest.fixture(scope="session")
def grid32():
    return Grid3(64.0, 32)


@pytest.fixture(scope="session")
def params():
    return PhysicalParams(0.5)


def random_scalar(grid, seed, band_fraction=0.3, zero_mean=True):
    """Band-limited random real scalar SpectralField."""
    rng = np.random.default_rng(seed)
    f = rng.standard_normal((grid.n,) * 3)
    F = grid.fft(f)
    j = grid.j1
    jx, jy, jz = np.meshgrid(j, j, j, indexing="ij")
    F *= (jx**2 + jy**2 + jz**2) <= (band_fraction * grid.n) ** 2
    if zero_mean:
        F[0, 0, 0] = 0.0
    return SpectralField.from_coeffs(grid, F, real_valued=True)


def random_vector(grid, seed, band_fraction=0.3, zero_mean=True):
    comps = [random_scalar(grid, seed + i, band_fraction, zero_mean).coeffs
             for i in range(3)]
    return SpectralField(grid, np.stack(comps), real_valued=True)


def single_mode(grid, j, component=None):
    """Complex exponential e^{i k.x} with lattice index j."""
    F = np.zeros((grid.n,) * 3, complex)
    F[tuple(np.asarray(j) % grid.n)] = grid.volume
    if component is None:
        return SpectralField.from_coeffs(grid, F, real_valued=False)
    V = np.zeros((3,) + (grid.n,) * 3, complex)
    V[component] = F
    return SpectralField.from_coeffs(grid, V, real_valued=False)


def state_diff_l2(a, b):
    """Combined L2 distance between two EMStates."""
    w = a.grid.cell_volume
    tot = 0.0
    for fa, fb in ((a.u, b.u), (a.n, b.n), (a.E, b.E), (a.B, b.B)):
        tot += np.sum((fa - fb) ** 2) * w
    return float(np.sqrt(tot))


def state_l2(a):
    w = a.grid.cell_volume
    tot = sum(np.sum(f**2) * w for f in (a.u, a.n, a.E, a.B))
    return float(np.sqrt(tot))


def diag_diff_rel(d1, d2, s=2):
    """Relative H^s distance between two DiagStates."""
    g = d1.grid
    w = g.bracket(1.0) ** (2 * s) / g.volume
    num = np.sqrt(np.sum(w * np.abs(d1.A - d2.A) ** 2)
                  + np.sum(w * np.abs(d1.Bc - d2.Bc) ** 2))
    den = np.sqrt(np.sum(w * np.abs(d1.A) ** 2) + np.sum(w * np.abs(d1.Bc) ** 2))
    return float(num / den)
