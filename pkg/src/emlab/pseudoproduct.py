"""Bilinear pseudo-products T_m(f,g) defined by a frequency symbol m(xi, eta).

The Fourier transform of T_m(f,g) at xi is the lattice sum
    (1/L^3) * sum_eta m(xi, eta) fhat(eta) ghat(xi - eta),
the discrete counterpart of the integral definition, so that T_1(f,g) = f*g
pointwise under the package's transform normalization.

Two evaluation paths:

* factored symbols m = m0(xi) m1(eta) m2(xi-eta) go through real space as
  m0(D)[(m1(D)f) (m2(D)g)] with 2/3-rule truncation of both factors and the
  product, which makes the retained modes alias-free;
* non-separable symbols are summed directly over the double lattice
  (quadratic cost, guarded by MAX_DIRECT_N).
"""

from dataclasses import dataclass

import numpy as np

from .errors import CostGuardError
from .spectral import SpectralField

MAX_DIRECT_N = 16


@dataclass(frozen=True)
class BilinearSymbol:
    """Symbol m(xi,eta), either factored or a general sampled table.

    m0, m1, m2: callables taking (kx, ky, kz) broadcastable arrays and
    returning the factor values; missing factors count as 1.  ``full`` is a
    callable (xi, eta) -> values with xi, eta arrays of shape (..., 3); when
    present it overrides the factored form.  ``class_bounds`` records the
    derivative-bound constants of the admissible symbol class (metadata only).
    """

    m0: object = None
    m1: object = None
    m2: object = None
    full: object = None
    class_bounds: tuple = ()
    name: str = ""

    @property
    def separable(self):
        return self.full is None

    def factor_tables(self, grid):
        """Evaluate (m0, m1, m2) on the lattice; None means identity."""
        tabs = []
        for fac in (self.m0, self.m1, self.m2):
            if fac is None:
                tabs.append(None)
            else:
                t = np.asarray(fac(grid.kx, grid.ky, grid.kz))
                tabs.append(np.broadcast_to(t, (grid.n,) * 3))
        return tabs

    def values_pairwise(self, xi, eta):
        """m(xi, eta) for stacked wavevectors of shape (..., 3)."""
        if self.full is not None:
            return np.asarray(self.full(xi, eta))
        out = None
        for fac, arg in ((self.m0, xi), (self.m1, eta), (self.m2, xi - eta)):
            if fac is None:
                continue
            v = np.asarray(fac(arg[..., 0], arg[..., 1], arg[..., 2]))
            out = v if out is None else out * v
        if out is None:
            return np.ones(xi.shape[:-1])
        return out


IDENTITY_SYMBOL = BilinearSymbol(name="identity")


def pseudo_product(symbol, f, g, method="auto"):
    """Apply T_m to two scalar spectral fields on the same grid.

    method: "auto" picks the fast factored path when the symbol is separable,
    otherwise the direct double-lattice sum.  The direct path refuses grids
    above MAX_DIRECT_N points per axis.
    """
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    if f.components != 1 or g.components != 1:
        raise ValueError("pseudo_product takes scalar fields")
    if method == "auto":
        method = "fast" if symbol.separable else "direct"
    if method == "fast":
        if not symbol.separable:
            raise ValueError("fast path requires a separable symbol")
        return _pseudo_product_fast(symbol, f, g)
    if method == "direct":
        return _pseudo_product_direct(symbol, f, g)
    raise ValueError(f"unknown method {method!r}")


def _pseudo_product_fast(symbol, f, g):
    grid = f.grid
    t0, t1, t2 = symbol.factor_tables(grid)
    fh = grid.dealias(f.coeffs)
    gh = grid.dealias(g.coeffs)
    if t1 is not None:
        fh = t1 * fh
    if t2 is not None:
        gh = t2 * gh
    prod = grid.fft(grid.ifft(fh) * grid.ifft(gh))
    if t0 is not None:
        prod = t0 * prod
    out = grid.dealias(prod)
    real = _result_is_real(symbol, f, g, grid)
    return SpectralField.from_coeffs(grid, out, real_valued=real)


def _result_is_real(symbol, f, g, grid):
    """T_m(real, real) is real when every factor satisfies t(k) = conj(t(-k))."""
    if not (f.real_valued and g.real_valued):
        return False
    from .spectral import reflect_conj
    for tab in symbol.factor_tables(grid):
        if tab is None:
            continue
        tab = np.asarray(tab, dtype=np.complex128)
        scale = np.abs(tab).max()
        if scale and np.abs(tab - reflect_conj(tab)).max() > 1e-12 * scale:
            return False
    return True


def _pseudo_product_direct(symbol, f, g):
    """Reference evaluation by explicit convolution over retained modes."""
    grid = f.grid
    n = grid.n
    if n > MAX_DIRECT_N:
        raise CostGuardError(
            f"direct pseudo-product refused for n={n} > {MAX_DIRECT_N}")
    half = n // 2
    j1 = grid.j1
    kcut = grid.dealias_cutoff

    fh = grid.dealias(f.coeffs)
    gh = grid.dealias(g.coeffs)

    # all lattice wavevectors, flattened; eta runs over the full lattice
    jx, jy, jz = np.meshgrid(j1, j1, j1, indexing="ij")
    eta_idx = np.stack([jx.ravel(), jy.ravel(), jz.ravel()], axis=-1)  # (n^3, 3)
    eta = eta_idx * (2.0 * np.pi / grid.box_length)
    fvals = fh.ravel()

    out = np.zeros((n, n, n), dtype=np.complex128)
    keep = np.argwhere(grid.dealias_mask)
    scale = 1.0 / grid.volume
    for ii in keep:
        xi_idx = j1[ii]
        diff = xi_idx[None, :] - eta_idx
        ok = np.all((diff >= -half) & (diff <= half - 1), axis=1)
        d = diff[ok]
        gv = gh[d[:, 0], d[:, 1], d[:, 2]]
        xi = np.broadcast_to(xi_idx * (2.0 * np.pi / grid.box_length), (ok.sum(), 3))
        mv = symbol.values_pairwise(xi, eta[ok])
        out[tuple(ii)] = scale * np.sum(mv * fvals[ok] * gv)
    return SpectralField.from_coeffs(grid, out)
