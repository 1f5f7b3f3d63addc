"""Discrete norms on spectral fields.

L^2 and H^s go through Parseval; L^p for p != 2 uses plain Riemann-cell
quadrature with weight (L/n)^3 (these feed decay-exponent fits with loose
tolerances, so no attempt is made at spectral accuracy); L^inf is the grid
maximum.  Vector fields are measured through the pointwise Euclidean
magnitude, which agrees with the componentwise sum of squares for L^2.
"""

import numpy as np


def _pointwise_magnitude(field):
    v = field.values()
    if field.components == 1:
        return np.abs(v)
    return np.sqrt(np.sum(np.abs(v) ** 2, axis=0))


def norm_l2(field, route="fourier"):
    """L^2 norm via Parseval ("fourier") or cell quadrature ("quadrature")."""
    if route == "fourier":
        return float(np.sqrt(np.sum(np.abs(field.coeffs) ** 2) / field.grid.volume))
    if route == "quadrature":
        m = _pointwise_magnitude(field)
        return float(np.sqrt(np.sum(m**2) * field.grid.cell_volume))
    raise ValueError(f"unknown route {route!r}")


def norm_h(field, s):
    """Sobolev H^s norm, weight sqrt(1+|k|^2)^s in Fourier."""
    w = field.grid.bracket(1.0) ** (2.0 * s)
    return float(np.sqrt(np.sum(w * np.abs(field.coeffs) ** 2) / field.grid.volume))


def norm_lp(field, p):
    """L^p by cell quadrature; p = inf gives the grid maximum."""
    if p == np.inf:
        return float(_pointwise_magnitude(field).max())
    if not p > 1:
        raise ValueError(f"p must be in (1, inf], got {p}")
    m = _pointwise_magnitude(field)
    return float((np.sum(m**p) * field.grid.cell_volume) ** (1.0 / p))


def norm_wsp(field, s, p):
    """W^{s,p} norm: apply the bracket weight <D>^s, then L^p."""
    from .spectral import SpectralField
    w = field.grid.bracket(1.0) ** s
    lifted = SpectralField(field.grid, w * field.coeffs, field.real_valued)
    return norm_lp(lifted, p)


def discrete_norm(field, kind, s=0.0, p=2.0):
    """Dispatch to one of {L2, H, Lp, Wsp, Linf}."""
    if kind == "L2":
        return norm_l2(field)
    if kind == "H":
        return norm_h(field, s)
    if kind == "Lp":
        return norm_lp(field, p)
    if kind == "Wsp":
        return norm_wsp(field, s, p)
    if kind == "Linf":
        return norm_lp(field, np.inf)
    raise ValueError(f"unknown norm kind {kind!r}")
