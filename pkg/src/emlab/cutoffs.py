"""Smooth cutoff symbols built from a resonance report.

All cutoffs are mollified with a quintic smoothstep (the construction only
needs smoothness and the stated supports, not a particular profile):

* theta: 1 on B(0,1), 0 outside B(0,2); low/high splitters Z_l = theta(|.|/M0),
  Z_h = 1 - Z_l with M0 >= C_R.
* chi_O: 1 within delta0/2 of the outcome radii, 0 beyond delta0;
  chi_O_tilde = 1 - chi_O.
* chi_S / chi_T per phase: a partition built from the relative size of
  |phi| versus |grad_eta phi|, multiplied by a mollifier that vanishes within
  delta0/20 of the resonance set and equals 1 beyond delta0/10.  chi_S
  vanishes near {phi = 0} (so chi_S/phi stays finite) and chi_T vanishes
  near {grad_eta phi = 0}; their sum is exactly the resonance mollifier, so
  it equals 1 wherever dist((xi,eta), R) > delta0/10.
* zeta1 / zeta2: a paraproduct pair, homogeneous of degree zero outside the
  unit ball, with |xi - eta| <= 2 |eta| on supp zeta1 (and symmetrically for
  zeta2) at |(xi,eta)| >= 1.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintViolation
from .resonance import (PhaseSpec, phase_eta_gradient, phase_grad_radial,
                        phase_value, phase_value_radial)


def smoothstep(t):
    """Quintic smoothstep: 0 for t<=0, 1 for t>=1, C^2 matching at the ends."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def ramp(x, lo, hi):
    """smoothstep((x - lo)/(hi - lo)); constant outside [lo, hi]."""
    return smoothstep((np.asarray(x, float) - lo) / (hi - lo))


def theta_bump(x):
    """Radial bump equal to 1 on B(0,1) and 0 outside B(0,2)."""
    return 1.0 - ramp(np.abs(x), 1.0, 2.0)


def _dist_to_intervals(t, intervals):
    """Distance from radii t to a union of closed intervals."""
    t = np.asarray(t, float)
    if not intervals:
        return np.full(t.shape, np.inf)
    d = np.full(t.shape, np.inf)
    for lo, hi in intervals:
        d = np.minimum(d, np.maximum(np.maximum(lo - t, t - hi), 0.0))
    return d


def _orbit_distance_sq(xi, eta, s0, r0):
    """Squared distance from (xi, eta) to the rotation orbit of (s0 e, r0 e).

    min over unit vectors w of |xi - s0 w|^2 + |eta - r0 w|^2
      = |xi|^2 + |eta|^2 + s0^2 + r0^2 - 2 |s0 xi + r0 eta|.
    """
    q = (np.sum(xi * xi, axis=-1) + np.sum(eta * eta, axis=-1)
         + s0 * s0 + r0 * r0)
    mix = np.linalg.norm(s0 * xi + r0 * eta, axis=-1)
    return np.maximum(q - 2.0 * mix, 0.0)


def _orbit_distance_sq_radial(s, r, s0, r0):
    """Same distance restricted to the collinear slice (signed radii)."""
    q = s * s + r * r + s0 * s0 + r0 * r0
    mix = np.abs(s0 * s + r0 * r)
    return np.maximum(q - 2.0 * mix, 0.0)


@dataclass
class CutoffSuite:
    """Sampled cutoff symbols derived from one ResonanceReport."""

    c_s: float
    M0: float
    delta0: float
    outcome_intervals: list
    germ_intervals: list
    resonance_points: dict     # PhaseSpec -> (m, 2) array

    # -- low/high frequency split ------------------------------------------
    def z_low(self, xi_mag):
        return theta_bump(np.asarray(xi_mag, float) / self.M0)

    def z_high(self, xi_mag):
        return 1.0 - self.z_low(xi_mag)

    # -- outcome cutoff -----------------------------------------------------
    def chi_outcome(self, xi_mag):
        d = _dist_to_intervals(xi_mag, self.outcome_intervals)
        return 1.0 - ramp(d, self.delta0 / 2.0, self.delta0)

    def chi_outcome_tilde(self, xi_mag):
        return 1.0 - self.chi_outcome(xi_mag)

    def chi_outcome_tilde_table(self, grid):
        """chi_O_tilde evaluated on a grid's |k| lattice (filter table)."""
        return self.chi_outcome_tilde(grid.kmag)

    # -- per-phase S/T partition ---------------------------------------------
    def _rho_mollifier(self, dist_sq):
        lo = self.delta0 / 20.0
        hi = self.delta0 / 10.0
        return ramp(np.sqrt(dist_sq), lo, hi)

    def _partition(self, phi, grad_mag, rho):
        denom = phi * phi + grad_mag * grad_mag
        q = np.where(denom > 0.0, phi * phi / np.where(denom > 0, denom, 1.0), 0.5)
        h = ramp(q, 0.25, 0.75)
        return rho * h, rho * (1.0 - h)

    def chi_st(self, spec, xi, eta):
        """(chi_S, chi_T) at wavevectors xi, eta of shape (..., 3)."""
        xi = np.asarray(xi, float)
        eta = np.asarray(eta, float)
        phi = phase_value(spec, xi, eta)
        grad = np.linalg.norm(phase_eta_gradient(spec, xi, eta), axis=-1)
        pts = self.resonance_points.get(spec)
        if pts is None or len(pts) == 0:
            rho = np.ones(phi.shape)
        else:
            d2 = np.full(phi.shape, np.inf)
            for s0, r0 in pts:
                d2 = np.minimum(d2, _orbit_distance_sq(xi, eta, s0, r0))
            rho = self._rho_mollifier(d2)
        return self._partition(phi, grad, rho)

    def chi_st_radial(self, spec, s, r):
        """(chi_S, chi_T) on the collinear slice."""
        s = np.asarray(s, float)
        r = np.asarray(r, float)
        phi = phase_value_radial(spec, s, r)
        grad = np.abs(phase_grad_radial(spec, s, r))
        pts = self.resonance_points.get(spec)
        if pts is None or len(pts) == 0:
            rho = np.ones(np.broadcast(s, r).shape)
        else:
            d2 = np.full(np.broadcast(s, r).shape, np.inf)
            for s0, r0 in pts:
                d2 = np.minimum(d2, _orbit_distance_sq_radial(s, r, s0, r0))
            rho = self._rho_mollifier(d2)
        return self._partition(phi, grad, rho)

    def resonance_distance_radial(self, spec, s, r):
        pts = self.resonance_points.get(spec)
        if pts is None or len(pts) == 0:
            return np.full(np.broadcast(np.asarray(s), np.asarray(r)).shape, np.inf)
        d2 = np.full(np.broadcast(np.asarray(s), np.asarray(r)).shape, np.inf)
        for s0, r0 in pts:
            d2 = np.minimum(d2, _orbit_distance_sq_radial(np.asarray(s, float),
                                                          np.asarray(r, float), s0, r0))
        return np.sqrt(d2)

    # -- paraproduct pair ----------------------------------------------------
    def zeta1(self, xi, eta):
        xi = np.asarray(xi, float)
        eta = np.asarray(eta, float)
        neta = np.linalg.norm(eta, axis=-1)
        ndiff = np.linalg.norm(xi - eta, axis=-1)
        tot = np.sqrt(np.sum(xi * xi, axis=-1) + neta * neta)
        inner = 1.0 - ramp(tot, 0.5, 1.0)
        den = neta + ndiff
        ratio = np.where(den > 0.0, (neta - ndiff) / np.where(den > 0, den, 1.0), 0.0)
        h = ramp(ratio, -1.0 / 3.0, 1.0 / 3.0)
        return inner * 0.5 + (1.0 - inner) * h

    def zeta2(self, xi, eta):
        return 1.0 - self.zeta1(xi, eta)

    # -- diagnostics ----------------------------------------------------------
    def chi_s_over_phi_scan(self, spec, radius, step=0.05):
        """Grid scan of chi_S/phi on the slice: max value and a growth fit.

        Returns (max_ratio, growth_exponent); the ratio is finite on the
        support of chi_S by construction, and the exponent is a log-log fit
        of the running max against |(s, r)| (reported, not asserted).
        """
        s = np.arange(0.0, radius + step, step)
        r = np.arange(-radius, radius + step, step)
        S, R = np.meshgrid(s, r, indexing="ij")
        chi_s, _ = self.chi_st_radial(spec, S, R)
        phi = phase_value_radial(spec, S, R)
        ratio = np.zeros_like(phi)
        on = chi_s > 0.0
        ratio[on] = np.abs(chi_s[on] / phi[on])
        rad = np.hypot(S, R)
        bins = np.linspace(1.0, radius, 12)
        maxima = []
        for lo, hi in zip(bins[:-1], bins[1:]):
            sel = (rad >= lo) & (rad < hi) & on
            if sel.any():
                maxima.append((0.5 * (lo + hi), ratio[sel].max()))
        exponent = np.nan
        if len(maxima) >= 4:
            xs = np.log([m[0] for m in maxima])
            ys = np.log([max(m[1], 1e-300) for m in maxima])
            exponent = float(np.polyfit(xs, ys, 1)[0])
        return float(ratio.max()), exponent


def build_cutoff_suite(report, M0=None):
    """Construct the cutoff family; requires a separated resonance report."""
    if not report.separated:
        raise ConstraintViolation(
            "cutoff construction needs separated resonances: the outcome and "
            "germ radius sets intersect, so no delta0 margin exists")
    C_R = report.C_R
    if M0 is None:
        M0 = 2.0 * C_R
    if M0 < C_R:
        raise ValueError(f"M0 must be >= C_R = {C_R}, got {M0}")
    return CutoffSuite(
        c_s=report.c_s, M0=float(M0), delta0=float(report.delta0),
        outcome_intervals=list(report.outcome_intervals),
        germ_intervals=list(report.germ_intervals),
        resonance_points=dict(report.points))
