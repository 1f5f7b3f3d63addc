"""Space-time resonance analysis for the quadratic interaction phases.

A phase is phi(xi, eta) = <xi>_k + e1 <eta>_l + e2 <xi-eta>_m with signs
e1, e2 and speeds k, l, m drawn from {1, c_s}; <x>_a = sqrt(1 + a^2 |x|^2).
Zeros of phi form the set S, zeros of the eta-gradient the set T, and their
intersection R is the space-time resonant set.  Wherever the eta-gradient
vanishes with eta and xi-eta nonzero, the two vectors are collinear with xi,
so R lives on the collinear slice and the search runs over signed radial
pairs (s, r) meaning xi = s e, eta = r e for a unit vector e, with s >= 0.
"""

from dataclasses import dataclass

import numpy as np


def _speed(value, c_s):
    if isinstance(value, str):
        if value == "1":
            return 1.0
        if value in ("cs", "c_s"):
            return float(c_s)
        raise ValueError(f"unknown speed label {value!r}")
    return float(value)


@dataclass(frozen=True)
class PhaseSpec:
    """One interaction phase: signs (eps1, eps2) and speeds (k, l, m)."""

    eps1: int
    eps2: int
    k_speed: float
    l_speed: float
    m_speed: float

    def __post_init__(self):
        if self.eps1 not in (-1, 1) or self.eps2 not in (-1, 1):
            raise ValueError("signs must be +1 or -1")
        for s in (self.k_speed, self.l_speed, self.m_speed):
            if not 0.0 < s <= 1.0:
                raise ValueError(f"speeds must lie in (0,1], got {s}")

    @classmethod
    def make(cls, eps1, eps2, k, l, m, c_s):
        return cls(int(eps1), int(eps2), _speed(k, c_s), _speed(l, c_s),
                   _speed(m, c_s))

    def label(self, c_s=None):
        def sp(v):
            if v == 1.0:
                return "1"
            if c_s is not None and v == c_s:
                return "cs"
            return f"{v:g}"

        sgn = {1: "+", -1: "-"}
        return (f"phi[{sgn[self.eps1]}{sgn[self.eps2]}]"  # comma-free for CSVs
                f"({sp(self.k_speed)};{sp(self.l_speed)};{sp(self.m_speed)})")

    def swapped(self):
        """The equivalent spec with the two input slots exchanged."""
        return PhaseSpec(self.eps2, self.eps1, self.k_speed, self.m_speed,
                         self.l_speed)


def bracket(x, alpha):
    """sqrt(1 + alpha^2 x^2), elementwise, for signed radii or magnitudes."""
    ax = np.multiply(alpha, x)
    return np.sqrt(1.0 + ax * ax)


def enumerate_interaction_specs(c_s):
    """All 32 sign/speed combinations reachable from the quadratic terms.

    Outputs propagate at speeds c_s (acoustic block) and 1 (electromagnetic
    block); each input slot carries either block with either conjugation
    sign.
    """
    specs = []
    for k in (1.0, c_s):
        for e1 in (1, -1):
            for e2 in (1, -1):
                for l in (1.0, c_s):
                    for m in (1.0, c_s):
                        specs.append(PhaseSpec(e1, e2, k, l, m))
    return specs


# ---------------------------------------------------------------------------
# Phase values and derivatives
# ---------------------------------------------------------------------------

def phase_value(spec, xi, eta):
    """phi at wavevectors xi, eta of shape (..., 3)."""
    xi = np.asarray(xi, float)
    eta = np.asarray(eta, float)
    nxi = np.linalg.norm(xi, axis=-1)
    neta = np.linalg.norm(eta, axis=-1)
    ndiff = np.linalg.norm(xi - eta, axis=-1)
    return (bracket(nxi, spec.k_speed) + spec.eps1 * bracket(neta, spec.l_speed)
            + spec.eps2 * bracket(ndiff, spec.m_speed))


def phase_eta_gradient(spec, xi, eta):
    """Gradient of phi in eta: e1 l^2 eta/<eta>_l + e2 m^2 (eta-xi)/<xi-eta>_m."""
    xi = np.asarray(xi, float)
    eta = np.asarray(eta, float)
    neta = np.linalg.norm(eta, axis=-1)[..., None]
    ndiff = np.linalg.norm(xi - eta, axis=-1)[..., None]
    l2 = spec.l_speed**2
    m2 = spec.m_speed**2
    term1 = spec.eps1 * l2 * eta / bracket(neta, spec.l_speed)
    term2 = spec.eps2 * m2 * (eta - xi) / bracket(ndiff, spec.m_speed)
    return term1 + term2


def phase_value_radial(spec, s, r):
    """phi on the collinear slice xi = s e, eta = r e (signed radii)."""
    s = np.asarray(s, float)
    r = np.asarray(r, float)
    return (bracket(s, spec.k_speed) + spec.eps1 * bracket(r, spec.l_speed)
            + spec.eps2 * bracket(s - r, spec.m_speed))


def phase_grad_radial(spec, s, r):
    """Component of the eta-gradient along the slice direction."""
    l2 = spec.l_speed**2
    m2 = spec.m_speed**2
    return (spec.eps1 * l2 * r / bracket(r, spec.l_speed)
            + spec.eps2 * m2 * (r - s) / bracket(s - r, spec.m_speed))


def _system_jacobian(spec, s, r):
    """Jacobian of (phi, g) with respect to (s, r) on the slice."""
    k2 = spec.k_speed**2
    l2 = spec.l_speed**2
    m2 = spec.m_speed**2
    bs = bracket(s, spec.k_speed)
    br = bracket(r, spec.l_speed)
    bd = bracket(s - r, spec.m_speed)
    dphi_s = k2 * s / bs + spec.eps2 * m2 * (s - r) / bd
    dphi_r = spec.eps1 * l2 * r / br - spec.eps2 * m2 * (s - r) / bd
    dg_s = -spec.eps2 * m2 / bd**3
    dg_r = spec.eps1 * l2 / br**3 + spec.eps2 * m2 / bd**3
    return np.array([[dphi_s, dphi_r], [dg_s, dg_r]])


# ---------------------------------------------------------------------------
# Root finding on the reduced slice
# ---------------------------------------------------------------------------

def _polish_root(spec, s0, r0, tol, max_iter=60):
    """Damped Newton on {phi = 0, g = 0}; returns (s, r) or None."""
    x = np.array([s0, r0], float)
    for _ in range(max_iter):
        f = np.array([phase_value_radial(spec, x[0], x[1]),
                      phase_grad_radial(spec, x[0], x[1])])
        if np.abs(f).max() < 0.1 * tol:
            break
        J = _system_jacobian(spec, x[0], x[1])
        try:
            delta = np.linalg.solve(J, f)
        except np.linalg.LinAlgError:
            return None
        step = np.linalg.norm(delta)
        if step > 1.0:  # keep Newton local
            delta *= 1.0 / step
        x = x - delta
        if not np.all(np.isfinite(x)):
            return None
    phi = phase_value_radial(spec, x[0], x[1])
    g = phase_grad_radial(spec, x[0], x[1])
    if abs(phi) < tol and abs(g) < tol:
        return x
    return None


def find_resonances(spec, search_radius, tol=1e-9, seed_step=0.01):
    """Space-time resonances of one phase on the reduced slice.

    Dense sign-change scan on a (s, r) grid with the given seed step, then
    Newton polishing of candidate cells; polished points are deduplicated
    and validated to |phi|, |g| < tol.  An empty result is a valid outcome
    (e.g. all-plus phases are bounded below by 3).
    """
    R = float(search_radius)
    s = np.arange(0.0, R + seed_step, seed_step)
    r = np.arange(-R, R + seed_step, seed_step)
    S, Rg = np.meshgrid(s, r, indexing="ij")
    P = phase_value_radial(spec, S, Rg)
    G = phase_grad_radial(spec, S, Rg)
    sp = np.signbit(P)
    sg = np.signbit(G)
    flip_p = (sp[:-1, :-1] != sp[1:, :-1]) | (sp[:-1, :-1] != sp[:-1, 1:]) \
        | (sp[:-1, :-1] != sp[1:, 1:])
    flip_g = (sg[:-1, :-1] != sg[1:, :-1]) | (sg[:-1, :-1] != sg[:-1, 1:]) \
        | (sg[:-1, :-1] != sg[1:, 1:])
    cells = np.argwhere(flip_p & flip_g)
    roots = []
    for i, j in cells:
        got = _polish_root(spec, s[i] + seed_step / 2, r[j] + seed_step / 2, tol)
        if got is None:
            continue
        sx, rx = got
        if not (-tol <= sx <= R + 1e-6) or abs(rx) > R + 1e-6:
            continue
        sx = max(sx, 0.0)
        if not any(abs(sx - a) < 1e-6 and abs(rx - b) < 1e-6 for a, b in roots):
            roots.append((float(sx), float(rx)))
    roots.sort()
    return np.array(roots).reshape(-1, 2)


def sample_zero_set(fun, search_radius, step=0.05):
    """Sample the zero level set of fun(s, r) on the slice by 1D bisection.

    Scans grid rows and columns for sign changes and refines each crossing
    with bisection; returns an (m, 2) array of points.
    """
    from scipy.optimize import brentq
    R = float(search_radius)
    s = np.arange(0.0, R + step, step)
    r = np.arange(-R, R + step, step)
    pts = []
    F = fun(s[:, None], r[None, :])
    sgn = np.signbit(F)
    rows, cols = np.nonzero(sgn[:-1, :] != sgn[1:, :])
    for i, j in zip(rows, cols):
        try:
            x = brentq(lambda t: fun(t, r[j]), s[i], s[i + 1], xtol=1e-12)
            pts.append((x, r[j]))
        except ValueError:
            pass
    rows, cols = np.nonzero(sgn[:, :-1] != sgn[:, 1:])
    for i, j in zip(rows, cols):
        try:
            x = brentq(lambda t: fun(s[i], t), r[j], r[j + 1], xtol=1e-12)
            pts.append((s[i], x))
        except ValueError:
            pass
    return np.array(pts).reshape(-1, 2)


# ---------------------------------------------------------------------------
# Aggregated report
# ---------------------------------------------------------------------------

def _merge_intervals(values, pad):
    """Collapse a set of radii into a union of padded closed intervals."""
    if len(values) == 0:
        return []
    vals = np.sort(np.asarray(values, float))
    out = [[vals[0] - pad, vals[0] + pad]]
    for v in vals[1:]:
        if v - pad <= out[-1][1]:
            out[-1][1] = max(out[-1][1], v + pad)
        else:
            out.append([v - pad, v + pad])
    return [tuple(iv) for iv in out]


def _interval_gap(a_intervals, b_intervals):
    """Smallest distance between two interval unions (0 if they overlap)."""
    gap = np.inf
    for alo, ahi in a_intervals:
        for blo, bhi in b_intervals:
            if ahi < blo:
                gap = min(gap, blo - ahi)
            elif bhi < alo:
                gap = min(gap, alo - bhi)
            else:
                return 0.0
    return gap


@dataclass
class ResonanceReport:
    """Aggregated resonance geometry for one sound speed."""

    c_s: float
    search_radius: float
    tol: float
    points: dict                 # PhaseSpec -> (m, 2) array of (s, r)
    s_clouds: dict               # PhaseSpec -> sampled points of {phi = 0}
    t_clouds: dict               # PhaseSpec -> sampled points of {grad = 0}
    C_R: float
    outcome_intervals: list      # unions of |xi| radii
    germ_intervals: list         # unions of |eta| and |xi - eta| radii
    separated: bool
    delta0: float

    @property
    def n_points(self):
        return int(sum(len(p) for p in self.points.values()))

    def all_points(self):
        rows = []
        for spec, pts in self.points.items():
            for s, r in pts:
                rows.append((spec, float(s), float(r)))
        return rows


def resonance_report(c_s, search_radius=8.0, tol=1e-9, seed_step=0.01,
                     cloud_step=0.05, with_clouds=True):
    """Locate all space-time resonances and derive the separation verdict.

    The outcome set collects |xi| radii of resonance points, the germ set
    the |eta| and |xi-eta| radii; both are stored as interval unions padded
    by 2*tol.  separated means the unions are disjoint, and delta0 is one
    tenth of the smallest gap between them (the cutoff construction uses a
    10*delta0 safety margin around the outcome set).
    """
    specs = enumerate_interaction_specs(c_s)
    points = {}
    s_clouds = {}
    t_clouds = {}
    for spec in specs:
        pts = find_resonances(spec, search_radius, tol=tol, seed_step=seed_step)
        if len(pts):
            points[spec] = pts
        if with_clouds:
            s_pts = sample_zero_set(
                lambda s, r, sp=spec: phase_value_radial(sp, s, r),
                search_radius, cloud_step)
            t_pts = sample_zero_set(
                lambda s, r, sp=spec: phase_grad_radial(sp, s, r),
                search_radius, cloud_step)
            if len(s_pts):
                s_clouds[spec] = s_pts
            if len(t_pts):
                t_clouds[spec] = t_pts

    radii = [np.hypot(s, r) for pts in points.values() for s, r in pts]
    C_R = 1.0 + (max(radii) if radii else 0.0)
    pad = 2.0 * tol
    out_radii = [abs(s) for pts in points.values() for s, _ in pts]
    germ_radii = [abs(r) for pts in points.values() for _, r in pts]
    germ_radii += [abs(s - r) for pts in points.values() for s, r in pts]
    outcome = _merge_intervals(out_radii, pad)
    germ = _merge_intervals(germ_radii, pad)
    gap = _interval_gap(outcome, germ) if (outcome and germ) else np.inf
    separated = gap > 0.0
    if not separated:
        delta0 = 0.0
    elif np.isinf(gap):
        delta0 = 0.1  # no resonances at all: any margin works, pick a default
    else:
        delta0 = gap / 10.0
    return ResonanceReport(
        c_s=c_s, search_radius=search_radius, tol=tol, points=points,
        s_clouds=s_clouds, t_clouds=t_clouds, C_R=C_R,
        outcome_intervals=outcome, germ_intervals=germ,
        separated=separated, delta0=delta0)


# ---------------------------------------------------------------------------
# Explicit high-frequency phase lower bound
# ---------------------------------------------------------------------------

def phase_bound_value(c_s, C_R):
    """Closed-form lower bound (sqrt(1 + (c_s C_R)^2) - c_s C_R) / 2."""
    x = c_s * C_R
    return (np.sqrt(1.0 + x * x) - x) / 2.0


def verify_phase_lower_bound(c_s, C_R, C0, step=0.01, s_max=None,
                             chunk=20000):
    """Check min |phi| >= the closed-form bound on {|xi| >= C0, |eta| <= C_R}.

    The family has acoustic output (first speed c_s) and both signs/speeds in
    the input slots: 16 phases.  Sampling runs over the collinear slice
    (s, r) in [C0, s_max] x [-C_R, C_R]; for fixed radii, phi is monotone in
    the angle between xi and eta, so its range over the full region is
    spanned by the two collinear configurations and the slice minimum of
    |phi| bounds the region minimum whenever phi keeps one sign (recorded as
    ``sign_definite`` per phase).

    pass/fail is a reported outcome, not an exception.
    """
    if not C0 > C_R:
        raise ValueError(f"need C0 > C_R, got C0={C0}, C_R={C_R}")
    if s_max is None:
        s_max = 20.0 * C0
    svals = np.arange(C0, s_max + step, step)
    rvals = np.arange(-C_R, C_R + step, step)
    per_phase = {}
    for l in (1.0, c_s):
        for m in (1.0, c_s):
            for e1 in (1, -1):
                for e2 in (1, -1):
                    spec = PhaseSpec(e1, e2, c_s, l, m)
                    per_phase[spec] = [np.inf, 1, 1]  # min, saw_pos, saw_neg
    for i0 in range(0, len(svals), chunk):
        sc = svals[i0:i0 + chunk]
        bs = bracket(sc, c_s)[:, None]
        for m in (1.0, c_s):
            bd = bracket(sc[:, None] - rvals[None, :], m)
            for e2 in (1, -1):
                base = bs + e2 * bd
                for l in (1.0, c_s):
                    bl = bracket(rvals, l)[None, :]
                    for e1 in (1, -1):
                        M = base + e1 * bl
                        rec = per_phase[PhaseSpec(e1, e2, c_s, l, m)]
                        rec[0] = min(rec[0], float(np.abs(M).min()))
                        rec[1] = min(rec[1], int((M > 0).all()))
                        rec[2] = min(rec[2], int((M < 0).all()))
    bound = phase_bound_value(c_s, C_R)
    rows = {}
    min_phi = np.inf
    for spec, (mn, allpos, allneg) in per_phase.items():
        rows[spec] = {"min_phi": mn, "sign_definite": bool(allpos or allneg)}
        min_phi = min(min_phi, mn)
    return {
        "c_s": c_s, "C_R": C_R, "C0": C0, "step": step, "s_max": s_max,
        "min_phi": float(min_phi), "bound": float(bound),
        "passed": bool(min_phi >= bound),
        "per_phase": rows,
    }
