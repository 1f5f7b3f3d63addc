"""Physical state, dispersive diagonalization, and both right-hand sides.

The primitive unknowns are (u, n, E, B) near the equilibrium (0, 0, 0, 0)
with density perturbation n = rho - 1 and cubic pressure p = (c_s^2/3) rho^3.
The complex dispersive variables are

    A  = (1/2) (<D>_cs/|D| n + i (grad/|D|) . u)
    Bc = -(grad/|D|) x E + i (<D>/|D|) B

which evolve as two Klein-Gordon-type equations with speeds c_s and 1 plus
quadratic terms; the primitive unknowns are recovered from Re/Im parts taken
in physical space.  The recovery formulas enforce the Gauss law, div B = 0,
zero means, and B = curl u by construction.

Zero modes: the diagonalization multipliers are singular at k = 0 and
annihilate means.  On the torus the means of u and E are not conserved by the
full nonlinear flow, so the primitive right-hand side pins them to zero
(``project_means``), which restricts the dynamics to the zero-mean sector
that the diagonal formulation represents.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintViolation
from .spectral import (Grid3, curl_hat, div_hat, grad_hat, imag_part_hat,
                       project_div_free_hat, real_part_hat)


@dataclass(frozen=True)
class PhysicalParams:
    """Reduced one-fluid constants; only the sound speed survives scaling."""

    c_s: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.c_s < 1.0:
            raise ValueError(f"c_s must lie in (0,1), got {self.c_s}")

    def pressure(self, rho):
        return (self.c_s**2 / 3.0) * rho**3


@dataclass
class EMState:
    """Primitive unknowns on a grid, stored as real-space real arrays."""

    grid: Grid3
    u: np.ndarray   # (3,n,n,n)
    n: np.ndarray   # (n,n,n)
    E: np.ndarray   # (3,n,n,n)
    B: np.ndarray   # (3,n,n,n)
    time: float = 0.0

    @classmethod
    def zero(cls, grid, time=0.0):
        n = grid.n
        return cls(grid, np.zeros((3, n, n, n)), np.zeros((n, n, n)),
                   np.zeros((3, n, n, n)), np.zeros((3, n, n, n)), time)

    def copy(self):
        return EMState(self.grid, self.u.copy(), self.n.copy(),
                       self.E.copy(), self.B.copy(), self.time)

    def fields(self):
        return {"u": self.u, "n": self.n, "E": self.E, "B": self.B}


@dataclass
class DiagState:
    """Dispersive variables (A, Bc) as Fourier coefficient arrays."""

    grid: Grid3
    A: np.ndarray    # (n,n,n) complex
    Bc: np.ndarray   # (3,n,n,n) complex
    time: float = 0.0

    @classmethod
    def zero(cls, grid, time=0.0):
        n = grid.n
        return cls(grid, np.zeros((n, n, n), complex),
                   np.zeros((3, n, n, n), complex), time)

    def copy(self):
        return DiagState(self.grid, self.A.copy(), self.Bc.copy(), self.time)

    def norm_l2(self):
        w = 1.0 / self.grid.volume
        return float(np.sqrt(w * (np.sum(np.abs(self.A) ** 2)
                                  + np.sum(np.abs(self.Bc) ** 2))))

    def norm_h(self, s):
        w = self.grid.bracket(1.0) ** (2.0 * s) / self.grid.volume
        return float(np.sqrt(np.sum(w * np.abs(self.A) ** 2)
                             + np.sum(w * np.abs(self.Bc) ** 2)))


@dataclass
class Profiles:
    """Profiles a = e^{-it<D>_cs} A, b = e^{-it<D>} Bc (Fourier coefficients)."""

    grid: Grid3
    a: np.ndarray
    b: np.ndarray
    time: float = 0.0

    def norm_h(self, s):
        w = self.grid.bracket(1.0) ** (2.0 * s) / self.grid.volume
        return float(np.sqrt(np.sum(w * np.abs(self.a) ** 2)
                             + np.sum(w * np.abs(self.b) ** 2)))


def to_profiles(d, params):
    """Pull the dispersive variables back along the linear group."""
    g = d.grid
    pa = np.exp(-1j * d.time * g.bracket(params.c_s))
    pb = np.exp(-1j * d.time * g.bracket(1.0))
    return Profiles(g, pa * d.A, pb * d.Bc, d.time)


def from_profiles(p, params):
    g = p.grid
    pa = np.exp(1j * p.time * g.bracket(params.c_s))
    pb = np.exp(1j * p.time * g.bracket(1.0))
    return DiagState(g, pa * p.a, pb * p.b, p.time)


# ---------------------------------------------------------------------------
# Diagonalization and recovery
# ---------------------------------------------------------------------------

def diagonalize(state, params, check=True, tol=1e-9):
    """Map an EMState to the dispersive variables.

    With ``check`` the state must satisfy the structural constraints (zero
    means, Gauss law, div B = 0) to within ``tol``; violating states are
    rejected with the residual report attached.
    """
    if check:
        res = constraint_residuals(state)
        bad = {k: v for k, v in res.items()
               if k in ("gauss", "div_b", "mean") and v > tol}
        if bad:
            raise ConstraintViolation(
                f"state at t={state.time} violates constraints: {bad}", res)
    g = state.grid
    uh = g.fft(state.u)
    nh = g.fft(state.n)
    eh = g.fft(state.E)
    bh = g.fft(state.B)
    km = g.kmag_safe
    A = 0.5 * (g.bracket(params.c_s) * nh + 1j * div_hat(g, uh)) / km
    A[0, 0, 0] = 0.0
    Bc = (-curl_hat(g, eh) + 1j * g.bracket(1.0) * bh) / km
    Bc[:, 0, 0, 0] = 0.0
    return DiagState(g, A, Bc, state.time)


def _recover_un_hat(d, params):
    """Fourier coefficients of (u, n) from a DiagState (no transforms)."""
    g = d.grid
    km = g.kmag_safe
    ReA, ImA = real_part_hat(d.A), imag_part_hat(d.A)
    ImB = imag_part_hat(d.Bc)
    nh = 2.0 * g.kmag / g.bracket(params.c_s) * ReA
    qu = np.stack([-2j * g.kdx / km * ImA, -2j * g.kdy / km * ImA,
                   -2j * g.kdz / km * ImA])
    qu[:, 0, 0, 0] = 0.0
    pu = curl_hat(g, ImB) / (km * g.bracket(1.0))
    pu[:, 0, 0, 0] = 0.0
    return qu + pu, nh


def reconstruct(d, params):
    """Recover the primitive unknowns; output satisfies all constraints."""
    g = d.grid
    km = g.kmag_safe
    uh, nh = _recover_un_hat(d, params)
    ReB = real_part_hat(d.Bc)
    ImB = imag_part_hat(d.Bc)
    pe = -curl_hat(g, ReB) / km
    pe[:, 0, 0, 0] = 0.0
    # Gauss law pins the curl-free part: i k . E = -n
    qe = np.stack([1j * g.kdx * nh, 1j * g.kdy * nh, 1j * g.kdz * nh]) / g.k2_safe
    qe[:, 0, 0, 0] = 0.0
    bh = g.kmag / g.bracket(1.0) * ImB
    return EMState(g, g.ifft(uh).real, g.ifft(nh).real,
                   g.ifft(pe + qe).real, g.ifft(bh).real, d.time)


def constraint_residuals(state):
    """Relative L2 residuals of the Gauss law, div B, and B = curl u.

    Also reports the largest field mean under "mean" (n and B components
    must be mean-free for the dispersive variables to represent the state).
    """
    g = state.grid
    uh = g.fft(state.u)
    nh = g.fft(state.n)
    eh = g.fft(state.E)
    bh = g.fft(state.B)

    def l2(c):
        return float(np.sqrt(np.sum(np.abs(c) ** 2) / g.volume))

    def rel(num, den):
        return num / max(den, 1e-300)

    gauss = rel(l2(div_hat(g, eh) + nh), l2(nh))
    div_b = rel(l2(div_hat(g, bh)), l2(g.kmag * bh))
    curl_c = rel(l2(bh - curl_hat(g, uh)), l2(bh))
    # field means relative to each field's rms level
    mean = 0.0
    for ch in (uh, nh, eh, bh):
        m = float(np.abs(np.atleast_1d(ch[..., 0, 0, 0])).max()) / g.volume
        rms = l2(ch) / g.volume**0.5
        mean = max(mean, rel(m, rms))
    return {"gauss": gauss, "div_b": div_b, "curl": curl_c, "mean": mean}


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------

def rhs_primitive(state, params, linear_only=False, project_means=True):
    """Time derivative of the primitive system, packed in an EMState.

    Quadratic products are dealiased with the 2/3 rule.  ``linear_only``
    drops every quadratic term (the linearized two-block Klein-Gordon
    system).  ``project_means`` zeroes the means of du/dt and dE/dt,
    restricting to the zero-mean sector (see module docstring).
    """
    g = state.grid
    uh = g.fft(state.u)
    nh = g.fft(state.n)
    eh = g.fft(state.E)
    bh = g.fft(state.B)
    cs2 = params.c_s**2

    gradn_h = grad_hat(g, nh)
    if linear_only:
        du_h = -eh - cs2 * gradn_h
        dn_h = -div_hat(g, uh)
        dE_h = curl_hat(g, bh) + uh
    else:
        gradn = g.ifft(gradn_h).real
        gradu = np.stack([g.ifft(grad_hat(g, uh[i])).real for i in range(3)])
        ugradu = np.einsum("j...,ij...->i...", state.u, gradu)
        rho = 1.0 + state.n
        quad_u = ugradu + cs2 * state.n * gradn + np.cross(state.u, state.B, axis=0)
        du_h = -eh - cs2 * gradn_h - g.dealias(g.fft(quad_u))
        nu_h = g.dealias(g.fft(state.n * state.u))
        dn_h = -div_hat(g, uh + nu_h)
        dE_h = curl_hat(g, bh) + uh + nu_h
        del rho
    dB_h = -curl_hat(g, eh)
    if project_means:
        du_h[:, 0, 0, 0] = 0.0
        dE_h[:, 0, 0, 0] = 0.0
    return EMState(g, g.ifft(du_h).real, g.ifft(dn_h).real,
                   g.ifft(dE_h).real, g.ifft(dB_h).real, state.time)


def nonlinear_diagonal(d, params, with_fields=False):
    """Quadratic terms of the diagonal system (Fourier coefficients).

    Returns (NA, NB); with ``with_fields`` also the reconstructed (u, n)
    real-space arrays used to form them.
    """
    g = d.grid
    km = g.kmag_safe
    cs2 = params.c_s**2
    uh, nh = _recover_un_hat(d, params)
    u = g.ifft(uh).real
    n = g.ifft(nh).real
    nu_h = g.dealias(g.fft(n * u))
    sq_h = g.dealias(g.fft(np.einsum("i...,i...->...", u, u) + cs2 * n * n))
    NA = -0.5 * g.bracket(params.c_s) * div_hat(g, nu_h) / km + 0.25j * g.kmag * sq_h
    NA[0, 0, 0] = 0.0
    NB = -curl_hat(g, nu_h) / km
    NB[:, 0, 0, 0] = 0.0
    if with_fields:
        return NA, NB, u, n
    return NA, NB


def rhs_diagonal(d, params, linear_only=False):
    """Full time derivative of (A, Bc), packed in a DiagState."""
    g = d.grid
    dA = 1j * g.bracket(params.c_s) * d.A
    dB = 1j * g.bracket(1.0) * d.Bc
    if not linear_only:
        NA, NB = nonlinear_diagonal(d, params)
        dA = dA + NA
        dB = dB + NB
    return DiagState(g, dA, dB, d.time)


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------

def random_state(grid, params, seed=0, amplitude=1e-3, band_fraction=0.25,
                 envelope_width=None):
    """Band-limited random data projected onto the constraint manifold.

    Fields are supported on lattice indices |j| <= band_fraction * n, have
    zero mean, satisfy the Gauss law and div B = 0 exactly, and carry
    B = curl u.  ``amplitude`` sets the largest sup-norm among the fields.

    ``envelope_width`` localizes the fields under a box-centered Gaussian of
    that width before the constraint projection (the periodic surrogate of
    spatially decaying data; dispersion-sensitive experiments need it, since
    a box-filling field has nowhere to spread).  The enveloped fields are
    re-truncated to the dealias band, so states stay product-safe.
    """
    rng = np.random.default_rng(seed)
    g = grid
    n = g.n
    jx = g.j1.reshape(n, 1, 1)
    jy = g.j1.reshape(1, n, 1)
    jz = g.j1.reshape(1, 1, n)
    band = (jx**2 + jy**2 + jz**2) <= (band_fraction * n) ** 2
    env = None
    if envelope_width is not None:
        env = np.exp(-0.5 * (g.radius_from_center() / envelope_width) ** 2)

    def band_scalar():
        f = g.fft(rng.standard_normal((n, n, n)))
        f *= band
        f[0, 0, 0] = 0.0
        if env is not None:
            f = g.dealias(g.fft(g.ifft(f).real * env))
            f[0, 0, 0] = 0.0
        return f

    uh = np.stack([band_scalar() for _ in range(3)])
    nh = band_scalar()
    bh = curl_hat(g, uh)
    pe = project_div_free_hat(g, np.stack([band_scalar() for _ in range(3)]))
    qe = np.stack([1j * g.kdx * nh, 1j * g.kdy * nh, 1j * g.kdz * nh]) / g.k2_safe
    qe[:, 0, 0, 0] = 0.0
    u = g.ifft(uh).real
    nn = g.ifft(nh).real
    E = g.ifft(pe + qe).real
    B = g.ifft(bh).real
    peak = max(np.abs(u).max(), np.abs(nn).max(), np.abs(E).max(), np.abs(B).max())
    s = amplitude / peak
    return EMState(g, s * u, s * nn, s * E, s * B, 0.0)


def single_mode_state(grid, params, j=(2, 0, 0), amplitude=1e-3, kind="acoustic"):
    """One-mode constraint-satisfying state for linear-frequency checks.

    kind "acoustic" excites (Qu, n, QE) on mode j; "electromagnetic" excites
    (Pu, B = curl u, PE) there.
    """
    g = grid
    n = g.n
    idx = tuple(np.asarray(j) % n)
    neg = tuple((-np.asarray(j)) % n)
    fh = np.zeros((n, n, n), complex)
    fh[idx] += g.volume / 2.0  # cos(k.x) via the Hermitian mode pair
    fh[neg] += g.volume / 2.0
    if kind == "acoustic":
        nh = fh.copy()
        qe = np.stack([1j * g.kdx * nh, 1j * g.kdy * nh, 1j * g.kdz * nh]) / g.k2_safe
        qe[:, 0, 0, 0] = 0.0
        state = EMState(g, np.zeros((3, n, n, n)), g.ifft(nh).real,
                        g.ifft(qe).real, np.zeros((3, n, n, n)), 0.0)
    elif kind == "electromagnetic":
        # velocity transverse to k: pick a direction orthogonal to j
        k = np.array([g.k1[idx[0]], g.k1[idx[1]], g.k1[idx[2]]])
        trial = np.array([0.0, 1.0, 0.0])
        if np.allclose(np.cross(k, trial), 0):
            trial = np.array([0.0, 0.0, 1.0])
        e = np.cross(k, trial)
        e /= np.linalg.norm(e)
        uh = np.stack([e[0] * fh, e[1] * fh, e[2] * fh])
        bh = curl_hat(g, uh)
        state = EMState(g, g.ifft(uh).real, np.zeros((n, n, n)),
                        np.zeros((3, n, n, n)), g.ifft(bh).real, 0.0)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    peak = max(np.abs(arr).max() for arr in state.fields().values())
    for arr in (state.u, state.n, state.E, state.B):
        arr *= amplitude / peak
    return state
