"""Periodic-grid Fourier engine: grids, spectral fields, multipliers, projections.

Conventions (pinned once, used everywhere):

* The domain is the periodic cube [0, L)^3 sampled on an even n^3 lattice,
  wavenumbers k_j = 2*pi*j/L with j in {-n/2, ..., n/2 - 1} per axis.
* Forward transform carries the quadrature weight (L/n)^3, the inverse
  carries n^3/L^3, so that Parseval holds exactly:
      sum_x |f|^2 (L/n)^3 == sum_k |fhat|^2 / L^3.
* Quadratic products are dealiased by a 2/3-rule box truncation
  (|j| <= (n-1)//3 per axis) applied to both factors and the product;
  Nyquist modes are zeroed whenever a mask is applied.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConstraintViolation


def _as_c128(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


class Grid3:
    """Periodic cubic grid with cached wavenumber geometry.

    Parameters
    ----------
    box_length : side L of the periodic cube.
    points_per_axis : even integer n >= 8.
    """

    def __init__(self, box_length, points_per_axis):
        n = int(points_per_axis)
        if n < 8 or n % 2 != 0:
            raise ValueError(f"points_per_axis must be even and >= 8, got {n}")
        if not box_length > 0:
            raise ValueError(f"box_length must be positive, got {box_length}")
        self.box_length = float(box_length)
        self.n = n

        k1 = 2.0 * np.pi * np.fft.fftfreq(n, d=self.box_length / n)
        j1 = np.rint(np.fft.fftfreq(n) * n).astype(int)
        # broadcastable axes keep memory small; full arrays cached below
        self.kx = k1.reshape(n, 1, 1)
        self.ky = k1.reshape(1, n, 1)
        self.kz = k1.reshape(1, 1, n)
        self.k1 = k1
        self.j1 = j1
        # derivative wavenumbers: the Nyquist index has no negation partner,
        # so odd (ik) symbols zero it to stay closed under Hermitian symmetry
        kd = k1.copy()
        kd[n // 2] = 0.0
        self.kdx = kd.reshape(n, 1, 1)
        self.kdy = kd.reshape(1, n, 1)
        self.kdz = kd.reshape(1, 1, n)
        self.k2 = (self.kx**2 + self.ky**2 + self.kz**2)
        self.kmag = np.sqrt(self.k2)
        self.kmag_safe = self.kmag.copy()
        self.kmag_safe[0, 0, 0] = 1.0
        self.k2_safe = self.k2.copy()
        self.k2_safe[0, 0, 0] = 1.0

        jx = j1.reshape(n, 1, 1)
        jy = j1.reshape(1, n, 1)
        jz = j1.reshape(1, 1, n)
        kcut = (n - 1) // 3
        self.dealias_cutoff = kcut
        self.dealias_mask = ((np.abs(jx) <= kcut) & (np.abs(jy) <= kcut)
                             & (np.abs(jz) <= kcut))
        self.nyquist_mask = (jx == -n // 2) | (jy == -n // 2) | (jz == -n // 2)
        self._brackets = {}

    @property
    def cell_volume(self):
        return (self.box_length / self.n) ** 3

    @property
    def volume(self):
        return self.box_length**3

    def bracket(self, alpha):
        """sqrt(1 + alpha^2 |k|^2) on the lattice, cached per alpha."""
        key = float(alpha)
        tab = self._brackets.get(key)
        if tab is None:
            tab = np.sqrt(1.0 + key * key * self.k2)
            self._brackets[key] = tab
        return tab

    def axes(self):
        """Real-space sample coordinates along one axis."""
        return np.arange(self.n) * (self.box_length / self.n)

    def radius_from_center(self):
        x = self.axes() - self.box_length / 2.0
        return np.sqrt(x.reshape(-1, 1, 1) ** 2 + x.reshape(1, -1, 1) ** 2
                       + x.reshape(1, 1, -1) ** 2)

    def fft(self, values):
        """Forward transform with the (L/n)^3 weight; last three axes."""
        return np.fft.fftn(values, axes=(-3, -2, -1)) * self.cell_volume

    def ifft(self, coeffs):
        """Inverse transform, 1/L^3 times the plain spectral sum."""
        return np.fft.ifftn(coeffs, axes=(-3, -2, -1)) * (self.n / self.box_length) ** 3

    def dealias(self, coeffs):
        return coeffs * self.dealias_mask

    def __eq__(self, other):
        return (isinstance(other, Grid3) and other.n == self.n
                and other.box_length == self.box_length)

    def __hash__(self):
        return hash((self.box_length, self.n))

    def __repr__(self):
        return f"Grid3(L={self.box_length}, n={self.n})"


def reflect_conj(coeffs):
    """conj(F(-k)) on the fft-ordered lattice (Hermitian reflection)."""
    out = np.conj(coeffs[..., ::-1, ::-1, ::-1])
    return np.roll(out, 1, axis=(-3, -2, -1))


def real_part_hat(coeffs):
    """Fourier coefficients of Re(f) for the physical-space real part."""
    return 0.5 * (coeffs + reflect_conj(coeffs))


def imag_part_hat(coeffs):
    """Fourier coefficients of Im(f), the physical-space imaginary part."""
    return (coeffs - reflect_conj(coeffs)) / 2j


@dataclass(frozen=True)
class SpectralField:
    """Scalar or vector field on a Grid3, held as Fourier coefficients.

    ``coeffs`` has shape (n,n,n) for scalars or (3,n,n,n) for vectors.
    ``real_valued`` records whether the real-space field is real; it is a
    bookkeeping flag maintained by the operations, checkable via
    :meth:`hermitian_error`.
    """

    grid: Grid3
    coeffs: np.ndarray
    real_valued: bool = True

    def __post_init__(self):
        c = _as_c128(self.coeffs)
        n = self.grid.n
        if c.shape not in ((n, n, n), (3, n, n, n)):
            raise ValueError(f"bad coefficient shape {c.shape} for n={n}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_values(cls, grid, values):
        values = np.asarray(values)
        real = not np.iscomplexobj(values)
        return cls(grid, grid.fft(values), real_valued=real)

    @classmethod
    def from_coeffs(cls, grid, coeffs, real_valued=None):
        if real_valued is None:
            f = cls(grid, coeffs, real_valued=False)
            real_valued = f.hermitian_error() < 1e-12
            return replace(f, real_valued=real_valued)
        return cls(grid, coeffs, real_valued=real_valued)

    @property
    def components(self):
        return 1 if self.coeffs.ndim == 3 else 3

    def values(self):
        v = self.grid.ifft(self.coeffs)
        return v.real if self.real_valued else v

    def hermitian_error(self):
        """Relative deviation from conj(F(-k)) == F(k)."""
        scale = np.abs(self.coeffs).max()
        if scale == 0.0:
            return 0.0
        return np.abs(self.coeffs - reflect_conj(self.coeffs)).max() / scale

    def mean_value(self):
        return self.coeffs[..., 0, 0, 0] / self.grid.volume

    def __add__(self, other):
        self._check_compatible(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs,
                             self.real_valued and other.real_valued)

    def __sub__(self, other):
        self._check_compatible(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs,
                             self.real_valued and other.real_valued)

    def __mul__(self, scalar):
        s = complex(scalar)
        real = self.real_valued and s.imag == 0.0
        return SpectralField(self.grid, self.coeffs * scalar, real)

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if self.grid != other.grid or self.components != other.components:
            raise ValueError("incompatible fields")


# ---------------------------------------------------------------------------
# Fourier multipliers
# ---------------------------------------------------------------------------

_SINGULAR_KINDS = {"modulus_inverse", "riesz", "bracket_over_modulus", "riesz_curl"}
_SCALAR_KINDS = {"bracket", "modulus", "modulus_inverse", "bracket_over_modulus", "custom"}


@dataclass(frozen=True)
class MultiplierSymbol:
    """A radial (or custom) Fourier multiplier symbol.

    kind:
        "bracket"               sqrt(1 + alpha^2 |k|^2)
        "modulus"               |k|
        "modulus_inverse"       1/|k|
        "bracket_over_modulus"  sqrt(1 + alpha^2 |k|^2)/|k|   (alpha=1: the operator
                                mapping n to the quantity paired with it in the
                                dispersive variables)
        "riesz"                 i k/|k|; scalar -> vector, vector -> contraction
        "riesz_curl"            i k/|k| x ; vector -> vector
        "custom"                table(kx, ky, kz) -> array
    zero_mode_policy: "annihilate" | "identity" | "error" for the k = 0 point.
    """

    kind: str
    alpha: float = 1.0
    zero_mode_policy: str = "annihilate"
    table: object = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in _SCALAR_KINDS | {"riesz", "riesz_curl"}:
            raise ValueError(f"unknown multiplier kind {self.kind!r}")
        if self.zero_mode_policy not in ("annihilate", "identity", "error"):
            raise ValueError(f"unknown zero_mode_policy {self.zero_mode_policy!r}")
        if self.kind in _SINGULAR_KINDS and self.zero_mode_policy == "identity":
            raise ValueError(
                f"{self.kind} is singular at k=0 and cannot use the identity policy")
        if self.kind == "custom" and self.table is None:
            raise ValueError("custom multiplier needs a table callable")

    def scalar_table(self, grid):
        """Evaluate the scalar symbol on the lattice (k=0 entry per policy)."""
        if self.kind == "bracket":
            tab = grid.bracket(self.alpha).copy()
        elif self.kind == "modulus":
            tab = grid.kmag.copy()
        elif self.kind == "modulus_inverse":
            tab = 1.0 / grid.kmag_safe
        elif self.kind == "bracket_over_modulus":
            tab = grid.bracket(self.alpha) / grid.kmag_safe
        elif self.kind == "custom":
            tab = np.asarray(self.table(grid.kx, grid.ky, grid.kz), dtype=np.complex128)
            tab = np.broadcast_to(tab, (grid.n,) * 3).copy()
        else:
            raise ValueError(f"{self.kind} has no scalar table")
        if self.zero_mode_policy == "annihilate":
            tab[0, 0, 0] = 0.0
        elif self.zero_mode_policy == "identity":
            tab[0, 0, 0] = 1.0
        else:
            tab[0, 0, 0] = 0.0  # applied only after the zero-mode check
        return tab

    def preserves_reality(self, grid):
        """True when the symbol maps real fields to real fields."""
        if self.kind != "custom":
            return True  # real even (scalars) or imaginary odd (riesz kinds)
        tab = self.scalar_table(grid)
        scale = np.abs(tab).max()
        if scale == 0.0:
            return True
        return np.abs(tab - reflect_conj(tab)).max() / scale < 1e-12


def apply_multiplier(f, symbol, name=""):
    """Apply a MultiplierSymbol to a SpectralField.

    Scalar-symbol kinds act componentwise.  "riesz" maps scalars to the
    3-vector (i k_j/|k|) f and vectors to the contraction sum_j (i k_j/|k|) v_j;
    "riesz_curl" maps vectors to (i k/|k|) x v.
    """
    grid = f.grid
    label = name or symbol.name or "field"
    if symbol.zero_mode_policy == "error":
        mean = np.atleast_1d(f.coeffs[..., 0, 0, 0])
        scale = max(np.abs(f.coeffs).max(), 1e-300)
        if np.abs(mean).max() > 1e-13 * scale:
            raise ConstraintViolation(
                f"multiplier {symbol.kind!r} is singular at k=0 but field "
                f"{label!r} has a nonzero mean", {"mean": float(np.abs(mean).max())})

    if symbol.kind in _SCALAR_KINDS:
        tab = symbol.scalar_table(grid)
        out = tab * f.coeffs
        real = f.real_valued and symbol.preserves_reality(grid)
        return SpectralField(grid, out, real)

    ik = (1j * grid.kdx / grid.kmag_safe, 1j * grid.kdy / grid.kmag_safe,
          1j * grid.kdz / grid.kmag_safe)
    if symbol.kind == "riesz":
        if f.components == 1:
            out = np.stack([ik[0] * f.coeffs, ik[1] * f.coeffs, ik[2] * f.coeffs])
        else:
            out = ik[0] * f.coeffs[0] + ik[1] * f.coeffs[1] + ik[2] * f.coeffs[2]
    else:  # riesz_curl
        if f.components != 3:
            raise ValueError("riesz_curl needs a vector field")
        v = f.coeffs
        out = np.stack([ik[1] * v[2] - ik[2] * v[1],
                        ik[2] * v[0] - ik[0] * v[2],
                        ik[0] * v[1] - ik[1] * v[0]])
    out[..., 0, 0, 0] = 0.0
    return SpectralField(grid, out, f.real_valued)


# ---------------------------------------------------------------------------
# Derivatives and Helmholtz projections (coefficient-level helpers)
# ---------------------------------------------------------------------------

def grad_hat(grid, fhat):
    """Gradient of a scalar: (n,n,n) -> (3,n,n,n)."""
    return np.stack([1j * grid.kdx * fhat, 1j * grid.kdy * fhat,
                     1j * grid.kdz * fhat])


def div_hat(grid, vhat):
    return 1j * (grid.kdx * vhat[0] + grid.kdy * vhat[1] + grid.kdz * vhat[2])


def curl_hat(grid, vhat):
    return np.stack([
        1j * (grid.kdy * vhat[2] - grid.kdz * vhat[1]),
        1j * (grid.kdz * vhat[0] - grid.kdx * vhat[2]),
        1j * (grid.kdx * vhat[1] - grid.kdy * vhat[0]),
    ])


def project_div_free_hat(grid, vhat):
    """Leray projector P = Id - k k^T/|k|^2; annihilates the mean."""
    d = (grid.kdx * vhat[0] + grid.kdy * vhat[1] + grid.kdz * vhat[2]) / grid.k2_safe
    out = np.stack([vhat[0] - grid.kdx * d, vhat[1] - grid.kdy * d,
                    vhat[2] - grid.kdz * d])
    out[:, 0, 0, 0] = 0.0
    return out


def project_curl_free_hat(grid, vhat):
    """Q = k k^T/|k|^2; annihilates the mean."""
    d = (grid.kdx * vhat[0] + grid.kdy * vhat[1] + grid.kdz * vhat[2]) / grid.k2_safe
    out = np.stack([grid.kdx * d, grid.kdy * d, grid.kdz * d])
    out[:, 0, 0, 0] = 0.0
    return out


def helmholtz_P(v):
    """Divergence-free part of a vector SpectralField."""
    if v.components != 3:
        raise ValueError("helmholtz_P needs a vector field")
    return SpectralField(v.grid, project_div_free_hat(v.grid, v.coeffs), v.real_valued)


def helmholtz_Q(v):
    """Curl-free part of a vector SpectralField."""
    if v.components != 3:
        raise ValueError("helmholtz_Q needs a vector field")
    return SpectralField(v.grid, project_curl_free_hat(v.grid, v.coeffs), v.real_valued)
