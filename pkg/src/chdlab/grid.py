"""Uniform rectangular grid and cosine-basis spectral calculus.

All fields live on the rectangle (0, lx) x (0, ly) sampled at midpoint
(type-II cosine collocation) nodes.  The basis functions

    w_{jk}(x, y) = cos(j pi x / lx) * cos(k pi y / ly)

are the Neumann eigenfunctions of the Laplacian with eigenvalues
lambda_{jk} = (j pi / lx)^2 + (k pi / ly)^2, so homogeneous Neumann
conditions are enforced structurally and differentiation is exact on
resolved modes.  Coefficients are stored in "amplitude" convention: a
`SpectralField` with coeffs[j, k] = c represents c * w_{jk}, and
coeffs[0, 0] is the mean of the field.

Derivatives of cosines are sines; vector-field components are handled
internally in the mixed sine/cosine basis on the same nodes (DST-II /
DCT-II pairs), so divergence(gradient(f)) == laplacian(f) exactly on
resolved modes and the normal velocity vanishes on the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft


class CompatibilityError(ValueError):
    """Input violates a solvability constraint (e.g. nonzero mean)."""


def _validate_values(values, grid):
    a = np.asarray(values, dtype=np.float64)
    if a.shape != (grid.nx, grid.ny):
        raise ValueError(f"values shape {a.shape} does not match grid ({grid.nx}, {grid.ny})")
    if not np.isfinite(a).all():
        raise ValueError("field values must be finite")
    a = np.ascontiguousarray(a).copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=True)
class GridSpec:
    """Uniform midpoint-node grid on the rectangle (0, lx) x (0, ly).

    nx, ny are the per-axis sample/mode counts (even, >= 4).  Spectral
    machinery (eigenvalues, transform scalings, dealias masks, Parseval
    weights) is precomputed once here and shared by every operator.
    """

    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        for name, n in (("nx", self.nx), ("ny", self.ny)):
            if not isinstance(n, (int, np.integer)) or n < 4 or n % 2 != 0:
                raise ValueError(f"{name} must be an even integer >= 4, got {n!r}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("lx and ly must be positive")
        nx, ny, lx, ly = self.nx, self.ny, float(self.lx), float(self.ly)

        kx = np.pi * np.arange(nx) / lx           # cosine-mode wavenumbers, j pi / lx
        ky = np.pi * np.arange(ny) / ly
        lam = kx[:, None] ** 2 + ky[None, :] ** 2
        lam_safe = lam.copy()
        lam_safe[0, 0] = 1.0

        # DCT-II amplitude scalings: unit-amplitude mode j>=1 transforms to n,
        # the constant mode to 2n.
        sx = np.full(nx, 1.0 / nx); sx[0] = 0.5 / nx
        sy = np.full(ny, 1.0 / ny); sy[0] = 0.5 / ny
        cos_scale = sx[:, None] * sy[None, :]

        # DST-II amplitude scalings: sine mode m at index m-1 transforms to n
        # for m <= n-1 and to 2n for the invisible-Nyquist companion m = n.
        tx = np.full(nx, 1.0 / nx); tx[nx - 1] = 0.5 / nx
        ty = np.full(ny, 1.0 / ny); ty[ny - 1] = 0.5 / ny

        kcut_x = (2 * nx) // 3
        kcut_y = (2 * ny) // 3
        cos_mask = (np.arange(nx)[:, None] <= kcut_x) & (np.arange(ny)[None, :] <= kcut_y)
        # mixed-basis masks: sine index m-1 carries wavenumber m
        sinx_mask = ((np.arange(nx) + 1)[:, None] <= kcut_x) & (np.arange(ny)[None, :] <= kcut_y)
        siny_mask = (np.arange(nx)[:, None] <= kcut_x) & ((np.arange(ny) + 1)[None, :] <= kcut_y)

        # Parseval weights: ||f||_L2^2 = sum_jk c_jk^2 * w_jk
        wx = np.full(nx, lx / 2); wx[0] = lx
        wy = np.full(ny, ly / 2); wy[0] = ly
        pars = wx[:, None] * wy[None, :]

        x = (np.arange(nx) + 0.5) * lx / nx
        y = (np.arange(ny) + 0.5) * ly / ny

        set_ = object.__setattr__
        set_(self, "area", lx * ly)
        set_(self, "dA", lx * ly / (nx * ny))
        set_(self, "x", x)
        set_(self, "y", y)
        set_(self, "kx", kx)
        set_(self, "ky", ky)
        set_(self, "lam", lam)
        set_(self, "_lam_safe", lam_safe)
        set_(self, "_cos_scale", cos_scale)
        set_(self, "_sinx_scale", tx[:, None] * sy[None, :])
        set_(self, "_siny_scale", sx[:, None] * ty[None, :])
        set_(self, "dealias_mask", cos_mask)
        set_(self, "_sinx_mask", sinx_mask)
        set_(self, "_siny_mask", siny_mask)
        set_(self, "_pars", pars)

    def meshgrid(self):
        """Node coordinate arrays (X, Y), shape (nx, ny)."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    # -- array-level transforms (internal; public ops wrap these) ----------

    def to_amps(self, values):
        """Nodal values -> cosine amplitude coefficients."""
        return sfft.dctn(values, type=2) * self._cos_scale

    def to_vals(self, amps):
        """Cosine amplitude coefficients -> nodal values."""
        return sfft.idctn(amps / self._cos_scale, type=2)

    def mixed_amps_x(self, values):
        """Nodal values -> amplitudes in the sine(x) x cos(y) basis."""
        a = sfft.dst(values, type=2, axis=0)
        a = sfft.dct(a, type=2, axis=1)
        return a * self._sinx_scale

    def mixed_vals_x(self, amps):
        a = sfft.idst(amps / self._sinx_scale, type=2, axis=0)
        return sfft.idct(a, type=2, axis=1)

    def mixed_amps_y(self, values):
        """Nodal values -> amplitudes in the cos(x) x sine(y) basis."""
        a = sfft.dct(values, type=2, axis=0)
        a = sfft.dst(a, type=2, axis=1)
        return a * self._siny_scale

    def mixed_vals_y(self, amps):
        a = sfft.idct(amps / self._siny_scale, type=2, axis=0)
        return sfft.idst(a, type=2, axis=1)

    def ddx_amps(self, amps):
        """d/dx in spectral space: cosine amps -> sine(x) x cos(y) amps."""
        out = np.zeros_like(amps)
        out[: self.nx - 1, :] = -self.kx[1:, None] * amps[1:, :]
        return out

    def ddy_amps(self, amps):
        out = np.zeros_like(amps)
        out[:, : self.ny - 1] = -self.ky[None, 1:] * amps[:, 1:]
        return out

    def div_amps(self, ax, ay):
        """Divergence from mixed amplitudes -> cosine amps (exact zero mean).

        d/dx sin(m pi x/lx) = (m pi/lx) cos(m pi x/lx); the Nyquist sine row
        differentiates into the node-invisible cosine and is dropped.
        """
        out = np.zeros_like(ax)
        out[1:, :] += self.kx[1:, None] * ax[: self.nx - 1, :]
        out[:, 1:] += self.ky[None, 1:] * ay[:, : self.ny - 1]
        return out

    def grad_vals(self, amps):
        """Gradient of a cosine-amplitude field, returned nodally."""
        gx = self.mixed_vals_x(self.ddx_amps(amps))
        gy = self.mixed_vals_y(self.ddy_amps(amps))
        return gx, gy

    def l2sq_amps(self, amps):
        """Parseval: squared L2 norm from cosine amplitudes."""
        return float(np.sum(amps * amps * self._pars))

    def quad(self, values):
        """Midpoint quadrature of nodal values over the rectangle."""
        return float(values.sum() * self.dA)


@dataclass(frozen=True, eq=False)
class Field:
    """Real scalar field sampled at the grid's midpoint nodes."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _validate_values(self.values, self.grid))

    @staticmethod
    def constant(grid, c):
        return Field(grid, np.full((grid.nx, grid.ny), float(c)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Cosine-basis amplitude coefficients of a Field.

    coeffs[j, k] multiplies cos(j pi x/lx) cos(k pi y/ly); coeffs[0, 0] is
    the mean.
    """

    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _validate_values(self.coeffs, self.grid))


@dataclass(frozen=True, eq=False)
class VectorField:
    """Pair of scalar fields (x- and y-components) on one grid."""

    x: Field
    y: Field

    def __post_init__(self):
        if self.x.grid != self.y.grid:
            raise ValueError("vector components must share one grid")

    @property
    def grid(self):
        return self.x.grid


# ---------------------------------------------------------------------------
# public operations


def to_spectral(f: Field) -> SpectralField:
    """Exact cosine-series coefficients of f (inverse of `to_nodal`)."""
    return SpectralField(f.grid, f.grid.to_amps(f.values))


def to_nodal(s: SpectralField) -> Field:
    """Evaluate a cosine series at the collocation nodes."""
    return Field(s.grid, s.grid.to_vals(s.coeffs))


def mean(f: Field) -> float:
    """Mean value over the rectangle, |Omega|^-1 * integral of f."""
    return float(f.values.mean())


def quadrature(f: Field) -> float:
    """Midpoint-rule integral of f over the rectangle."""
    return f.grid.quad(f.values)


def project_zero_mean(f: Field) -> Field:
    """Orthogonal projection onto zero-mean fields: f - mean(f)."""
    return Field(f.grid, f.values - f.values.mean())


def laplacian(f: Field) -> Field:
    g = f.grid
    return Field(g, g.to_vals(-g.lam * g.to_amps(f.values)))


def gradient(f: Field) -> VectorField:
    g = f.grid
    gx, gy = g.grad_vals(g.to_amps(f.values))
    return VectorField(Field(g, gx), Field(g, gy))


def divergence(v: VectorField) -> Field:
    g = v.grid
    amps = g.div_amps(g.mixed_amps_x(v.x.values), g.mixed_amps_y(v.y.values))
    return Field(g, g.to_vals(amps))


def neg_laplacian_inverse(f: Field, mean_tol: float = 1e-12) -> Field:
    """Solve -lap(u) = f with Neumann conditions and zero mean.

    Requires mean(f) ~ 0 (relative to 1 + ||f||), the solvability condition
    for the Neumann problem; incompatible input raises CompatibilityError.
    """
    g = f.grid
    amps = g.to_amps(f.values)
    scale = 1.0 + np.sqrt(g.l2sq_amps(amps))
    if abs(amps[0, 0]) > mean_tol * scale:
        raise CompatibilityError(
            f"neg_laplacian_inverse requires zero-mean input; |mean| = {abs(amps[0, 0]):.3e}"
        )
    out = amps / g._lam_safe
    out[0, 0] = 0.0
    return Field(g, g.to_vals(out))


def sobolev_norm(f: Field, s: float) -> float:
    """Equivalent H^s norm, s in [-2, 4].

    ||f||^2 = |mean|^2 |Omega| + sum_{(j,k) != 0} (1 + lambda_jk)^s c_jk^2 w_jk,
    which reduces to the plain L2 norm at s = 0 and to the dual-space
    convention (weights (1 + lambda)^s on the zero-mean part) for s < 0.
    """
    if not -2.0 <= s <= 4.0:
        raise ValueError(f"s must lie in [-2, 4], got {s}")
    g = f.grid
    amps = g.to_amps(f.values)
    w = (1.0 + g.lam) ** s * g._pars
    w[0, 0] = g._pars[0, 0]     # mean term carries no (1+lambda)^s weight
    return float(np.sqrt(np.sum(amps * amps * w)))


def hminus1_seminorm(f: Field) -> float:
    """Homogeneous dual seminorm ||A^{-1/2}(f - mean f)||, A = -lap."""
    g = f.grid
    amps = g.to_amps(f.values)
    w = g._pars / g._lam_safe
    w[0, 0] = 0.0
    return float(np.sqrt(np.sum(amps * amps * w)))


def l2_norm(f: Field) -> float:
    return float(np.sqrt(f.grid.l2sq_amps(f.grid.to_amps(f.values))))


def dealias(s: SpectralField) -> SpectralField:
    """2/3-rule truncation: zero modes with j > 2nx/3 or k > 2ny/3."""
    return SpectralField(s.grid, np.where(s.grid.dealias_mask, s.coeffs, 0.0))


def dealias_field(f: Field) -> Field:
    g = f.grid
    return Field(g, g.to_vals(g.to_amps(f.values) * g.dealias_mask))
