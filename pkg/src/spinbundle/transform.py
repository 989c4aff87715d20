"""Band-limited spin spherical harmonic transforms on a Gauss-Legendre grid."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BandLimitExceeded, InvalidArgument
from .harmonics import check_ell, spin_lambda_rows, spin_ylm_all, real_ylm_all


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre nodes in cos(theta) times equispaced longitudes.

    ``theta_weights`` are the Gauss-Legendre weights for the cos(theta)
    integral; with the longitude spacing 2 pi / n_phi they integrate over the
    sphere with total measure 4 pi.
    """

    n_theta: int
    n_phi: int
    theta_nodes: np.ndarray
    theta_weights: np.ndarray
    lmax_exact: int

    @property
    def phi_nodes(self):
        return 2 * np.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def shape(self):
        return (self.n_theta, self.n_phi)

    @property
    def pixel_weights(self):
        """Quadrature weight of every node, shape (n_theta, n_phi)."""
        return np.repeat(self.theta_weights[:, None] * (2 * np.pi / self.n_phi), self.n_phi, axis=1)

    def points(self):
        """Flattened (theta, phi) of every node, row-major."""
        th, ph = np.meshgrid(self.theta_nodes, self.phi_nodes, indexing="ij")
        return th.ravel(), ph.ravel()


def make_grid(lmax, n_phi=None):
    lmax = check_ell(lmax, "lmax")
    x, w = np.polynomial.legendre.leggauss(lmax + 1)
    # leggauss sorts cos(theta) ascending; store theta ascending
    theta = np.arccos(x[::-1])
    w = w[::-1].copy()
    if n_phi is None:
        n_phi = 2 * lmax + 1
    if n_phi < 2 * lmax + 1:
        raise InvalidArgument(f"n_phi={n_phi} is below 2*lmax+1={2 * lmax + 1}")
    theta.setflags(write=False)
    w.setflags(write=False)
    return SphereGrid(lmax + 1, int(n_phi), theta, w, lmax)


@dataclass
class HarmonicCoefficients:
    """Coefficients a_lm of one spin weight; ``a[ell, m + lmax]``."""

    spin: int
    lmax: int
    a: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=complex)
        if self.a.shape != (self.lmax + 1, 2 * self.lmax + 1):
            raise InvalidArgument(
                f"coefficient array has shape {self.a.shape}, expected "
                f"{(self.lmax + 1, 2 * self.lmax + 1)}")
        if np.any(self.a[~self.mask()] != 0):
            raise InvalidArgument(f"non-zero entries outside ell >= |s|={abs(self.spin)}, |m| <= ell")

    @classmethod
    def zeros(cls, spin, lmax):
        return cls(spin, lmax, np.zeros((lmax + 1, 2 * lmax + 1), dtype=complex))

    def mask(self):
        ells = np.arange(self.lmax + 1)[:, None]
        ms = np.arange(-self.lmax, self.lmax + 1)[None, :]
        return (np.abs(ms) <= ells) & (ells >= abs(self.spin))

    def __getitem__(self, lm):
        ell, m = lm
        if not (0 <= ell <= self.lmax and abs(m) <= ell):
            raise InvalidArgument(f"(ell, m) = {lm} outside the coefficient range")
        return self.a[ell, m + self.lmax]

    def __setitem__(self, lm, value):
        ell, m = lm
        if not (abs(self.spin) <= ell <= self.lmax and abs(m) <= ell):
            raise InvalidArgument(f"(ell, m) = {lm} outside the coefficient range")
        self.a[ell, m + self.lmax] = value

    def copy(self):
        return HarmonicCoefficients(self.spin, self.lmax, self.a.copy())

    def truncate(self, lmax):
        """Copy restricted (or zero-padded) to a new band limit."""
        out = HarmonicCoefficients.zeros(self.spin, lmax)
        lo = min(lmax, self.lmax)
        out.a[: lo + 1, lmax - lo: lmax + lo + 1] = self.a[: lo + 1, self.lmax - lo: self.lmax + lo + 1]
        return out

    def items(self):
        """Yield (ell, m, value) over the valid entries in (ell, m) order."""
        for ell in range(abs(self.spin), self.lmax + 1):
            for m in range(-ell, ell + 1):
                yield ell, m, self.a[ell, m + self.lmax]

    def satisfies_reality(self):
        """True if a_{l,-m} == (-1)**m conj(a_lm) holds bit for bit."""
        mvals = np.arange(-self.lmax, self.lmax + 1)
        sign = np.where(mvals % 2 == 0, 1.0, -1.0)
        mirrored = sign * np.conj(self.a[:, ::-1])
        return bool(np.array_equal(self.a, mirrored))


@dataclass
class SphereMap:
    grid: SphereGrid
    spin: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise InvalidArgument(f"map values have shape {self.values.shape}, grid is {self.grid.shape}")


def _check_band(lmax, grid):
    if lmax > grid.lmax_exact:
        raise BandLimitExceeded(f"lmax={lmax} exceeds the grid's exact band limit {grid.lmax_exact}")


def _phi_synthesis(G, grid, lmax, method):
    """values[j, k] = sum_m G[m + lmax, j] exp(i m phi_k)."""
    mvals = np.arange(-lmax, lmax + 1)
    if method == "direct":
        e = np.exp(1j * np.outer(mvals, grid.phi_nodes))
        return G.T @ e
    if method == "fft":
        spec = np.zeros((grid.n_theta, grid.n_phi), dtype=complex)
        np.add.at(spec, (slice(None), mvals % grid.n_phi), G.T)
        return np.fft.ifft(spec, axis=1) * grid.n_phi
    raise InvalidArgument(f"unknown method {method!r}")


def _phi_analysis(values, grid, lmax, method):
    """F[m + lmax, j] = (2 pi / n_phi) sum_k values[j, k] exp(-i m phi_k)."""
    mvals = np.arange(-lmax, lmax + 1)
    dphi = 2 * np.pi / grid.n_phi
    if method == "direct":
        e = np.exp(-1j * np.outer(grid.phi_nodes, mvals))
        return (values @ e).T * dphi
    if method == "fft":
        spec = np.fft.fft(values, axis=1)
        return spec[:, mvals % grid.n_phi].T * dphi
    raise InvalidArgument(f"unknown method {method!r}")


def synthesize(coeffs, grid, method="fft"):
    """Map sum_lm a_lm sY_lm on the grid nodes."""
    _check_band(coeffs.lmax, grid)
    lmax = coeffs.lmax
    G = np.zeros((2 * lmax + 1, grid.n_theta), dtype=complex)
    for ell, lam in spin_lambda_rows(coeffs.spin, lmax, grid.theta_nodes):
        if ell >= abs(coeffs.spin):
            G += coeffs.a[ell][:, None] * lam
    return SphereMap(grid, coeffs.spin, _phi_synthesis(G, grid, lmax, method))


def analyze(smap, lmax=None, method="fft", real=None):
    """Quadrature estimate a_lm = sum_nodes w X conj(sY_lm); exact when band-limited.

    For spin-0 maps whose imaginary part is identically zero (``real=None``
    detects this), only m >= 0 is computed and m < 0 is filled by the
    reality mirror, so the output satisfies it bit for bit.
    """
    grid = smap.grid
    lmax = grid.lmax_exact if lmax is None else check_ell(lmax, "lmax")
    _check_band(lmax, grid)
    values = np.asarray(smap.values)
    if real is None:
        real = smap.spin == 0 and not np.any(np.imag(values))
    elif real and smap.spin != 0:
        raise InvalidArgument("the reality mirror only applies to spin-0 maps")
    F = _phi_analysis(values.astype(complex), grid, lmax, method) * grid.theta_weights[None, :]
    out = HarmonicCoefficients.zeros(smap.spin, lmax)
    for ell, lam in spin_lambda_rows(smap.spin, lmax, grid.theta_nodes):
        if ell >= abs(smap.spin):
            out.a[ell] = np.sum(F * lam, axis=1)
            out.a[ell, : lmax - ell] = 0
            out.a[ell, lmax + ell + 1:] = 0
    if real:
        _mirror_reality(out)
    return out


def _mirror_reality(coeffs):
    lmax = coeffs.lmax
    a = coeffs.a
    a[:, lmax] = a[:, lmax].real
    for m in range(1, lmax + 1):
        sign = -1.0 if m % 2 else 1.0
        a[:, lmax - m] = sign * np.conj(a[:, lmax + m])


def synthesize_points(coeffs, theta, phi):
    """Direct evaluation of sum_lm a_lm sY_lm at arbitrary points."""
    Y = spin_ylm_all(coeffs.spin, coeffs.lmax, theta, phi)
    return np.einsum("lm,lmp->p", coeffs.a, Y)


def inner_product(map_a, map_b):
    """Quadrature inner product sum w f conj(g)."""
    if map_a.grid is not map_b.grid and map_a.grid.shape != map_b.grid.shape:
        raise InvalidArgument("maps live on different grids")
    return np.sum(map_a.grid.pixel_weights * map_a.values * np.conj(map_b.values))


def synthesize_real_field(coeffs, grid, method="fft", atol=1e-12):
    """Real spin-0 field; refuses coefficients that break the reality mirror."""
    if coeffs.spin != 0:
        raise InvalidArgument("real synthesis needs spin-0 coefficients")
    mvals = np.arange(-coeffs.lmax, coeffs.lmax + 1)
    sign = np.where(mvals % 2 == 0, 1.0, -1.0)
    mirrored = sign * np.conj(coeffs.a[:, ::-1])
    scale = max(1.0, float(np.max(np.abs(coeffs.a), initial=0.0)))
    if not np.allclose(coeffs.a, mirrored, rtol=0, atol=atol * scale):
        raise InvalidArgument("coefficients violate a_{l,-m} = (-1)^m conj(a_lm)")
    return synthesize(coeffs, grid, method).values.real


def real_coefficients(coeffs):
    """Coefficients of the real harmonics S^m_l, same layout as ``coeffs.a``."""
    lmax = coeffs.lmax
    a = coeffs.a
    out = np.zeros(a.shape)
    out[:, lmax] = a[:, lmax].real
    out[:, lmax + 1:] = math.sqrt(2) * a[:, lmax + 1:].real
    out[:, :lmax] = math.sqrt(2) * a[:, :lmax].imag
    return out


def synthesize_real_harmonics(atilde, grid):
    """sum_lm atilde_lm S^m_l on the grid, evaluated pointwise."""
    lmax = atilde.shape[0] - 1
    _check_band(lmax, grid)
    th, ph = grid.points()
    S = real_ylm_all(lmax, th, ph)
    return np.einsum("lm,lmp->p", atilde, S).reshape(grid.shape)
