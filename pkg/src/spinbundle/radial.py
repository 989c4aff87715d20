"""Radial structure of fields on the ball of radius R.

Covers the line-of-sight lensing integral, the Fourier-Bessel (Hankel)
transform, covariance-reproducing (Parseval) frames and sampling of
separable ball fields sum_lmj f_lj(r) X_lmj sY_lm(n).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq
from scipy.special import gammaln

from . import rng
from .errors import CovarianceInvalid, InvalidArgument, RankDeficient
from .transform import HarmonicCoefficients, synthesize

# ---------------------------------------------------------------------------
# spherical Bessel functions
# ---------------------------------------------------------------------------


def _j01(x):
    s, c = np.sin(x), np.cos(x)
    return s / x, s / x**2 - c / x


def spherical_jn(ell, x):
    """j_ell(x) for x >= 0.

    Upward recursion where x > ell (stable there), Miller's downward
    recursion normalised against j_0 and j_1 elsewhere.
    """
    if ell < 0 or int(ell) != ell:
        raise InvalidArgument(f"ell must be a non-negative integer, got {ell}")
    ell = int(ell)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidArgument("spherical_jn needs x >= 0")
    out = np.zeros(x.shape)
    flat_x = x.ravel()
    flat = out.ravel()
    zero = flat_x == 0
    flat[zero] = 1.0 if ell == 0 else 0.0
    up = (~zero) & (flat_x > ell)
    down = (~zero) & ~up
    if np.any(up):
        flat[up] = _upward(ell, flat_x[up])
    if np.any(down):
        flat[down] = _miller(ell, flat_x[down])
    return out.reshape(x.shape)[()] if out.ndim == 0 else out


def _upward(ell, x):
    j0, j1 = _j01(x)
    if ell == 0:
        return j0
    prev, cur = j0, j1
    for n in range(1, ell):
        prev, cur = cur, (2 * n + 1) / x * cur - prev
    return cur


def _miller(ell, x):
    start = ell + 20 + int(math.sqrt(40 * (ell + 1)))
    nxt = np.zeros_like(x)
    cur = np.full_like(x, 1e-30)
    target = None
    # number of 1e-250 rescalings applied after j_ell was captured
    shifts = np.zeros(x.shape)
    u1 = None
    for n in range(start, 0, -1):
        nxt, cur = cur, (2 * n + 1) / x * cur - nxt
        # cur holds the unnormalised j_{n-1}
        big = np.abs(cur) > 1e250
        if np.any(big):
            cur = np.where(big, cur * 1e-250, cur)
            nxt = np.where(big, nxt * 1e-250, nxt)
            if target is not None:
                shifts += big
            if u1 is not None:
                u1 = np.where(big, u1 * 1e-250, u1)
        if n - 1 == ell:
            target = cur.copy()
        if n - 1 == 1:
            u1 = cur.copy()
    u0 = cur
    s, c = np.sin(x), np.cos(x)
    j0 = s / x
    # j_1 by its closed form cancels badly for small x; only use it near zeros of j_0
    use_j1 = (np.abs(j0) < 0.25) & (x > 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = np.where(use_j1, (s / x**2 - c / x) / u1, j0 / u0)
        mag = np.log(np.abs(target)) + np.log(np.abs(norm)) - shifts * 250 * math.log(10)
    return np.sign(target) * np.sign(norm) * np.exp(mag)


def spherical_jn_zeros(ell, count):
    """First ``count`` positive zeros of j_ell."""
    zeros = []
    step = 0.25
    # j_ell has no zeros below ell + 1/2 for ell >= 1, and none below pi for ell = 0
    a = max(float(ell), 1.0)
    fa = spherical_jn(ell, a)
    while len(zeros) < count:
        b = a + step
        fb = spherical_jn(ell, b)
        if fa == 0.0:
            zeros.append(a)
        elif fa * fb < 0:
            zeros.append(brentq(lambda t: spherical_jn(ell, t), a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        a, fa = b, fb
    return np.array(zeros[:count])


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialGrid:
    """Nodes in (0, R] with weights for integrals of f(r) r^2 dr over [0, R]."""

    R: float
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.R <= 0:
            raise InvalidArgument("R must be positive")
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise InvalidArgument("nodes and weights must be 1-d arrays of equal length")
        if np.any(weights <= 0):
            raise InvalidArgument("radial weights must be positive")
        if np.any(nodes <= 0) or np.any(nodes > self.R) or np.any(np.diff(nodes) <= 0):
            raise InvalidArgument("radial nodes must increase strictly inside (0, R]")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self):
        return self.nodes.size

    def integrate(self, values):
        """sum_i w_i values[i], along the first axis."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))

    def bessel_error_bound(self, k, amplitude=1.0):
        """Error bound (truncation plus rounding) of the Gauss-Legendre estimate
        of sqrt(2/pi) int_0^R j_l(kr) a r^2 dr for a constant |a| <= amplitude.

        Uses |d^q j_l(kr)/dr^q| <= k^q and the standard n-point remainder
        R^(2n+1) (n!)^4 / ((2n+1) ((2n)!)^3) max|f^(2n)|.
        """
        n = self.size
        k = np.abs(np.asarray(k, dtype=float))
        with np.errstate(divide="ignore"):
            logk = np.log(k)
        log_pref = ((2 * n + 1) * math.log(self.R) + 4 * gammaln(n + 1)
                    - math.log(2 * n + 1) - 3 * gammaln(2 * n + 1))
        # Leibniz on r^2 * j_l(kr): terms with 0, 1, 2 derivatives on r^2
        terms = [
            2 * math.log(self.R) + 2 * n * logk,
            math.log(4 * n * self.R) + (2 * n - 1) * logk,
            math.log(2 * n * (2 * n - 1)) + (2 * n - 2) * logk,
        ]
        log_max = np.logaddexp.reduce(np.stack(terms), axis=0)
        truncation = math.sqrt(2 / math.pi) * amplitude * np.exp(log_pref + log_max)
        # floating-point summation of n terms of size <= w_i * amplitude
        rounding = 4 * n * np.finfo(float).eps * math.sqrt(2 / math.pi) * amplitude * float(np.sum(self.weights))
        return truncation + rounding


def make_radial_grid(R, n):
    """n-point Gauss-Legendre rule on [0, R] against r^2 dr."""
    if n < 1:
        raise InvalidArgument("need at least one radial node")
    x, w = np.polynomial.legendre.leggauss(n)
    r = R * (x + 1) / 2
    return RadialGrid(float(R), r, w * R / 2 * r**2)


@dataclass(frozen=True)
class KGrid:
    """Wavenumber nodes and weights for int_0^inf g(k) k^2 dk."""

    ell: int
    R: float
    nodes: np.ndarray
    weights: np.ndarray


def bessel_zero_kgrid(ell, R, count):
    """k_q = z_q / R at the zeros of j_ell, weights pi / (R^3 k_q^2 j_{ell+1}(z_q)^2).

    With these weights the inverse transform is the Fourier-Bessel series
    of a function on [0, R] vanishing at R.
    """
    z = spherical_jn_zeros(ell, count)
    k = z / R
    w = math.pi / (R**3 * k**2 * spherical_jn(ell + 1, z) ** 2)
    return KGrid(ell, float(R), k, w)


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------


def lensing_potential(Phi, nodes, c=1.0):
    """phi(r) = (2 / c^2) int_0^r Phi(r') (r - r') / (r r') dr'.

    ``Phi`` has the radial index first, other axes (e.g. ell, m) trailing.
    The integrand Phi(r')/r' * (1 - r'/r) is integrated by the trapezoid
    rule over [0, r_1, ..., r_i]; Phi(r')/r' at r' = 0 is extrapolated
    linearly from the first two nodes. A node at r = 0 gives phi = 0.
    """
    r = np.asarray(nodes.nodes if isinstance(nodes, RadialGrid) else nodes, dtype=float)
    Phi = np.asarray(Phi)
    if Phi.shape[0] != r.size:
        raise InvalidArgument("Phi must carry one sample per radial node along axis 0")
    if np.any(np.diff(r) <= 0) or r[0] < 0:
        raise InvalidArgument("radial nodes must be non-negative and increasing")
    out = np.zeros(Phi.shape, dtype=np.result_type(Phi, float))
    pos = r > 0
    rp = r[pos]
    if rp.size == 0:
        return out
    g = Phi[pos] / rp.reshape((-1,) + (1,) * (Phi.ndim - 1))
    if rp.size > 1:
        g0 = g[0] - (g[1] - g[0]) * rp[0] / (rp[1] - rp[0])
    else:
        g0 = g[0]
    pts = np.concatenate([[0.0], rp])
    gs = np.concatenate([g0[None], g], axis=0)
    res = np.zeros_like(g)
    shape = (-1,) + (1,) * (Phi.ndim - 1)
    for i, ri in enumerate(rp):
        x = pts[: i + 2]
        y = gs[: i + 2] * (1 - x / ri).reshape(shape)
        res[i] = trapezoid(y, x, axis=0)
    out[pos] = 2.0 / c**2 * res
    return out


def fourier_bessel_forward(a, ell, k, grid):
    """atilde(k) = sqrt(2/pi) int_0^R j_ell(k r) a(r) r^2 dr by the grid's quadrature.

    ``a`` has the radial index first; the result has the k index first.
    """
    k = np.atleast_1d(np.asarray(k.nodes if isinstance(k, KGrid) else k, dtype=float))
    kernel = spherical_jn(ell, np.outer(k, grid.nodes)) * grid.weights[None, :]
    return math.sqrt(2 / math.pi) * np.tensordot(kernel, np.asarray(a), axes=(1, 0))


def fourier_bessel_inverse(atilde, ell, r, kgrid):
    """a(r) = sqrt(2/pi) int_0^inf j_ell(k r) atilde(k) k^2 dk on a finite k-grid."""
    r = np.atleast_1d(np.asarray(r.nodes if isinstance(r, RadialGrid) else r, dtype=float))
    kernel = spherical_jn(ell, np.outer(r, kgrid.nodes)) * (kgrid.weights * kgrid.nodes**2)[None, :]
    return math.sqrt(2 / math.pi) * np.tensordot(kernel, np.asarray(atilde), axes=(1, 0))


# ---------------------------------------------------------------------------
# covariances and frames
# ---------------------------------------------------------------------------


@dataclass
class RadialCovariance:
    """C_ell(r_i, r_j) on a radial grid, ``matrices[ell]`` for ell = 0..lmax."""

    spin: int
    grid: RadialGrid
    matrices: np.ndarray

    def __post_init__(self):
        self.matrices = np.asarray(self.matrices, dtype=float)
        n = self.grid.size
        if self.matrices.ndim != 3 or self.matrices.shape[1:] != (n, n):
            raise InvalidArgument(f"covariance must have shape (lmax+1, {n}, {n})")
        if np.any(self.matrices[: abs(self.spin)]):
            raise InvalidArgument(f"spin-{self.spin} covariance must vanish below ell={abs(self.spin)}")

    @property
    def lmax(self):
        return self.matrices.shape[0] - 1

    def trace_sum(self):
        """sum_ell (2 ell + 1) C_ell(r, r) at every node."""
        ells = np.arange(self.lmax + 1)
        diag = np.diagonal(self.matrices, axis1=1, axis2=2)
        return np.sum((2 * ells + 1)[:, None] * diag, axis=0)


@dataclass
class RadialFrame:
    """Frame functions per ell: ``functions[ell]`` has shape (J_ell, n_r)."""

    spin: int
    grid: RadialGrid
    functions: list
    metadata: dict = field(default_factory=dict)

    @property
    def lmax(self):
        return len(self.functions) - 1

    def covariance(self, ell):
        F = self.functions[ell]
        return F.T @ F

    def to_covariance(self):
        return RadialCovariance(self.spin, self.grid, np.stack([self.covariance(l) for l in range(self.lmax + 1)]))


def _fix_sign(F):
    for row in F:
        nz = np.flatnonzero(np.abs(row) > 1e-14 * max(np.max(np.abs(row)), np.finfo(float).tiny))
        if nz.size and row[nz[0]] < 0:
            row *= -1
    return F


def build_frame(cov, rel_threshold=1e-12, psd_tol=1e-10):
    """Eigen-frame of the weighted covariance, f_lj = sqrt(lambda_j) e_j.

    The e_j are orthonormal in L^2(r^2 dr) on the grid, so the f_lj are the
    Karhunen-Loeve functions; eigenvalues below ``rel_threshold`` times the
    largest are dropped.
    """
    w = cov.grid.weights
    sw = np.sqrt(w)
    functions = []
    for ell in range(cov.lmax + 1):
        C = cov.matrices[ell]
        if ell < abs(cov.spin) or not np.any(C):
            functions.append(np.zeros((0, cov.grid.size)))
            continue
        if not np.array_equal(C, C.T):
            raise CovarianceInvalid(f"covariance at ell={ell} is not symmetric", ell=ell)
        lam, U = np.linalg.eigh(sw[:, None] * C * sw[None, :])
        top = float(np.max(np.abs(lam)))
        if lam[0] < -psd_tol * top:
            raise CovarianceInvalid(
                f"covariance at ell={ell} has eigenvalue {lam[0]:.3e} < 0", ell=ell)
        keep = lam > rel_threshold * top
        order = np.argsort(lam[keep])[::-1]
        lam_k, U_k = lam[keep][order], U[:, keep][:, order]
        F = (np.sqrt(lam_k)[None, :] * U_k / sw[:, None]).T
        functions.append(_fix_sign(np.ascontiguousarray(F)))
    return RadialFrame(cov.spin, cov.grid, functions, {"rel_threshold": rel_threshold})


def orthonormal_polynomials(grid, count):
    """Polynomials of degree < count, orthonormal in L^2([0, R], r^2 dr) under the grid rule."""
    if count > grid.size:
        raise RankDeficient(f"{count} polynomials need at least {count} radial nodes")
    x = 2 * grid.nodes / grid.R - 1
    V = np.polynomial.legendre.legvander(x, count - 1)
    sw = np.sqrt(grid.weights)
    Q, Rm = np.linalg.qr(sw[:, None] * V)
    Q = Q * np.sign(np.diag(Rm))[None, :]
    return (Q / sw[:, None]).T


@dataclass
class BasisExpansion:
    frame: RadialFrame
    coefficients: list
    squared: list
    residuals: np.ndarray
    clipped: list


def expand_in_basis(target, basis, rank_tol=1e-10):
    """Scalars c_lj such that sum_j c_lj^2 f_j f_j^T best matches C_ell.

    ``target`` is a RadialCovariance or RadialFrame; ``basis`` is an array
    (J, n_r) used for every ell, or a list of such arrays indexed by ell.
    The fit is linear least squares in c^2 under the weighted Frobenius
    norm ||W^(1/2) M W^(1/2)||_F. Negative squared coefficients are clipped
    to zero and listed in ``clipped``; a rank-deficient basis raises.
    """
    cov = target.to_covariance() if isinstance(target, RadialFrame) else target
    grid = cov.grid
    sw = np.sqrt(grid.weights)
    functions, coefficients, squared, residuals, clipped = [], [], [], [], []
    for ell in range(cov.lmax + 1):
        B = np.asarray(basis[ell] if isinstance(basis, (list, tuple)) else basis, dtype=float)
        if B.ndim != 2 or B.shape[1] != grid.size:
            raise InvalidArgument(f"basis for ell={ell} must have shape (J, {grid.size})")
        U = B * sw[None, :]
        design = np.stack([np.outer(u, u).ravel() for u in U], axis=1)
        rank = np.linalg.matrix_rank(design, tol=rank_tol * max(np.linalg.norm(design, 2), 1e-300))
        if rank < B.shape[0]:
            raise RankDeficient(f"basis for ell={ell} has rank {rank} < {B.shape[0]}")
        Ct = (sw[:, None] * cov.matrices[ell] * sw[None, :]).ravel()
        d, *_ = np.linalg.lstsq(design, Ct, rcond=None)
        neg = [j for j in range(d.size) if d[j] < 0]
        c = np.sqrt(np.clip(d, 0, None))
        fit = design @ (c**2)
        norm = np.linalg.norm(Ct)
        residuals.append(np.linalg.norm(fit - Ct) / norm if norm > 0 else np.linalg.norm(fit))
        functions.append(c[:, None] * B)
        coefficients.append(c)
        squared.append(d)
        clipped.append(neg)
    frame = RadialFrame(cov.spin, grid, functions, {"basis_expansion": True})
    return BasisExpansion(frame, coefficients, squared, np.array(residuals), clipped)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _ball_block(frame, seed, ell, real):
    F = frame.functions[ell]
    J = F.shape[0]
    gen = rng.block_stream(seed, rng.BALL, 0, ell)
    if not real:
        re, im = gen.standard_normal((2, 2 * ell + 1, J))
        X = (re + 1j * im) / math.sqrt(2)
    else:
        re, im = gen.standard_normal((2, ell + 1, J))
        pos = (re + 1j * im) / math.sqrt(2)
        pos[0] = re[0]
        sign = np.where(np.arange(1, ell + 1) % 2 == 0, 1.0, -1.0)[:, None]
        X = np.concatenate([(sign * np.conj(pos[1:]))[::-1], pos])
    return ell, X @ F


def sample_ball_coefficients(frame, seed, real=None, threads=1):
    """a_lm(r_i) = sum_j f_lj(r_i) X_lmj, shape (n_r, lmax + 1, 2 lmax + 1).

    X_lmj are unit complex normals (E|X|^2 = 1); for spin 0 with ``real``
    (the default) the m < 0 half mirrors m > 0 so every shell is real.
    """
    seed = rng.check_seed(seed)
    if real is None:
        real = frame.spin == 0
    if real and frame.spin != 0:
        raise InvalidArgument("the reality constraint only applies to spin 0")
    lmax = frame.lmax
    out = np.zeros((frame.grid.size, lmax + 1, 2 * lmax + 1), dtype=complex)
    ells = [l for l in range(abs(frame.spin), lmax + 1) if frame.functions[l].shape[0]]
    work = lambda ell: _ball_block(frame, seed, ell, real)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(work, ells))
    else:
        blocks = [work(ell) for ell in ells]
    for ell, block in blocks:
        out[:, ell, lmax - ell: lmax + ell + 1] = block.T
    return out


@dataclass
class BallField:
    grid: RadialGrid
    spin: int
    coefficients: list
    maps: list


def sample_ball_field(frame, sphere_grid, seed, real=None, threads=1):
    """Shell maps of sum_lmj f_lj(r) X_lmj sY_lm(n) at every radial node."""
    a = sample_ball_coefficients(frame, seed, real=real, threads=threads)
    coeffs = [HarmonicCoefficients(frame.spin, frame.lmax, a[i]) for i in range(frame.grid.size)]
    maps = [synthesize(c, sphere_grid) for c in coeffs]
    if (frame.spin == 0) and (real is None or real):
        for smap in maps:
            smap.values = smap.values.real
    return BallField(frame.grid, frame.spin, coeffs, maps)
