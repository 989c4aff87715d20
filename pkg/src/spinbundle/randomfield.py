"""Isotropic Gaussian random sections: scalar, spin-2 (E/B) and Stokes fields."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import InvalidArgument, SpectrumInvalid
from .transform import HarmonicCoefficients, SphereMap, synthesize, synthesize_real_field

SPIN2_COMPONENTS = ("E", "B")
# +1 scalar, -1 pseudo-scalar under n -> -n
PARITY = {"T": 1, "I": 1, "E": 1, "V": -1, "B": -1}


def min_ell(name):
    return 2 if name in SPIN2_COMPONENTS else 0


@dataclass
class PowerSpectrumSet:
    """Per-ell covariance matrices over named components.

    ``matrices[ell]`` is an (n, n) real symmetric PSD matrix; rows of spin-2
    components (E, B) vanish below ell = 2.
    """

    component_names: list
    matrices: np.ndarray
    allow_parity_mixing: bool = False

    def __post_init__(self):
        self.component_names = list(self.component_names)
        if len(set(self.component_names)) != len(self.component_names):
            raise InvalidArgument("duplicate component names")
        self.matrices = np.asarray(self.matrices, dtype=float)
        n = len(self.component_names)
        if self.matrices.ndim != 3 or self.matrices.shape[1:] != (n, n):
            raise InvalidArgument(f"matrices must have shape (lmax+1, {n}, {n})")
        if not np.allclose(self.matrices, self.matrices.transpose(0, 2, 1), rtol=0, atol=0):
            bad = int(np.argmax(np.any(self.matrices != self.matrices.transpose(0, 2, 1), axis=(1, 2))))
            raise SpectrumInvalid(f"matrix at ell={bad} is not symmetric", ell=bad)
        for i, name in enumerate(self.component_names):
            lo = min_ell(name)
            if np.any(self.matrices[:lo, i, :]) or np.any(self.matrices[:lo, :, i]):
                raise SpectrumInvalid(f"component {name} must vanish below ell={lo}", ell=0)
        if not self.allow_parity_mixing:
            for i, a in enumerate(self.component_names):
                for j, b in enumerate(self.component_names):
                    pa, pb = PARITY.get(a), PARITY.get(b)
                    if pa is not None and pb is not None and pa != pb and np.any(self.matrices[:, i, j]):
                        raise SpectrumInvalid(
                            f"cross spectrum {a}-{b} mixes scalar and pseudo-scalar parity; "
                            "pass allow_parity_mixing=True to permit it")

    @property
    def lmax(self):
        return self.matrices.shape[0] - 1

    @classmethod
    def scalar(cls, cl, name="T"):
        cl = np.asarray(cl, dtype=float)
        return cls([name], cl[:, None, None])

    def index(self, name):
        return self.component_names.index(name)

    def active(self, ell):
        """Indices of the components present at degree ``ell``."""
        return [i for i, name in enumerate(self.component_names) if ell >= min_ell(name)]

    def summability(self):
        """sum_ell (2 ell + 1) trace(C_ell) over the stored band."""
        ells = np.arange(self.lmax + 1)
        return float(np.sum((2 * ells + 1) * np.trace(self.matrices, axis1=1, axis2=2)))

    def cl(self, a, b=None):
        b = a if b is None else b
        return self.matrices[:, self.index(a), self.index(b)]


def psd_cholesky(C, tol=1e-12, ell=None):
    """Lower-triangular A with A A^T = C for a symmetric PSD matrix.

    Zero pivots are allowed (the matching column of A is zero) as long as
    the rest of that column vanishes too; anything else means C is not PSD.
    """
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    A = np.zeros_like(C)
    scale = max(float(np.max(np.abs(np.diag(C)), initial=0.0)), np.finfo(float).tiny)
    thresh = tol * scale
    for j in range(n):
        pivot = C[j, j] - A[j, :j] @ A[j, :j]
        if pivot < -thresh:
            raise SpectrumInvalid(f"matrix at ell={ell} is not positive semi-definite", ell=ell)
        col = C[j + 1:, j] - A[j + 1:, :j] @ A[j, :j]
        if pivot <= thresh:
            if np.any(np.abs(col) > math.sqrt(thresh * scale) + thresh):
                raise SpectrumInvalid(f"matrix at ell={ell} is not positive semi-definite", ell=ell)
            continue
        A[j, j] = math.sqrt(pivot)
        A[j + 1:, j] = col / A[j, j]
    return A


@dataclass
class CoefficientSample:
    coefficients: dict
    seed: int
    reality_constrained: bool
    spin: int = 0
    extra: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.coefficients[name]


def _standard_block(seed, comp, ell, real):
    """Unit-variance complex normals z_m for m = -ell..ell of one block.

    With ``real`` only m >= 0 is drawn (m = 0 real) and the m < 0 half is
    the reality mirror.
    """
    gen = rng.block_stream(seed, rng.COEFFICIENTS, comp, ell)
    if not real:
        re, im = gen.standard_normal((2, 2 * ell + 1))
        return (re + 1j * im) / math.sqrt(2)
    re, im = gen.standard_normal((2, ell + 1))
    pos = (re + 1j * im) / math.sqrt(2)
    pos[0] = re[0]
    m = np.arange(1, ell + 1)
    neg = np.where(m % 2 == 0, 1.0, -1.0) * np.conj(pos[1:])
    return np.concatenate([neg[::-1], pos])


def _sample_ell(spec, seed, ell, real):
    active = spec.active(ell)
    if not active:
        return ell, active, None
    C = spec.matrices[ell][np.ix_(active, active)]
    A = psd_cholesky(C, ell=ell)
    z = np.stack([_standard_block(seed, comp, ell, real) for comp in active])
    return ell, active, A @ z


def sample_coefficients(spec, seed, real=True, spin=0, threads=1):
    """Jointly Gaussian a_lm per component with covariance C_ell across components.

    Each (component, ell) block comes from its own counter-based stream, so the
    result does not depend on ``threads``.
    """
    seed = rng.check_seed(seed)
    if real and spin != 0:
        raise InvalidArgument("the reality constraint only applies to spin 0")
    lmax = spec.lmax
    out = {name: HarmonicCoefficients.zeros(spin, lmax) for name in spec.component_names}
    ells = [ell for ell in range(abs(spin), lmax + 1)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda ell: _sample_ell(spec, seed, ell, real), ells))
    else:
        results = [_sample_ell(spec, seed, ell, real) for ell in ells]
    for ell, active, block in results:
        if block is None:
            continue
        for row, i in enumerate(active):
            out[spec.component_names[i]].a[ell, lmax - ell: lmax + ell + 1] = block[row]
    return CoefficientSample(out, seed, real, spin)


def sample_scalar_field(spec, grid, seed, real=True, threads=1):
    if len(spec.component_names) != 1:
        raise InvalidArgument("a scalar field needs exactly one spectrum component")
    sample = sample_coefficients(spec, seed, real=real, threads=threads)
    coeffs = sample[spec.component_names[0]]
    if real:
        return SphereMap(grid, 0, synthesize_real_field(coeffs, grid))
    return synthesize(coeffs, grid)


def _check_eb(c, what):
    if c.spin != 0:
        raise InvalidArgument(f"{what} must be spin-0 indexed")
    if c.lmax >= 0 and np.any(c.a[: min(2, c.lmax + 1)]):
        raise InvalidArgument(f"{what} has support below ell = 2")


def eb_to_qu(e, b):
    """a^(+-2) = e +- i b, as spin +2 and spin -2 coefficient sets."""
    _check_eb(e, "e")
    _check_eb(b, "b")
    if e.lmax != b.lmax:
        raise InvalidArgument("e and b have different lmax")
    plus = HarmonicCoefficients(2, e.lmax, e.a + 1j * b.a)
    minus = HarmonicCoefficients(-2, e.lmax, e.a - 1j * b.a)
    return plus, minus


def qu_to_eb(aplus2, aminus2):
    if aplus2.lmax != aminus2.lmax:
        raise InvalidArgument("a^(+2) and a^(-2) have different lmax")
    if aplus2.spin != 2 or aminus2.spin != -2:
        raise InvalidArgument("expected spin +2 and spin -2 coefficients")
    e = (aplus2.a + aminus2.a) / 2
    b = (aplus2.a - aminus2.a) / 2j
    return HarmonicCoefficients(0, aplus2.lmax, e), HarmonicCoefficients(0, aplus2.lmax, b)


def parity_pair(aplus2, aminus2):
    """Coefficients of the field (Q + iU)'(n) = (Q - iU)(-n) and its conjugate.

    Uses sY_lm(-n) = (-1)^l (-s)Y_lm(n); in terms of e and b this sends
    e -> (-1)^l e and b -> -(-1)^l b, the scalar and pseudo-scalar laws.
    """
    lmax = aplus2.lmax
    sign = np.where(np.arange(lmax + 1) % 2 == 0, 1.0, -1.0)[:, None]
    return (HarmonicCoefficients(2, lmax, sign * aminus2.a),
            HarmonicCoefficients(-2, lmax, sign * aplus2.a))


def sample_stokes_bundle(spec, grid, seed, threads=1):
    """Real I, V, Q, U maps of the Stokes tensor bundle.

    I and V are spin-0; (Q, U) come from e and b through a^(+2) and spin +2
    synthesis, Q + iU. Missing components yield zero maps.
    """
    unknown = set(spec.component_names) - {"I", "V", "E", "B"}
    if unknown:
        raise InvalidArgument(f"unexpected components {sorted(unknown)}; use I, V, E, B")
    sample = sample_coefficients(spec, seed, real=True, threads=threads)
    zero = HarmonicCoefficients.zeros(0, spec.lmax)
    get = lambda name: sample.coefficients.get(name, zero)
    maps = {}
    for name in ("I", "V"):
        maps[name] = SphereMap(grid, 0, synthesize_real_field(get(name), grid))
    plus, _ = eb_to_qu(get("E"), get("B"))
    qu = synthesize(plus, grid).values
    maps["Q"] = SphereMap(grid, 0, qu.real)
    maps["U"] = SphereMap(grid, 0, qu.imag)
    return maps, sample


def stokes_tensor(q, u):
    """Symmetric trace-free matrix field [[Q, U], [U, -Q]], shape (..., 2, 2)."""
    q = np.asarray(q)
    u = np.asarray(u)
    return np.stack([np.stack([q, u], -1), np.stack([u, -q], -1)], -2)


def estimate_power_spectrum(coeffs, names=None):
    """Chat_ell[i, j] = Re sum_m a_i conj(a_j) / (2 ell + 1).

    ``coeffs`` is a single HarmonicCoefficients, a sequence of them, or a
    mapping name -> coefficients.
    """
    if isinstance(coeffs, HarmonicCoefficients):
        coeffs = [coeffs]
    if isinstance(coeffs, dict):
        names = list(coeffs) if names is None else names
        coeffs = [coeffs[n] for n in names]
    coeffs = list(coeffs)
    if names is None:
        names = [f"X{i}" for i in range(len(coeffs))] if len(coeffs) > 1 else ["X"]
    lmax = coeffs[0].lmax
    if any(c.lmax != lmax for c in coeffs):
        raise InvalidArgument("all coefficient sets need the same lmax")
    a = np.stack([c.a for c in coeffs])
    ells = np.arange(lmax + 1)
    mats = np.einsum("ilm,jlm->lij", a, np.conj(a)).real / (2 * ells + 1)[:, None, None]
    mats = 0.5 * (mats + mats.transpose(0, 2, 1))
    return PowerSpectrumSet(names, mats, allow_parity_mixing=True)
