"""Wigner d-matrices and spin-weighted spherical harmonics.

Phase convention::

    sY_lm(theta, phi) = (-1)**m * sqrt((2l+1)/(4 pi)) * d^l_{-m,s}(theta) * exp(i m phi)

with d^l_{mn}(beta) = <l m| exp(-i beta J_y) |l n>.  For s = 0 this is the
usual Condon-Shortley Y_lm, and the spin-raising operator
eth = s cot(theta) - d/dtheta - (i/sin theta) d/dphi acts as
eth sY_lm = sqrt((l-s)(l+s+1)) (s+1)Y_lm.
"""

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import InvalidArgument

DEFAULT_MAX_ELL = 512


def max_ell():
    """Largest supported degree; override with SPINBUNDLE_MAX_ELL."""
    return int(os.environ.get("SPINBUNDLE_MAX_ELL", DEFAULT_MAX_ELL))


def check_ell(ell, what="ell"):
    if int(ell) != ell or ell < 0:
        raise InvalidArgument(f"{what} must be a non-negative integer, got {ell}")
    if ell > max_ell():
        raise InvalidArgument(f"{what}={ell} exceeds the configured maximum {max_ell()}")
    return int(ell)


def check_indices(s, ell, m):
    check_ell(ell)
    if ell < abs(s):
        raise InvalidArgument(f"ell={ell} is below |s|={abs(s)}")
    if abs(m) > ell:
        raise InvalidArgument(f"|m|={abs(m)} exceeds ell={ell}")


def _seed(m, n, theta):
    """d^{l0}_{mn}(theta) at l0 = max(|m|, |n|), the first non-zero degree."""
    l0 = np.maximum(np.abs(m), np.abs(n))
    # l0 == |m| branch: rows m = +-l0; otherwise columns n = +-l0
    row = np.abs(m) >= np.abs(n)
    k = np.where(row, n, m)
    top = np.where(row, m, n) > 0
    a = np.where(top, l0 + k, l0 - k)       # power of cos(theta/2)
    b = np.where(top, l0 - k, l0 + k)       # power of sin(theta/2)
    # the sin factor carries a minus sign for m = +l0 and for n = -l0
    negative = np.where(row, top, ~top)
    sign = np.where(negative & (b % 2 == 1), -1.0, 1.0)
    lbinom = gammaln(2 * l0 + 1) - gammaln(l0 + k + 1) - gammaln(l0 - k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lc = np.log(np.cos(theta / 2))
        ls = np.log(np.sin(theta / 2))
        logv = 0.5 * lbinom + np.where(a == 0, 0.0, a * lc) + np.where(b == 0, 0.0, b * ls)
    return sign * np.exp(logv)


def iter_wigner_d(lmax, m, n, theta):
    """Yield (ell, d^ell_{mn}(theta)) for ell = 0..lmax.

    ``m``, ``n`` and ``theta`` broadcast against each other. Entries with
    ell < max(|m|, |n|) are zero. The recursion runs upward in ell at fixed
    (m, n) and never divides by sin(theta), so the poles need no special case.
    """
    m, n, theta = np.broadcast_arrays(np.asarray(m), np.asarray(n), np.asarray(theta, dtype=float))
    m = m.astype(np.int64)
    n = n.astype(np.int64)
    x = np.cos(theta)
    l0 = np.maximum(np.abs(m), np.abs(n))
    seed = _seed(m, n, theta)
    mn = (m * n).astype(float)
    m2 = (m * m).astype(float)
    n2 = (n * n).astype(float)

    prev = np.zeros(theta.shape)
    cur = np.where(l0 == 0, seed, 0.0)
    yield 0, cur
    for ell in range(lmax):
        nxt = np.where(l0 == ell + 1, seed, 0.0)
        run = l0 <= ell
        if ell == 0:
            nxt = np.where(run, x * cur, nxt)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                lp = ell + 1.0
                denom = ell * np.sqrt((lp * lp - m2) * (lp * lp - n2))
                back = lp * np.sqrt(np.maximum((ell * ell - m2) * (ell * ell - n2), 0.0))
                rec = ((2 * ell + 1) * (ell * lp * x - mn) * cur - back * prev) / denom
            nxt = np.where(run, rec, nxt)
        prev, cur = cur, nxt
        yield ell + 1, cur


@dataclass(frozen=True)
class WignerDTable:
    """Full (2l+1) x (2l+1) table; ``entries[m + l, n + l] = d^l_{mn}(theta)``."""

    ell: int
    theta: float
    entries: np.ndarray

    def __getitem__(self, mn):
        m, n = mn
        if abs(m) > self.ell or abs(n) > self.ell:
            raise InvalidArgument(f"index ({m}, {n}) outside degree {self.ell}")
        return self.entries[m + self.ell, n + self.ell]


def wigner_d(ell, theta):
    ell = check_ell(ell)
    theta = float(theta)
    if not 0.0 <= theta <= math.pi:
        raise InvalidArgument(f"theta must lie in [0, pi], got {theta}")
    idx = np.arange(-ell, ell + 1)
    table = None
    for _, table in iter_wigner_d(ell, idx[:, None], idx[None, :], theta):
        pass
    table = np.array(table)
    table.setflags(write=False)
    return WignerDTable(ell, theta, table)


def spin_lambda_rows(s, lmax, theta):
    """Yield (ell, lam) with lam[m + lmax, j] = sY_lm(theta_j, 0) for ell = 0..lmax.

    Rows with ell < |s| or |m| > ell are zero.
    """
    mvals = np.arange(-lmax, lmax + 1)
    theta = np.asarray(theta, dtype=float)
    phase = np.where(mvals % 2 == 0, 1.0, -1.0)[:, None]
    for ell, d in iter_wigner_d(lmax, -mvals[:, None], s, theta[None, :]):
        if ell < abs(s):
            yield ell, np.zeros_like(d)
        else:
            yield ell, phase * math.sqrt((2 * ell + 1) / (4 * math.pi)) * d


def spin_ylm_all(s, lmax, theta, phi):
    """All sY_lm up to lmax at the points (theta, phi).

    Returns a complex array of shape (lmax + 1, 2 lmax + 1, npoints) indexed
    [ell, m + lmax, point].
    """
    check_ell(lmax, "lmax")
    theta = np.atleast_1d(np.asarray(theta, dtype=float)).ravel()
    phi = np.atleast_1d(np.asarray(phi, dtype=float)).ravel()
    theta, phi = np.broadcast_arrays(theta, phi)
    mvals = np.arange(-lmax, lmax + 1)
    eimp = np.exp(1j * mvals[:, None] * phi[None, :])
    out = np.empty((lmax + 1, 2 * lmax + 1, theta.size), dtype=complex)
    for ell, lam in spin_lambda_rows(s, lmax, theta):
        out[ell] = lam * eimp
    return out


def spin_ylm(s, ell, m, theta, phi):
    """Spin-s spherical harmonic sY_lm; scalar or array angles."""
    check_indices(s, ell, m)
    theta_arr = np.asarray(theta, dtype=float)
    phi_arr = np.asarray(phi, dtype=float)
    d = None
    for _, d in iter_wigner_d(ell, -m, s, theta_arr):
        pass
    val = (-1) ** (m % 2) * math.sqrt((2 * ell + 1) / (4 * math.pi)) * d * np.exp(1j * m * phi_arr)
    return val[()] if np.ndim(val) == 0 else val


def antipode(theta, phi):
    """Coordinates of -n for n = (theta, phi)."""
    return np.pi - np.asarray(theta), np.mod(np.asarray(phi) + np.pi, 2 * np.pi)


def parity_transform(s, ell, m, theta, phi):
    """sY_lm(-n), evaluated as (-1)**ell * (-s)Y_lm(n)."""
    check_indices(s, ell, m)
    sign = -1.0 if ell % 2 else 1.0
    return sign * spin_ylm(-s, ell, m, theta, phi)


def real_ylm(ell, m, theta, phi):
    """Real spherical harmonic S^m_l built from the complex Y_lm."""
    check_indices(0, ell, m)
    if m == 0:
        return np.real(spin_ylm(0, ell, 0, theta, phi))
    sign = -1.0 if m % 2 else 1.0
    y = spin_ylm(0, ell, m, theta, phi)
    y_neg = spin_ylm(0, ell, -m, theta, phi)
    if m > 0:
        val = (y + sign * y_neg) / math.sqrt(2)
    else:
        val = 1j * (y - sign * y_neg) / math.sqrt(2)
    return np.real(val)


def real_ylm_all(lmax, theta, phi):
    """All S^m_l up to lmax, shape (lmax + 1, 2 lmax + 1, npoints)."""
    y = spin_ylm_all(0, lmax, theta, phi)
    mvals = np.arange(-lmax, lmax + 1)
    sign = np.where(mvals % 2 == 0, 1.0, -1.0)[None, :, None]
    flipped = y[:, ::-1, :]
    pos = (y + sign * flipped) / math.sqrt(2)
    neg = 1j * (y - sign * flipped) / math.sqrt(2)
    out = np.where((mvals > 0)[None, :, None], pos, np.where((mvals < 0)[None, :, None], neg, y))
    return np.real(out)
