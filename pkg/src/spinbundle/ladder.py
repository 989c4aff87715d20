"""Spin raising/lowering in harmonic space and the lensing distortion fields.

Operator strings read like the written operators: ``"LRR"`` is
eth* eth eth, applied right to left ('R' raises, 'L' lowers).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .transform import HarmonicCoefficients


def raise_factor(ell, s):
    """sqrt((l - s)(l + s + 1)); zero when l = s >= 0."""
    if ell < abs(s):
        raise InvalidArgument(f"ell={ell} is below |s|={abs(s)}")
    return math.sqrt((ell - s) * (ell + s + 1))


def lower_factor(ell, s):
    """sqrt((l + s)(l - s + 1)); zero when l = -s >= 0."""
    if ell < abs(s):
        raise InvalidArgument(f"ell={ell} is below |s|={abs(s)}")
    return math.sqrt((ell + s) * (ell - s + 1))


@dataclass(frozen=True)
class LadderCoefficient:
    ell: int
    s: int

    @property
    def raise_factor(self):
        return raise_factor(self.ell, self.s)

    @property
    def lower_factor(self):
        return lower_factor(self.ell, self.s)


def _shift(coeffs, step, factor):
    lmax = coeffs.lmax
    out = HarmonicCoefficients.zeros(coeffs.spin + step, lmax)
    for ell in range(max(abs(coeffs.spin), abs(out.spin)), lmax + 1):
        out.a[ell] = factor(ell, coeffs.spin) * coeffs.a[ell]
    return out


def eth_raise(coeffs):
    """Spin s -> s + 1 with b_lm = sqrt((l - s)(l + s + 1)) a_lm."""
    return _shift(coeffs, 1, raise_factor)


def eth_lower(coeffs):
    """Spin s -> s - 1 with b_lm = sqrt((l + s)(l - s + 1)) a_lm."""
    return _shift(coeffs, -1, lower_factor)


def apply_chain(coeffs, ops):
    for op in reversed(ops):
        if op == "R":
            coeffs = eth_raise(coeffs)
        elif op == "L":
            coeffs = eth_lower(coeffs)
        else:
            raise InvalidArgument(f"unknown ladder operator {op!r}")
    return coeffs


def chain_factor(ell, ops, s=0):
    """Product of ladder factors picked up by sY_lm along ``ops``.

    The integer radicands are multiplied exactly and the square root is taken
    once, so perfect squares come out exact. Zero once the chain leaves
    ell >= |s|.
    """
    radicand = 1
    for op in reversed(ops):
        if ell < abs(s):
            return 0.0
        if op == "R":
            radicand *= (ell - s) * (ell + s + 1)
            s += 1
        elif op == "L":
            radicand *= (ell + s) * (ell - s + 1)
            s -= 1
        else:
            raise InvalidArgument(f"unknown ladder operator {op!r}")
    return math.sqrt(radicand) if ell >= abs(s) else 0.0


# (prefactor, operator strings, output spin); spherical lensing fields of a potential phi
DISTORTIONS = {
    "kappa": (1 / 4, ("RL", "LR"), 0),
    "flexion1": (-1 / 6, ("LRR", "RLR", "RRL"), 1),
    "shear": (1 / 2, ("RR",), 2),
    "flexion3": (-1 / 2, ("RRR",), 3),
}


@dataclass(frozen=True)
class DistortionMultipliers:
    ell: int
    kappa: float
    flexion1: float
    shear: float
    flexion3: float


def distortion_multipliers(ell):
    if ell < 0:
        raise InvalidArgument(f"ell must be non-negative, got {ell}")
    # + 0.0 turns the -0.0 of a vanishing negative multiplier into 0.0
    values = {name: pre * sum(chain_factor(ell, ops) for ops in chains) + 0.0
              for name, (pre, chains, _) in DISTORTIONS.items()}
    return DistortionMultipliers(ell, **values)


def distortion_fields(phi):
    """Magnification, first flexion, shear and third flexion coefficients of phi.

    Returns a dict keyed kappa, flexion1, shear, flexion3 with spins 0..3.
    """
    if phi.spin != 0:
        raise InvalidArgument("the lensing potential must be spin 0")
    ells = np.arange(phi.lmax + 1)
    table = [distortion_multipliers(ell) for ell in ells]
    out = {}
    for name, (_, _, spin) in DISTORTIONS.items():
        mult = np.array([getattr(t, name) for t in table])
        a = mult[:, None] * phi.a + 0.0
        a[: spin] = 0
        out[name] = HarmonicCoefficients(spin, phi.lmax, a)
    return out
