"""Irreducible representations of SO(2), O(2), SO(3), O(3) handled by label.

Characters are stored exactly as integer Fourier polynomials in the rotation
angle (one polynomial per connected component of the group), so tensor
products and multiplicities reduce to integer arithmetic.

Group elements used by :func:`character`:

* SO2: angle phi
* O2: (phi, reflection) with reflection a bool; the reflection is
  [[cos phi, sin phi], [sin phi, -cos phi]]
* SO3: rotation angle omega
* O3: (omega, sign) for the element sign * R(omega), sign = +1 or -1
"""

import math
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .errors import GroupPairUnsupported, InvalidArgument, InvalidLabel

GROUPS = ("SO2", "O2", "SO3", "O3")


@dataclass(frozen=True, order=True)
class Irrep:
    group: str
    degree: int
    sign: Optional[str] = None

    def __post_init__(self):
        g, d, s = self.group, self.degree, self.sign
        if g not in GROUPS:
            raise InvalidLabel(f"unknown group {g!r}")
        if not isinstance(d, (int, np.integer)) or isinstance(d, bool):
            raise InvalidLabel(f"degree must be an integer, got {d!r}")
        if g == "SO2":
            ok = s is None
        elif g == "O2":
            ok = d >= 0 and ((d == 0 and s in ("+", "-")) or (d > 0 and s is None))
        elif g == "SO3":
            ok = d >= 0 and s is None
        else:
            ok = d >= 0 and s in ("+", "-")
        if not ok:
            raise InvalidLabel(f"invalid {g} label: degree={d}, sign={s!r}")

    @property
    def dim(self):
        if self.group == "SO2":
            return 1
        if self.group == "O2":
            return 1 if self.degree == 0 else 2
        return 2 * self.degree + 1

    def __str__(self):
        if self.group == "SO2":
            return f"chi({self.degree})"
        if self.group == "O2":
            return f"E{self.degree}{self.sign or ''}"
        if self.group == "SO3":
            return f"V(l={self.degree})"
        return f"V(l={self.degree},parity={self.sign})"


def so2(m):
    return Irrep("SO2", m)


def o2(m, sign=None):
    return Irrep("O2", m, sign)


def so3(ell):
    return Irrep("SO3", ell)


def o3(ell, sign):
    return Irrep("O3", ell, sign)


_PATTERNS = [
    (re.compile(r"^E(\d+)([+-]?)$"), lambda g: o2(int(g[0]), g[1] or None)),
    (re.compile(r"^chi\((-?\d+)\)$"), lambda g: so2(int(g[0]))),
    (re.compile(r"^V\((?:l=)?(\d+)\)$"), lambda g: so3(int(g[0]))),
    (re.compile(r"^V\((?:l=)?(\d+),\s*(?:parity=)?([+-])\)$"), lambda g: o3(int(g[0]), g[1])),
]


def parse_label(text, group=None):
    """Parse ``E0+``, ``E3``, ``chi(-2)``, ``V(2)``, ``V(l=3,parity=-)`` or ``V(3,-)``."""
    text = text.strip().replace(" ", "")
    for pattern, build in _PATTERNS:
        match = pattern.match(text)
        if match:
            label = build(match.groups())
            if group is not None and label.group != group:
                raise InvalidLabel(f"{text!r} is a {label.group} label, expected {group}")
            return label
    if group == "SO2" and re.fullmatch(r"-?\d+", text):
        return so2(int(text))
    raise InvalidLabel(f"cannot parse representation label {text!r}")


# ---------------------------------------------------------------------------
# class functions
# ---------------------------------------------------------------------------

def _n_parts(group):
    return 1 if group in ("SO2", "SO3") else 2


def _merge(f, g):
    # Counter.__add__ would drop negative coefficients
    out = Counter(f)
    for k, v in g.items():
        out[k] += v
    return out


def _convolve(f, g):
    out = Counter()
    for i, a in f.items():
        for j, b in g.items():
            out[i + j] += a * b
    return Counter({k: v for k, v in out.items() if v})


class ClassFunction:
    """Integer combination of characters on one of the four groups.

    ``parts[c]`` maps a frequency k to the coefficient of exp(i k angle) on
    component c: the identity component first, then reflections (O2, constant
    in the angle) or the central inversion coset (O3).
    """

    def __init__(self, group, parts):
        self.group = group
        self.parts = tuple(Counter({k: v for k, v in p.items() if v}) for p in parts)
        if len(self.parts) != _n_parts(group):
            raise InvalidArgument(f"{group} class functions have {_n_parts(group)} parts")

    def __add__(self, other):
        self._same(other)
        return ClassFunction(self.group, [_merge(a, b) for a, b in zip(self.parts, other.parts)])

    def __mul__(self, other):
        self._same(other)
        if self.group == "O2":
            # reflections: the part is a constant, stored at frequency 0
            return ClassFunction("O2", [_convolve(self.parts[0], other.parts[0]),
                                        {0: self.parts[1][0] * other.parts[1][0]}])
        return ClassFunction(self.group, [_convolve(a, b) for a, b in zip(self.parts, other.parts)])

    def __eq__(self, other):
        return self.group == other.group and self.parts == other.parts

    def _same(self, other):
        if self.group != other.group:
            raise InvalidArgument(f"cannot combine {self.group} and {other.group} class functions")

    def inner(self, other):
        """Haar average of self * conj(other), exact."""
        self._same(other)
        if self.group == "SO2":
            return Fraction(_pair(self.parts[0], other.parts[0]))
        if self.group == "O2":
            return Fraction(_pair(self.parts[0], other.parts[0]) + self.parts[1][0] * other.parts[1][0], 2)
        if self.group == "SO3":
            return _so3_inner(self.parts[0], other.parts[0])
        return sum((_so3_inner(a, b) for a, b in zip(self.parts, other.parts)), Fraction(0)) / 2

    def __call__(self, angle, flag=None):
        if self.group in ("SO2", "SO3"):
            part = self.parts[0]
        elif self.group == "O2":
            if flag:
                return float(self.parts[1][0])
            part = self.parts[0]
        else:
            part = self.parts[0] if flag in (None, 1, "+") else self.parts[1]
        return float(sum(v * np.cos(k * angle) for k, v in part.items()))

    def __repr__(self):
        return f"ClassFunction({self.group}, {[dict(p) for p in self.parts]})"


def _pair(f, g):
    # conj(exp(i k t)) pairs frequency k of f with frequency k of g (real coefficients)
    return sum(v * g.get(k, 0) for k, v in f.items())


def _so3_inner(f, g):
    # class functions depend on the rotation angle only; Weyl's density is 1 - cos(omega)
    prod = _convolve(f, Counter({-k: v for k, v in g.items()}))
    return Fraction(prod.get(0, 0)) - Fraction(prod.get(1, 0) + prod.get(-1, 0), 2)


def class_function(label):
    """Exact character of an irreducible representation."""
    g, d = label.group, label.degree
    if g == "SO2":
        return ClassFunction(g, [{d: 1}])
    if g == "O2":
        if d == 0:
            return ClassFunction(g, [{0: 1}, {0: 1 if label.sign == "+" else -1}])
        return ClassFunction(g, [{d: 1, -d: 1}, {0: 0}])
    weyl = {k: 1 for k in range(-d, d + 1)}
    if g == "SO3":
        return ClassFunction(g, [weyl])
    eps = 1 if label.sign == "+" else -1
    return ClassFunction(g, [weyl, {k: eps for k in weyl}])


def o2_matrix(m, phi, reflection=False):
    """Representing matrix of E^m (m >= 1) at a rotation or reflection."""
    c, s = math.cos(m * phi), math.sin(m * phi)
    if reflection:
        return np.array([[c, s], [s, -c]])
    return np.array([[c, -s], [s, c]])


def character(label, element):
    """Trace of the representing matrix of ``label`` at ``element``."""
    g, d = label.group, label.degree
    if g == "SO2":
        return complex(np.exp(1j * d * float(element)))
    if g == "O2":
        phi, reflection = element if isinstance(element, tuple) else (element, False)
        if d == 0:
            return -1.0 if (reflection and label.sign == "-") else 1.0
        return float(np.trace(o2_matrix(d, phi, reflection)))
    if g == "SO3":
        omega = float(element)
        return float(1 + 2 * sum(math.cos(k * omega) for k in range(1, d + 1)))
    omega, eps = element if isinstance(element, tuple) else (element, 1)
    weyl = 1 + 2 * sum(math.cos(k * omega) for k in range(1, d + 1))
    return float(weyl * (eps if label.sign == "-" else 1))


# ---------------------------------------------------------------------------
# decompositions
# ---------------------------------------------------------------------------

def _sort_key(label):
    return (label.degree, {None: 0, "+": 0, "-": 1}[label.sign])


class RepDecomposition:
    """Formal direct sum: irreducible labels with positive multiplicities."""

    def __init__(self, terms=()):
        counts = Counter()
        if isinstance(terms, dict):
            terms = terms.items()
        for item in terms:
            label, mult = item if isinstance(item, tuple) else (item, 1)
            counts[label] += int(mult)
        if any(v < 0 for v in counts.values()):
            raise InvalidArgument("multiplicities must be non-negative")
        self.counts = Counter({k: v for k, v in counts.items() if v})
        groups = {label.group for label in self.counts}
        if len(groups) > 1:
            raise InvalidArgument(f"mixed groups in one decomposition: {sorted(groups)}")
        self.group = groups.pop() if groups else None

    @property
    def dim(self):
        return sum(label.dim * n for label, n in self.counts.items())

    def multiplicity(self, label):
        return self.counts.get(label, 0)

    def labels(self):
        return sorted(self.counts, key=_sort_key)

    def class_function(self):
        total = None
        for label, n in self.counts.items():
            f = class_function(label)
            for _ in range(n):
                total = f if total is None else total + f
        return total

    def __add__(self, other):
        return RepDecomposition(self.counts + other.counts)

    def __mul__(self, other):
        return decompose(self.class_function() * other.class_function())

    def __eq__(self, other):
        return isinstance(other, RepDecomposition) and self.counts == other.counts

    def __len__(self):
        return sum(self.counts.values())

    def __str__(self):
        if not self.counts:
            return "0"
        return " + ".join(str(label) if self.counts[label] == 1 else f"{self.counts[label]} {label}"
                          for label in self.labels())

    def __repr__(self):
        return f"RepDecomposition({self})"


def _candidates(f):
    top = max((abs(k) for part in f.parts for k in part), default=0)
    g = f.group
    if g == "SO2":
        return [so2(k) for k in range(-top, top + 1)]
    if g == "O2":
        return [o2(0, "+"), o2(0, "-")] + [o2(k) for k in range(1, top + 1)]
    if g == "SO3":
        return [so3(k) for k in range(top + 1)]
    return [o3(k, s) for k in range(top + 1) for s in "+-"]


def decompose(f):
    """Split a class function into irreducible characters; loud if it is not a character."""
    terms = []
    for label in _candidates(f):
        n = f.inner(class_function(label))
        if n.denominator != 1 or n < 0:
            raise InvalidArgument(f"class function is not a character: multiplicity {n} for {label}")
        if n:
            terms.append((label, int(n)))
    out = RepDecomposition(terms)
    if out.class_function() is None:
        if any(f.parts):
            raise InvalidArgument("class function is not a character")
    elif out.class_function() != f:
        raise InvalidArgument("class function is not a character")
    return out


def restrict_o3_to_o2(label):
    """Branching O(3) -> O(2) for O(2) embedded as diag(k, 1)."""
    if not isinstance(label, Irrep) or label.group != "O3":
        raise InvalidLabel(f"expected an O3 label, got {label!r}")
    ell = label.degree
    flip = {"+": "-", "-": "+"}
    zero = label.sign if ell % 2 == 0 else flip[label.sign]
    return RepDecomposition([o2(0, zero)] + [o2(k) for k in range(1, ell + 1)])


def restrict_so3_to_so2(ell):
    if ell < 0:
        raise InvalidLabel(f"ell must be non-negative, got {ell}")
    return RepDecomposition([so2(m) for m in range(-ell, ell + 1)])


def restrict_by_character(label):
    """Restriction to the stabiliser subgroup computed from characters alone.

    SO(2) sits in SO(3) as rotations about the z axis. An O(2) reflection
    embeds as diag(1, -1, 1) = -R_y(pi), i.e. the inversion coset at angle pi.
    """
    f = class_function(label)
    if label.group == "SO3":
        return decompose(ClassFunction("SO2", [f.parts[0]]))
    if label.group == "O3":
        at_pi = round(f(math.pi, -1))
        return decompose(ClassFunction("O2", [f.parts[0], {0: at_pi}]))
    raise GroupPairUnsupported(f"no stabiliser subgroup registered for {label.group}")


def tensor_o2(a, b):
    for x in (a, b):
        if not isinstance(x, Irrep) or x.group != "O2":
            raise InvalidLabel(f"expected an O2 label, got {x!r}")
    return decompose(class_function(a) * class_function(b))


def tensor_with_vector(label, sign="+"):
    """V^l (x) V^1 by the Clebsch-Gordan rule l (x) 1 = (l-1) + l + (l+1)."""
    if label.group not in ("SO3", "O3"):
        raise InvalidLabel(f"expected an SO3 or O3 label, got {label!r}")
    ell = label.degree
    degrees = [1] if ell == 0 else [ell - 1, ell, ell + 1]
    if label.group == "SO3":
        return RepDecomposition([so3(j) for j in degrees])
    parity = "+" if (label.sign == sign) else "-"
    return RepDecomposition([o3(j, parity) for j in degrees])


class DivisionAlgebra(NamedTuple):
    name: str
    dim: int


def _real_character(label):
    """Character of the real representation a label stands for over the reals.

    An SO2 label m != 0 names the 2-dimensional rotation representation by
    m*phi, whose complexification is chi(m) + chi(-m).
    """
    if label.group == "SO2" and label.degree != 0:
        return class_function(so2(label.degree)) + class_function(so2(-label.degree))
    return class_function(label)


def division_algebra_type(label, field="real"):
    """Schur algebra of self-intertwiners: R, C or H, with its dimension over the field.

    Over the reals, the complexified representation has <chi, chi> = 1
    (irreducible), 2 (two inequivalent pieces) or 4 (two equivalent pieces).
    """
    if field == "complex":
        return DivisionAlgebra("C", 1)
    if field != "real":
        raise InvalidArgument(f"field must be 'real' or 'complex', got {field!r}")
    f = _real_character(label)
    norm = f.inner(f)
    return {1: DivisionAlgebra("R", 1), 2: DivisionAlgebra("C", 2), 4: DivisionAlgebra("H", 4)}[int(norm)]


_PAIRS = {("SO3", "SO2"): ("complex",), ("O3", "O2"): ("real", "complex")}


def induced_multiplicity(V, E, field):
    """Multiplicity of V in the sections of the bundle induced by E (Frobenius reciprocity).

    ``E`` is an Irrep or a RepDecomposition of the subgroup. Returns a
    Fraction: sum_i n_i n(E_i, res V) / dim D(V).
    """
    if isinstance(E, Irrep):
        E = RepDecomposition([E])
    subgroup = E.group
    pair = (V.group, subgroup)
    if pair not in _PAIRS or field not in _PAIRS[pair]:
        raise GroupPairUnsupported(f"unsupported group pair {pair} over the {field} field")
    res = restrict_o3_to_o2(V) if V.group == "O3" else restrict_so3_to_so2(V.degree)
    total = sum(n * res.multiplicity(label) for label, n in E.counts.items())
    return Fraction(total, division_algebra_type(V, field).dim)


def induced_decomposition(E, field, lmax):
    """All V up to degree lmax with their multiplicities in the induced representation."""
    group = {"SO2": "SO3", "O2": "O3"}.get(E.group if isinstance(E, RepDecomposition) else E.group)
    if group is None:
        raise GroupPairUnsupported(f"no ambient group for subgroup {E.group}")
    labels = [so3(k) for k in range(lmax + 1)] if group == "SO3" else \
        [o3(k, s) for k in range(lmax + 1) for s in "+-"]
    return [(V, induced_multiplicity(V, E, field)) for V in labels]
