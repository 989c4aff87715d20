"""Readers and writers for the on-disk formats.

Every float is written with 17 significant digits, which round-trips any
IEEE double exactly.

* map JSON: {schema_version, spin, n_theta, n_phi, grid: "gauss-legendre",
  lmax_exact, values: [[re, im], ...]} with values row-major over (theta, phi)
* coefficient CSV: "spin,lmax" header and its value row, then "ell,m,re,im"
  header and one row per coefficient
* spectrum CSV: "ell,comp_i,comp_j,value"; absent entries are zero
* radial grid JSON: {schema_version, R, nodes, weights}
* radial covariance CSV: "ell,i,j,value"; frame CSV: "ell,j,i,value"
"""

import csv
import io as _io
import json

import numpy as np

from .errors import FileFormatError
from .radial import RadialCovariance, RadialFrame, RadialGrid
from .randomfield import PowerSpectrumSet
from .transform import HarmonicCoefficients, SphereMap, make_grid

SCHEMA_VERSION = "1"


def fmt(x):
    text = format(float(x), ".17g")
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def _json_floats(values):
    return "[" + ",".join(fmt(v) for v in values) + "]"


def _parse_float(text, where):
    try:
        return float(text)
    except ValueError as exc:
        raise FileFormatError(f"{where}: cannot parse {text!r} as a number") from exc


def _parse_int(text, where):
    try:
        return int(text)
    except ValueError as exc:
        raise FileFormatError(f"{where}: cannot parse {text!r} as an integer") from exc


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc.strerror}") from exc


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- maps --------------------------------------------------------------------

def map_to_json(smap):
    g = smap.grid
    vals = np.asarray(smap.values, dtype=complex).ravel()
    body = ",".join(f"[{fmt(v.real)},{fmt(v.imag)}]" for v in vals)
    head = (f'{{"schema_version":"{SCHEMA_VERSION}","spin":{int(smap.spin)},'
            f'"n_theta":{g.n_theta},"n_phi":{g.n_phi},"grid":"gauss-legendre",'
            f'"lmax_exact":{g.lmax_exact},"values":[')
    return head + body + "]}"


def map_from_obj(obj, where="map"):
    try:
        if obj.get("grid") != "gauss-legendre":
            raise FileFormatError(f"{where}: unsupported grid {obj.get('grid')!r}")
        n_theta, n_phi, lmax = int(obj["n_theta"]), int(obj["n_phi"]), int(obj["lmax_exact"])
        spin = int(obj["spin"])
        values = obj["values"]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FileFormatError(f"{where}: missing or malformed field ({exc})") from exc
    if n_theta != lmax + 1 or n_phi < 2 * lmax + 1:
        raise FileFormatError(f"{where}: n_theta={n_theta}, n_phi={n_phi} do not fit lmax_exact={lmax}")
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n_theta * n_phi, 2):
        raise FileFormatError(f"{where}: expected {n_theta * n_phi} [re, im] pairs")
    grid = make_grid(lmax, n_phi)
    vals = (arr[:, 0] + 1j * arr[:, 1]).reshape(n_theta, n_phi)
    return SphereMap(grid, spin, vals)


def write_map(path, smap):
    _write_text(path, map_to_json(smap))


def _load_json(path):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: invalid JSON ({exc.msg})") from exc


def read_map(path):
    return map_from_obj(_load_json(path), str(path))


def write_map_set(path, maps, extra=None):
    """JSON object {schema_version, ..., maps: {name: map}} with ordered names."""
    parts = [f'"schema_version":"{SCHEMA_VERSION}"']
    for key, value in (extra or {}).items():
        if isinstance(value, (list, np.ndarray)):
            parts.append(f'"{key}":{_json_floats(value)}')
        elif isinstance(value, float):
            parts.append(f'"{key}":{fmt(value)}')
        else:
            parts.append(f'"{key}":{json.dumps(value)}')
    body = ",".join(f'"{name}":{map_to_json(m)}' for name, m in maps.items())
    _write_text(path, "{" + ",".join(parts) + ',"maps":{' + body + "}}")


def read_map_set(path):
    obj = _load_json(path)
    if "maps" not in obj:
        raise FileFormatError(f"{path}: no 'maps' entry")
    maps = {name: map_from_obj(m, f"{path}:{name}") for name, m in obj["maps"].items()}
    return maps, {k: v for k, v in obj.items() if k != "maps"}


# -- coefficients ------------------------------------------------------------

def coefficients_to_csv(coeffs):
    lines = ["spin,lmax", f"{coeffs.spin},{coeffs.lmax}", "ell,m,re,im"]
    for ell, m, v in coeffs.items():
        lines.append(f"{ell},{m},{fmt(v.real)},{fmt(v.imag)}")
    return "\n".join(lines) + "\n"


def write_coefficients(path, coeffs):
    _write_text(path, coefficients_to_csv(coeffs))


def read_coefficients(path):
    rows = [r for r in csv.reader(_io.StringIO(_read_text(path))) if r]
    if len(rows) < 3 or rows[0] != ["spin", "lmax"] or rows[2] != ["ell", "m", "re", "im"]:
        raise FileFormatError(f"{path}: expected 'spin,lmax' header, its values, then 'ell,m,re,im'")
    if len(rows[1]) != 2:
        raise FileFormatError(f"{path}: malformed spin,lmax row")
    spin = _parse_int(rows[1][0], path)
    lmax = _parse_int(rows[1][1], path)
    if lmax < 0:
        raise FileFormatError(f"{path}: negative lmax")
    out = HarmonicCoefficients.zeros(spin, lmax)
    for n, row in enumerate(rows[3:], start=4):
        if len(row) != 4:
            raise FileFormatError(f"{path}:{n}: expected 4 fields")
        ell, m = _parse_int(row[0], f"{path}:{n}"), _parse_int(row[1], f"{path}:{n}")
        if not (abs(spin) <= ell <= lmax and abs(m) <= ell):
            raise FileFormatError(f"{path}:{n}: (ell, m) = ({ell}, {m}) outside the declared range")
        out.a[ell, m + lmax] = complex(_parse_float(row[2], f"{path}:{n}"), _parse_float(row[3], f"{path}:{n}"))
    return out


# -- spectra -----------------------------------------------------------------

def write_spectrum(path, spec):
    lines = ["ell,comp_i,comp_j,value"]
    names = spec.component_names
    for ell in range(spec.lmax + 1):
        for i, a in enumerate(names):
            for j in range(i, len(names)):
                lines.append(f"{ell},{a},{names[j]},{fmt(spec.matrices[ell, i, j])}")
    _write_text(path, "\n".join(lines) + "\n")


def read_spectrum(path, allow_parity_mixing=False):
    rows = [r for r in csv.reader(_io.StringIO(_read_text(path))) if r]
    if not rows or [c.strip() for c in rows[0]] != ["ell", "comp_i", "comp_j", "value"]:
        raise FileFormatError(f"{path}: expected header 'ell,comp_i,comp_j,value'")
    entries = []
    names = []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise FileFormatError(f"{path}:{n}: expected 4 fields")
        ell = _parse_int(row[0], f"{path}:{n}")
        if ell < 0:
            raise FileFormatError(f"{path}:{n}: negative ell")
        a, b = row[1].strip(), row[2].strip()
        for name in (a, b):
            if name not in names:
                names.append(name)
        entries.append((ell, a, b, _parse_float(row[3], f"{path}:{n}")))
    if not entries:
        raise FileFormatError(f"{path}: no spectrum rows")
    lmax = max(e[0] for e in entries)
    mats = np.zeros((lmax + 1, len(names), len(names)))
    for ell, a, b, v in entries:
        i, j = names.index(a), names.index(b)
        if (mats[ell, i, j] != 0 and mats[ell, i, j] != v):
            raise FileFormatError(f"{path}: conflicting values for ({ell}, {a}, {b})")
        mats[ell, i, j] = mats[ell, j, i] = v
    return PowerSpectrumSet(names, mats, allow_parity_mixing=allow_parity_mixing)


# -- radial ------------------------------------------------------------------

def write_radial_grid(path, grid):
    _write_text(path, f'{{"schema_version":"{SCHEMA_VERSION}","R":{fmt(grid.R)},'
                      f'"nodes":{_json_floats(grid.nodes)},"weights":{_json_floats(grid.weights)}}}')


def read_radial_grid(path):
    obj = _load_json(path)
    try:
        return RadialGrid(float(obj["R"]), np.asarray(obj["nodes"], float), np.asarray(obj["weights"], float))
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed radial grid ({exc})") from exc


def _read_indexed(path, header, n):
    rows = [r for r in csv.reader(_io.StringIO(_read_text(path))) if r]
    if not rows or [c.strip() for c in rows[0]] != header:
        raise FileFormatError(f"{path}: expected header {','.join(header)!r}")
    out = []
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise FileFormatError(f"{path}:{k}: expected 4 fields")
        a, b, c = (_parse_int(x, f"{path}:{k}") for x in row[:3])
        if min(a, b, c) < 0:
            raise FileFormatError(f"{path}:{k}: negative index")
        out.append((a, b, c, _parse_float(row[3], f"{path}:{k}")))
    return out


def write_radial_covariance(path, cov):
    lines = ["ell,i,j,value"]
    for ell in range(cov.lmax + 1):
        for i in range(cov.grid.size):
            for j in range(cov.grid.size):
                v = cov.matrices[ell, i, j]
                if v != 0:
                    lines.append(f"{ell},{i},{j},{fmt(v)}")
    _write_text(path, "\n".join(lines) + "\n")


def read_radial_covariance(path, grid, spin=0, lmax=None):
    rows = _read_indexed(path, ["ell", "i", "j", "value"], grid.size)
    top = max((r[0] for r in rows), default=0) if lmax is None else lmax
    mats = np.zeros((top + 1, grid.size, grid.size))
    for ell, i, j, v in rows:
        if ell > top or i >= grid.size or j >= grid.size:
            raise FileFormatError(f"{path}: index ({ell}, {i}, {j}) outside the grid")
        mats[ell, i, j] = v
    # a file may list only one triangle
    for ell in range(top + 1):
        M = mats[ell]
        upper, lower = np.triu(M, 1), np.tril(M, -1).T
        only_upper = (upper != 0) & (lower == 0)
        only_lower = (lower != 0) & (upper == 0)
        M += np.where(only_upper, upper, 0).T + np.where(only_lower, lower, 0)
    return RadialCovariance(spin, grid, mats)


def write_frame(path, frame):
    lines = ["ell,j,i,value"]
    for ell, F in enumerate(frame.functions):
        for j in range(F.shape[0]):
            for i in range(F.shape[1]):
                lines.append(f"{ell},{j},{i},{fmt(F[j, i])}")
    _write_text(path, "\n".join(lines) + "\n")


def read_frame(path, grid, spin=0):
    rows = _read_indexed(path, ["ell", "j", "i", "value"], grid.size)
    lmax = max((r[0] for r in rows), default=0)
    counts = [0] * (lmax + 1)
    for ell, j, i, _ in rows:
        if i >= grid.size:
            raise FileFormatError(f"{path}: node index {i} outside the grid")
        counts[ell] = max(counts[ell], j + 1)
    functions = [np.zeros((c, grid.size)) for c in counts]
    for ell, j, i, v in rows:
        functions[ell][j, i] = v
    return RadialFrame(spin, grid, functions)
