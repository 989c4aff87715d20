"""Command-line interface: ``spinbundle <subcommand> ...``.

Exit codes: 0 success, 2 invalid arguments, 3 file format, 4 numerical
contract violation (non-PSD input, band limit, rank deficiency).
"""

import argparse
import os
import sys

import numpy as np

from . import io, ladder, radial, randomfield, reptheory, transform
from .errors import (BandLimitExceeded, CovarianceInvalid, FileFormatError, GroupPairUnsupported,
                     InvalidArgument, InvalidLabel, RankDeficient, SpectrumInvalid)

EXIT_ARGS, EXIT_FORMAT, EXIT_NUMERIC = 2, 3, 4


class UsageError(Exception):
    pass


def _existing(path):
    if not os.path.isfile(path):
        raise UsageError(f"input file not found: {path}")
    return path


def _writable(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise UsageError(f"output directory does not exist: {parent}")
    return path


def _seed(args):
    if args.seed is None:
        raise UsageError("--seed is required for sampling commands")
    return args.seed


def _fit_spectrum(spec, lmax):
    """Truncate or zero-pad a spectrum set to lmax."""
    n = len(spec.component_names)
    mats = np.zeros((lmax + 1, n, n))
    top = min(lmax, spec.lmax)
    mats[: top + 1] = spec.matrices[: top + 1]
    return randomfield.PowerSpectrumSet(spec.component_names, mats,
                                        allow_parity_mixing=spec.allow_parity_mixing)


# -- subcommands ------------------------------------------------------------

def cmd_synth(args):
    _existing(args.spectrum)
    _writable(args.out)
    seed = _seed(args)
    spec = _fit_spectrum(io.read_spectrum(args.spectrum, args.allow_parity_mixing), args.lmax)
    grid = transform.make_grid(args.lmax)
    names = set(spec.component_names)
    if names <= {"E", "B", "V", "I"} and (names & {"E", "B"} or len(names) > 1):
        if args.spin != 0:
            raise UsageError("Stokes bundle synthesis takes no --spin")
        maps, sample = randomfield.sample_stokes_bundle(spec, grid, seed, threads=args.threads)
        io.write_map_set(args.out, maps, {"seed": seed})
        return 0
    if len(spec.component_names) != 1:
        raise UsageError("multi-component spectra must use the Stokes names I, V, E, B")
    real = args.real if args.real is not None else args.spin == 0
    sample = randomfield.sample_coefficients(spec, seed, real=real, spin=args.spin, threads=args.threads)
    coeffs = sample[spec.component_names[0]]
    if real:
        smap = transform.SphereMap(grid, 0, transform.synthesize_real_field(coeffs, grid))
    else:
        smap = transform.synthesize(coeffs, grid)
    io.write_map(args.out, smap)
    if args.coeffs_out:
        io.write_coefficients(_writable(args.coeffs_out), coeffs)
    return 0


def cmd_analyze(args):
    _existing(args.input)
    _writable(args.out)
    if args.component:
        maps, _ = io.read_map_set(args.input)
        if args.component not in maps:
            raise UsageError(f"component {args.component!r} not in {sorted(maps)}")
        smap = maps[args.component]
        if args.spin is not None:
            smap = transform.SphereMap(smap.grid, args.spin, smap.values)
    else:
        smap = io.read_map(args.input)
    coeffs = transform.analyze(smap, lmax=args.lmax, method=args.method)
    io.write_coefficients(args.out, coeffs)
    return 0


def cmd_spectrum(args):
    for p in args.input:
        _existing(p)
    _writable(args.out)
    names = args.names.split(",") if args.names else None
    if names is not None and len(names) != len(args.input):
        raise UsageError("--names needs one name per input file")
    coeffs = [io.read_coefficients(p) for p in args.input]
    spec = randomfield.estimate_power_spectrum(coeffs, names)
    io.write_spectrum(args.out, spec)
    return 0


def cmd_eb(args):
    a, b = _existing(args.inputs[0]), _existing(args.inputs[1])
    out_a, out_b = _writable(args.out[0]), _writable(args.out[1])
    x, y = io.read_coefficients(a), io.read_coefficients(b)
    if args.to == "qu":
        p, m = randomfield.eb_to_qu(x, y)
    else:
        p, m = randomfield.qu_to_eb(x, y)
    io.write_coefficients(out_a, p)
    io.write_coefficients(out_b, m)
    return 0


def cmd_lensing(args):
    _existing(args.input)
    if not os.path.isdir(args.out_dir):
        raise UsageError(f"output directory does not exist: {args.out_dir}")
    phi = io.read_coefficients(args.input)
    for name, coeffs in ladder.distortion_fields(phi).items():
        io.write_coefficients(os.path.join(args.out_dir, f"{args.prefix}{name}.csv"), coeffs)
    return 0


def _label(text, group):
    return reptheory.parse_label(text, group)


def cmd_mult(args):
    group = args.group
    lines = []
    if args.restrict:
        V = _label(args.restrict, group)
        if group == "O3":
            lines.append(f"{V} |_O2 = {reptheory.restrict_o3_to_o2(V)}")
        elif group == "SO3":
            lines.append(f"{V} |_SO2 = {reptheory.restrict_so3_to_so2(V.degree)}")
        else:
            raise UsageError(f"--restrict needs --group SO3 or O3, got {group}")
    if args.tensor:
        A, B = (_label(t, group) for t in args.tensor)
        if group == "O2":
            result = reptheory.tensor_o2(A, B)
        else:
            result = reptheory.decompose(reptheory.class_function(A) * reptheory.class_function(B))
        lines.append(f"{A} x {B} = {result}")
    if args.induced:
        E = _label(args.induced, {"SO3": "SO2", "O3": "O2"}.get(group, group))
        ambient = {"SO2": "SO3", "O2": "O3"}[E.group]
        for V, n in reptheory.induced_decomposition(E, args.field, args.lmax):
            if n:
                lines.append(f"Ind_{E.group}^{ambient}({E}) [{args.field}] contains {V} x {n}")
    if args.type:
        V = _label(args.type, group)
        d = reptheory.division_algebra_type(V, args.field)
        lines.append(f"D({V}) over {args.field} = {d.name}")
    if not lines:
        raise UsageError("mult needs one of --restrict, --tensor, --induced, --type")
    print("\n".join(lines))
    return 0


def cmd_frame(args):
    _existing(args.covariance)
    _existing(args.grid)
    _writable(args.out)
    grid = io.read_radial_grid(args.grid)
    cov = io.read_radial_covariance(args.covariance, grid, spin=args.spin)
    frame = radial.build_frame(cov, rel_threshold=args.threshold)
    io.write_frame(args.out, frame)
    return 0


def cmd_ball_synth(args):
    _existing(args.frame)
    _existing(args.grid)
    _writable(args.out)
    seed = _seed(args)
    rgrid = io.read_radial_grid(args.grid)
    frame = io.read_frame(args.frame, rgrid, spin=args.spin)
    lmax = frame.lmax if args.lmax is None else args.lmax
    if lmax < frame.lmax:
        raise BandLimitExceeded(f"frame reaches ell={frame.lmax} but the sphere grid is exact only to {lmax}")
    sgrid = transform.make_grid(lmax)
    real = None if args.real is None else args.real
    ball = radial.sample_ball_field(frame, sgrid, seed, real=real, threads=args.threads)
    maps = {f"r{i}": m for i, m in enumerate(ball.maps)}
    io.write_map_set(args.out, maps, {"seed": seed, "R": rgrid.R, "nodes": rgrid.nodes})
    return 0


# -- parser -----------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="spinbundle",
                                description="Gaussian random sections of spin and tensor bundles.")
    p.add_argument("--version", action="version", version=io.SCHEMA_VERSION,
                   help="print the file schema version and exit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads (output does not depend on it)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="spectrum CSV -> map JSON")
    s.add_argument("--spectrum", required=True)
    s.add_argument("--lmax", type=int, required=True)
    s.add_argument("--spin", type=int, default=0)
    s.add_argument("--seed", type=int)
    s.add_argument("--real", dest="real", action="store_true", default=None,
                   help="impose the reality constraint (default for spin 0)")
    s.add_argument("--complex", dest="real", action="store_false")
    s.add_argument("--allow-parity-mixing", action="store_true")
    s.add_argument("--coeffs-out", help="also write the sampled coefficients")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("analyze", parents=[common], help="map JSON -> coefficient CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--lmax", type=int)
    s.add_argument("--component", help="map name inside a multi-map file")
    s.add_argument("--spin", type=int, help="spin to assign to a component map")
    s.add_argument("--method", choices=["fft", "direct"], default="fft")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("spectrum", parents=[common], help="coefficient CSVs -> spectrum CSV")
    s.add_argument("--in", dest="input", nargs="+", required=True)
    s.add_argument("--names", help="comma-separated component names, one per input")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("eb", parents=[common], help="convert between (e, b) and (a+2, a-2)")
    s.add_argument("--to", choices=["qu", "eb"], required=True,
                   help="qu: inputs e b -> a+2 a-2; eb: inputs a+2 a-2 -> e b")
    s.add_argument("--in", dest="inputs", nargs=2, required=True)
    s.add_argument("--out", nargs=2, required=True)
    s.set_defaults(func=cmd_eb)

    s = sub.add_parser("lensing", parents=[common], help="potential coefficients -> distortion coefficients")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out-dir", default=".")
    s.add_argument("--prefix", default="")
    s.set_defaults(func=cmd_lensing)

    s = sub.add_parser("mult", parents=[common], help="representation multiplicity queries")
    s.add_argument("--group", choices=reptheory.GROUPS, required=True)
    s.add_argument("--restrict", metavar="LABEL")
    s.add_argument("--tensor", nargs=2, metavar="LABEL")
    s.add_argument("--induced", metavar="LABEL", help="subgroup label E of the bundle")
    s.add_argument("--type", metavar="LABEL", help="division algebra of an irrep")
    s.add_argument("--field", choices=["real", "complex"], default="complex")
    s.add_argument("--lmax", type=int, default=4)
    s.set_defaults(func=cmd_mult)

    s = sub.add_parser("frame", parents=[common], help="radial covariance -> frame CSV")
    s.add_argument("--covariance", required=True)
    s.add_argument("--grid", required=True)
    s.add_argument("--spin", type=int, default=0)
    s.add_argument("--threshold", type=float, default=1e-12)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_frame)

    s = sub.add_parser("ball-synth", parents=[common], help="frame -> shell maps")
    s.add_argument("--frame", required=True)
    s.add_argument("--grid", required=True)
    s.add_argument("--spin", type=int, default=0)
    s.add_argument("--lmax", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--real", dest="real", action="store_true", default=None)
    s.add_argument("--complex", dest="real", action="store_false")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ball_synth)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ARGS
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_ARGS
    try:
        return args.func(args)
    except FileFormatError as exc:
        print(f"file format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (SpectrumInvalid, CovarianceInvalid, BandLimitExceeded, RankDeficient) as exc:
        print(f"numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, InvalidArgument, InvalidLabel, GroupPairUnsupported) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
