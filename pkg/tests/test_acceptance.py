"""Acceptance criteria 1-12, each at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line; the lines are also
collected into a summary section at the end of the pytest run.
"""

import math

import numpy as np
import sympy as sp

from conftest import ACCEPTANCE_LINES
from spinbundle import io
from spinbundle.cli import run
from spinbundle.harmonics import spin_ylm_all
from spinbundle.ladder import DISTORTIONS, distortion_multipliers, eth_lower, eth_raise
from spinbundle.radial import (RadialCovariance, bessel_zero_kgrid, build_frame,
                               fourier_bessel_forward, fourier_bessel_inverse, make_radial_grid,
                               sample_ball_coefficients, spherical_jn)
from spinbundle.randomfield import (PowerSpectrumSet, eb_to_qu, estimate_power_spectrum, qu_to_eb,
                                    sample_coefficients, sample_stokes_bundle)
from spinbundle.reptheory import (RepDecomposition, character, class_function, decompose,
                                  induced_decomposition, induced_multiplicity, o2, o3,
                                  restrict_by_character, restrict_o3_to_o2, so2, so3, tensor_o2)
from spinbundle.transform import (HarmonicCoefficients, SphereMap, analyze, inner_product, make_grid,
                                  real_coefficients, synthesize, synthesize_points,
                                  synthesize_real_harmonics)


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append((number, line))
    assert ok, line


def random_coeffs(spin, lmax, rng):
    c = HarmonicCoefficients.zeros(spin, lmax)
    mask = c.mask()
    c.a[mask] = rng.standard_normal(mask.sum()) + 1j * rng.standard_normal(mask.sum())
    return c


def test_01_sht_round_trip():
    rng = np.random.default_rng(1)
    grid = make_grid(32)
    worst = 0.0
    for s in range(-3, 4):
        for _ in range(20):
            c = random_coeffs(s, 32, rng)
            back = analyze(synthesize(c, grid), real=False)
            worst = max(worst, float(np.max(np.abs(back.a - c.a))))
    report(1, "SHT round trip, spins -3..3, lmax 32, 20 sets each", worst <= 1e-10,
           f"max abs error {worst:.2e} <= 1e-10")


def test_02_orthonormality():
    grid = make_grid(16)
    th, ph = grid.points()
    w = grid.pixel_weights.ravel()
    worst = 0.0
    for s in range(-3, 4):
        Y = spin_ylm_all(s, 16, th, ph)
        rows = np.array([Y[l, m + 16] for l in range(abs(s), 17) for m in range(-l, l + 1)])
        gram = (rows * w) @ rows.conj().T
        worst = max(worst, float(np.max(np.abs(gram - np.eye(len(rows))))))
    report(2, "quadrature Gram matrix of sY_lm, l <= 16, |s| <= 3", worst <= 1e-10,
           f"max deviation from identity {worst:.2e} <= 1e-10")


def test_03_parity_law():
    rng = np.random.default_rng(3)
    th, ph = rng.uniform(0, math.pi, 100), rng.uniform(0, 2 * math.pi, 100)
    sign = (-1.0) ** np.arange(17)[:, None, None]
    worst = 0.0
    for s in range(-3, 4):
        lhs = spin_ylm_all(s, 16, math.pi - th, ph + math.pi)
        rhs = sign * spin_ylm_all(-s, 16, th, ph)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    report(3, "parity law sY(pi - theta, phi + pi) = (-1)^l (-s)Y at 100 angles, l <= 16",
           worst <= 1e-12, f"max error {worst:.2e} <= 1e-12")


def test_04_reality():
    grid = make_grid(32)
    spec = PowerSpectrumSet.scalar(1.0 / (1.0 + np.arange(33)))
    worst_im, worst_diff = 0.0, 0.0
    for seed in range(5):
        c = sample_coefficients(spec, seed, real=True)["T"]
        complex_map = synthesize(c, grid).values
        worst_im = max(worst_im, float(np.max(np.abs(complex_map.imag))))
        via_real = synthesize_real_harmonics(real_coefficients(c), grid)
        worst_diff = max(worst_diff, float(np.max(np.abs(via_real - complex_map.real))))
    ok = worst_im <= 1e-12 and worst_diff <= 1e-12
    report(4, "real-field synthesis and real-harmonic form", ok,
           f"max |Im| {worst_im:.2e}, real-harmonic vs complex {worst_diff:.2e}, both <= 1e-12")


def test_05_eb_consistency():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(10):
        e, b = random_coeffs(0, 16, rng), random_coeffs(0, 16, rng)
        e.a[:2] = 0
        b.a[:2] = 0
        e2, b2 = qu_to_eb(*eb_to_qu(e, b))
        worst = max(worst, float(np.max(np.abs(e2.a - e.a))), float(np.max(np.abs(b2.a - b.a))))
    mats = np.zeros((17, 1, 1))
    mats[2:, 0, 0] = 1.0
    grid = make_grid(16)
    maps, _ = sample_stokes_bundle(PowerSpectrumSet(["B"], mats), grid, seed=11)
    qu = maps["Q"].values + 1j * maps["U"].values
    e, b = qu_to_eb(analyze(SphereMap(grid, 2, qu)), analyze(SphereMap(grid, -2, np.conj(qu))))
    e_inf = float(np.max(np.abs(e.a)))
    ok = worst <= 1e-14 and e_inf <= 1e-10 and np.max(np.abs(b.a)) > 0
    report(5, "E/B round trip and pure-B simulation", ok,
           f"round trip {worst:.2e} <= 1e-14, |e|_inf of pure B {e_inf:.2e} <= 1e-10")


def test_06_ladder_operators():
    rng = np.random.default_rng(6)
    theta = rng.uniform(0.2, math.pi - 0.2, 60)
    phi = rng.uniform(0, 2 * math.pi, 60)
    h = 1e-5
    worst_fd = 0.0
    for s in range(-2, 3):
        c = random_coeffs(s, 12, rng)
        f = lambda t, p: synthesize_points(c, t, p)
        dth = (f(theta + h, phi) - f(theta - h, phi)) / (2 * h)
        dph = (f(theta, phi + h) - f(theta, phi - h)) / (2 * h)
        fd = s / np.tan(theta) * f(theta, phi) - dth - 1j / np.sin(theta) * dph
        spectral = synthesize_points(eth_raise(c), theta, phi)
        worst_fd = max(worst_fd, float(np.max(np.abs(spectral - fd)) / np.max(np.abs(spectral))))
    grid = make_grid(12)
    worst_adj = 0.0
    for s in range(-3, 3):
        f, g = random_coeffs(s, 12, rng), random_coeffs(s + 1, 12, rng)
        lhs = inner_product(synthesize(eth_raise(f), grid), synthesize(g, grid))
        rhs = inner_product(synthesize(f, grid), synthesize(eth_lower(g), grid))
        worst_adj = max(worst_adj, float(abs(lhs - rhs) / abs(lhs)))
    ok = worst_fd <= 1e-3 and worst_adj <= 1e-10
    report(6, "spectral eth vs finite differences, adjointness", ok,
           f"FD relative error {worst_fd:.2e} <= 1e-3, adjointness {worst_adj:.2e} <= 1e-10")


def _symbolic(name, ell):
    pre, chains, _ = DISTORTIONS[name]
    total = sp.Integer(0)
    for ops in chains:
        s, term = 0, sp.Integer(1)
        for op in reversed(ops):
            if ell < abs(s):
                term = sp.Integer(0)
                break
            term *= sp.sqrt((ell - s) * (ell + s + 1)) if op == "R" else sp.sqrt((ell + s) * (ell - s + 1))
            s += 1 if op == "R" else -1
        total += term if ell >= abs(s) else 0
    return sp.nsimplify(pre) * total


def test_07_distortion_multipliers():
    worst = 0.0
    for ell in range(65):
        m = distortion_multipliers(ell)
        for name in DISTORTIONS:
            exact = float(sp.N(_symbolic(name, ell), 30))
            got = getattr(m, name)
            err = abs(got - exact) / abs(exact) if exact else abs(got)
            worst = max(worst, err)
    m2 = distortion_multipliers(2)
    exact_ok = (m2.kappa == 3.0 and abs(m2.shear - 0.5 * math.sqrt(24)) <= 1e-13 * m2.shear
                and m2.flexion3 == 0.0)
    report(7, "distortion multipliers vs symbolic composition, l <= 64", worst <= 1e-13 and exact_ok,
           f"max relative error {worst:.2e} <= 1e-13; kappa(2)={m2.kappa!r}, "
           f"shear(2)={m2.shear!r}, flexion3(2)={m2.flexion3!r}")


def _restriction_formula(ell, sign):
    flip = {"+": "-", "-": "+"}
    zero = sign if ell % 2 == 0 else flip[sign]
    return RepDecomposition([o2(0, zero)] + [o2(k) for k in range(1, ell + 1)])


def test_08_representation_calculus():
    problems = []
    for ell in range(21):
        for sign in "+-":
            V = o3(ell, sign)
            expected = _restriction_formula(ell, sign)
            if restrict_o3_to_o2(V) != expected or restrict_by_character(V) != expected:
                problems.append(f"restriction of {V}")
    rng = np.random.default_rng(8)
    worst = 0.0
    o2_pairs = [(o2(1), o2(2)), (o2(0, "-"), o2(3)), (o2(2), o2(2))]
    o3_pairs = [(o3(1, "-"), o3(2, "+")), (o3(2, "-"), o3(2, "-"))]
    for _ in range(32):
        phi, refl = rng.uniform(0, 2 * math.pi), bool(rng.integers(0, 2))
        for A, B in o2_pairs:
            prod = tensor_o2(A, B)
            lhs = sum(n * character(L, (phi, refl)) for L, n in prod.counts.items())
            worst = max(worst, abs(lhs - character(A, (phi, refl)) * character(B, (phi, refl))))
        omega, eps = rng.uniform(0, math.pi), int(rng.choice([-1, 1]))
        for A, B in o3_pairs:
            prod = decompose(class_function(A) * class_function(B))
            lhs = sum(n * character(L, (omega, eps)) for L, n in prod.counts.items())
            worst = max(worst, abs(lhs - character(A, (omega, eps)) * character(B, (omega, eps))))
    if worst > 1e-12:
        problems.append(f"multiplicativity {worst:.2e}")
    multiplicities = []
    for s in range(-3, 4):
        for ell in range(12):
            n = induced_multiplicity(so3(ell), so2(-s), "complex")
            multiplicities.append(n)
            if n != (1 if ell >= abs(s) else 0):
                problems.append(f"H_{s} at l={ell}")
    for V, n in induced_decomposition(o2(2), "real", 12):
        multiplicities.append(n)
        if n != (1 if V.degree >= 2 else 0):
            problems.append(f"H_2 at {V}")
    if any(n.denominator != 1 for n in multiplicities):
        problems.append("non-integral multiplicity")
    report(8, "restriction formula, character multiplicativity, induced multiplicities", not problems,
           f"{len(problems)} problems{': ' + ', '.join(problems[:3]) if problems else ''}; "
           f"multiplicativity error {worst:.2e} <= 1e-12")


def test_09_spectrum_estimation():
    lmax, nseeds = 16, 500
    ells = np.arange(lmax + 1)
    cI = 1.0 / (1.0 + ells)
    cE = np.where(ells >= 2, 0.5 / (1.0 + ells), 0.0)
    rho = 0.6
    mats = np.zeros((lmax + 1, 2, 2))
    mats[:, 0, 0], mats[:, 1, 1] = cI, cE
    mats[:, 0, 1] = mats[:, 1, 0] = rho * np.sqrt(cI * cE)
    spec = PowerSpectrumSet(["I", "E"], mats)
    est = np.array([estimate_power_spectrum(sample_coefficients(spec, seed).coefficients).matrices
                    for seed in range(nseeds)])
    mean, se = est.mean(axis=0), est.std(axis=0, ddof=1) / math.sqrt(nseeds)
    z_auto = np.abs(mean[:, 0, 0] - cI) / se[:, 0, 0]
    active = ells >= 2
    z_cross = np.abs(mean[active, 0, 1] - mats[active, 0, 1]) / se[active, 0, 1]
    ok = np.all(z_auto <= 3) and np.all(z_cross <= 3)
    report(9, "500-seed spectrum estimation at lmax 16, with an I-E cross spectrum", bool(ok),
           f"max |mean - C_l| / SE: auto {z_auto.max():.2f}, cross {z_cross.max():.2f}, both <= 3")


def test_10_radial_frames():
    rng = np.random.default_rng(10)
    g = make_radial_grid(1.0, 6)
    mats = []
    for ell in range(5):
        A = rng.standard_normal((4 + ell % 3, 6))
        mats.append(A.T @ A / 6)
    mats = np.stack(mats)
    frame = build_frame(RadialCovariance(0, g, mats))
    recon = max(float(np.linalg.norm(frame.covariance(l) - mats[l]) / np.linalg.norm(mats[l]))
                for l in range(5))
    lmax = 4
    a = np.array([sample_ball_coefficients(frame, seed) for seed in range(1000)])
    worst_cov = 0.0
    for ell, m in [(0, 0), (1, 1), (3, -2), (4, 4)]:
        x = a[:, :, ell, m + lmax]
        prod = (x[:, :, None] * np.conj(x[:, None, :])).real
        z = np.abs(prod.mean(axis=0) - mats[ell]) / (prod.std(axis=0, ddof=1) / math.sqrt(len(x)))
        worst_cov = max(worst_cov, float(z.max()))
    worst_corr = 0.0
    for (l1, m1), (l2, m2) in [((2, 1), (2, -1)), ((1, 0), (3, 0)), ((0, 0), (4, 2)), ((2, 2), (3, 2))]:
        prod = a[:, 2, l1, m1 + lmax] * np.conj(a[:, 3, l2, m2 + lmax])
        z = abs(prod.mean()) / math.sqrt(np.mean(np.abs(prod) ** 2) / len(prod))
        worst_corr = max(worst_corr, float(z))
    ok = recon <= 1e-8 and worst_cov <= 5 and worst_corr <= 5
    report(10, "frame reconstruction and 1000-seed ball covariance", ok,
           f"reconstruction {recon:.2e} <= 1e-8, covariance z {worst_cov:.2f} <= 5, "
           f"cross-(l,m) z {worst_corr:.2f} <= 5")


def test_11_fourier_bessel():
    R = 1.0
    k = np.linspace(0.2, 25, 80)
    closed = math.sqrt(2 / math.pi) * (np.sin(k * R) - k * R * np.cos(k * R)) / k**3
    within = True
    worst_ratio = 0.0
    for n in (8, 16, 32):
        g = make_radial_grid(R, n)
        err = np.abs(fourier_bessel_forward(np.ones(n), 0, k, g) - closed)
        bound = g.bessel_error_bound(k)
        within &= bool(np.all(err <= bound))
        worst_ratio = max(worst_ratio, float(np.max(err / bound)))
    ell = 2
    kg = bessel_zero_kgrid(ell, R, 8)
    c = np.random.default_rng(11).standard_normal(8)
    errors = []
    for n in (12, 16, 20):
        g = make_radial_grid(R, n)
        a = spherical_jn(ell, np.outer(g.nodes, kg.nodes)) @ c
        back = fourier_bessel_inverse(fourier_bessel_forward(a, ell, kg, g), ell, g, kg)
        errors.append(float(np.max(np.abs(back - a))))
    monotone = errors[0] > errors[1] > errors[2]
    report(11, "Fourier-Bessel closed-form pair and refinement", within and monotone,
           f"closed form error / bound <= {worst_ratio:.2f}; round-trip errors "
           f"{', '.join(f'{e:.1e}' for e in errors)} at n = 12, 16, 20")


def test_12_determinism(tmp_path):
    spec = tmp_path / "spec.csv"
    spec.write_text("ell,comp_i,comp_j,value\n" + "".join(
        f"{l},I,I,{1 / (1 + l)!r}\n{l},E,E,{0.5 / (1 + l) if l >= 2 else 0.0!r}\n"
        f"{l},I,E,{0.3 / (1 + l) if l >= 2 else 0.0!r}\n{l},B,B,{0.1 if l >= 2 else 0.0!r}\n"
        for l in range(13)))
    rng = np.random.default_rng(12)
    g = make_radial_grid(1.0, 6)
    mats = []
    for _ in range(9):
        A = rng.standard_normal((6, 6))
        mats.append(A.T @ A)
    io.write_radial_grid(tmp_path / "grid.json", g)
    io.write_radial_covariance(tmp_path / "cov.csv", RadialCovariance(0, g, np.stack(mats)))
    assert run(["frame", "--covariance", str(tmp_path / "cov.csv"), "--grid", str(tmp_path / "grid.json"),
                "--out", str(tmp_path / "frame.csv")]) == 0
    same = {}
    for cmd, argv in [("synth", ["synth", "--lmax", "12", "--spectrum", str(spec), "--seed", "2024"]),
                      ("ball-synth", ["ball-synth", "--frame", str(tmp_path / "frame.csv"),
                                      "--grid", str(tmp_path / "grid.json"), "--seed", "2024"])]:
        outputs = []
        for threads in ("1", "8"):
            out = tmp_path / f"{cmd}-{threads}.json"
            assert run(argv + ["--threads", threads, "--out", str(out)]) == 0
            outputs.append(out.read_bytes())
        same[cmd] = outputs[0] == outputs[1]
    report(12, "byte-identical synth / ball-synth output for 1 and 8 threads", all(same.values()),
           ", ".join(f"{k}: {'identical' if v else 'DIFFERENT'}" for k, v in same.items()))
