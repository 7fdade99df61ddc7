"""Self-check suites: closed forms, frame/Riesz identities, Monte-Carlo recovery.

Four suites back the ``orifield validate`` command.  ``closedform`` checks
the analytic tensor formulas against quadrature and the orientation
transport rules; ``frame`` and ``riesz`` check the wavelet frame and Riesz
operator identities on the lattice; ``montecarlo`` synthesizes fields and
checks that the estimators recover the prescribed parameters, plus
bit-exact reproducibility.  Every check reports a measured value and its
threshold so failures are diagnosable from the report alone.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import monogenic, synth, tensor
from .fields import (
    AFBF,
    FBF,
    GAFBF,
    WAFBF,
    ScalarField,
    affine_conformal_deformation,
    linear_deformation,
    local_orientation,
)
from .spectral import Cone, Isotropic, LinearlyTransformed, axial_distance, wrap_axial

__all__ = ["CheckResult", "SUITES", "run_suite", "suite_names"]

DEG = 180.0 / np.pi


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    comparison: str = "<="
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: {self.value:.6g} "
            f"(need {self.comparison} {self.threshold:.6g}, {self.seconds:.2f}s)"
        )

    def to_json(self) -> dict:
        return asdict(self)


def _check(results, name, value, threshold, comparison="<=", t0=None):
    value = float(value)
    ok = value <= threshold if comparison == "<=" else value >= threshold
    results.append(
        CheckResult(name, bool(ok), value, float(threshold), comparison,
                    0.0 if t0 is None else time.time() - t0)
    )


def _random_invertible(rng, lo=0.5, hi=2.0):
    """Random invertible matrix with singular values in [lo, hi]."""
    th1, th2 = rng.uniform(0, 2 * np.pi, 2)
    s = np.exp(rng.uniform(np.log(lo), np.log(hi), 2))
    r1 = np.array([[np.cos(th1), -np.sin(th1)], [np.sin(th1), np.cos(th1)]])
    r2 = np.array([[np.cos(th2), -np.sin(th2)], [np.sin(th2), np.cos(th2)]])
    return r1 @ np.diag(s) @ r2


# ---------------------------------------------------------------------------
# closed-form tensor and deformation suite


def tensor_checks(seeds: int = 10) -> list[CheckResult]:
    """Closed-form structure tensors against quadrature."""
    rng = np.random.default_rng(20240801)
    out: list[CheckResult] = []

    t0 = time.time()
    iso = tensor.structure_tensor_quadrature(Isotropic())
    err = np.abs(iso.as_array() - 0.5 * np.eye(2)).max()
    _check(out, "isotropic tensor == I/2", err, 1e-12, t0=t0)

    t0 = time.time()
    worst = 0.0
    for _ in range(50):
        a0 = rng.uniform(-np.pi / 2, np.pi / 2)
        d = rng.uniform(0.01, 1.2)
        quad = tensor.structure_tensor_quadrature(Cone(a0, d), nodes=4096)
        closed = tensor.afbf_tensor_closed(a0, d)
        worst = max(worst, np.abs(quad.as_array() - closed.as_array()).max())
    _check(out, "cone quadrature vs closed form (50 random)", worst, 1e-8, t0=t0)

    t0 = time.time()
    worst = 0.0
    for _ in range(50):
        a0 = rng.uniform(-np.pi / 2, np.pi / 2)
        d = rng.uniform(0.01, 1.2)
        coh = tensor.orientation_of(tensor.afbf_tensor_closed(a0, d)).coherency
        worst = max(worst, abs(coh - np.sin(2 * d) / (2 * d)))
    _check(out, "cone coherency == sin(2d)/(2d)", worst, 1e-10, t0=t0)

    t0 = time.time()
    o = tensor.orientation_of(tensor.sum_afbf_tensor_closed(np.pi / 6, np.pi / 3, 0.05))
    _check(out, "two-cone orientation at half angle", abs(o.angle - np.pi / 4), 1e-10, t0=t0)

    t0 = time.time()
    worst = 0.0
    for _ in range(100):
        a0 = rng.uniform(-np.pi / 2, np.pi / 2)
        a1 = a0 + rng.uniform(-np.pi / 2, np.pi / 2) * 0.9
        gap = axial_distance(a0, a1)
        if gap < 0.02:
            continue
        d = rng.uniform(0.005, min(0.49 * gap, 1.0))
        coh = tensor.orientation_of(tensor.sum_afbf_tensor_closed(a0, a1, d)).coherency
        target = tensor.sinc2(d) * abs(np.cos(a0 - a1))
        worst = max(worst, abs(coh - target))
    _check(out, "two-cone coherency == sinc(2d)cos(a0-a1)", worst, 1e-10, t0=t0)
    return out


def deformation_checks(seeds: int = 10) -> list[CheckResult]:
    """Orientation transport under invertible linear deformations."""
    rng = np.random.default_rng(20240802)
    out: list[CheckResult] = []

    # orientation transport: the three special deformations
    t0 = time.time()
    worst = 0.0
    for _ in range(50):
        a0 = rng.uniform(-np.pi / 2, np.pi / 2)
        th = rng.uniform(0, 2 * np.pi)
        n = np.array([np.cos(a0), np.sin(a0)])
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        got = tensor.deformed_orientation(n, rot)
        want = np.array([np.cos(a0 + th), np.sin(a0 + th)])
        worst = max(worst, np.abs(got - want).max())
        refl = np.array([[np.cos(th), np.sin(th)], [np.sin(th), -np.cos(th)]])
        got = tensor.deformed_orientation(n, refl)
        want = np.array([np.cos(th - a0), np.sin(th - a0)])
        worst = max(worst, np.abs(got - want).max())
        lam = np.exp(rng.uniform(-1, 1, 2))
        got = tensor.deformed_orientation(n, np.diag(lam))
        want = np.array([n[0] / lam[0], n[1] / lam[1]])
        want /= np.hypot(*want)
        worst = max(worst, np.abs(got - want).max())
    _check(out, "transport matches rotation/reflection/diagonal rules", worst, 1e-12, t0=t0)

    t0 = time.time()
    worst = 0.0
    delta = 0.02
    for _ in range(20):
        a0 = rng.uniform(-np.pi / 2, np.pi / 2)
        mat = _random_invertible(rng)
        n = np.array([np.cos(a0), np.sin(a0)])
        predicted = tensor.deformed_orientation(n, mat)
        spec = LinearlyTransformed(Cone(a0, delta), 0.5, mat)
        o = tensor.orientation_of(tensor.structure_tensor_quadrature(spec, nodes=8192))
        ang_err = axial_distance(o.angle, np.arctan2(predicted[1], predicted[0]))
        worst = max(worst, ang_err)
    _check(out, "deformed-cone quadrature vs transported vector [rad]",
           worst, 5 * delta**2, t0=t0)

    # stepwise transport through the SVD factors equals one shot
    t0 = time.time()
    worst = 0.0
    for _ in range(100):
        mat = _random_invertible(rng)
        a0 = rng.uniform(-np.pi / 2, np.pi / 2)
        n = np.array([np.cos(a0), np.sin(a0)])
        u, s, vt = np.linalg.svd(mat)
        step = tensor.deformed_orientation(n, vt)
        step = tensor.deformed_orientation(step, np.diag(s))
        step = tensor.deformed_orientation(step, u)
        worst = max(worst, np.abs(step - tensor.deformed_orientation(n, mat)).max())
    _check(out, "SVD-factor composition of transport", worst, 1e-12, t0=t0)
    return out


def conformal_checks(seeds: int = 10) -> list[CheckResult]:
    """The conformal warp family: Jacobian and prescribed orientation."""
    rng = np.random.default_rng(20240803)
    out: list[CheckResult] = []
    t0 = time.time()
    a, b, c = 2.0, -1.0, 0.0
    phi = affine_conformal_deformation(a, b, c)
    pts = rng.uniform(-1, 1, size=(1000, 2))
    jac = phi.jacobian(pts)
    step = 1e-6
    e1 = np.array([step, 0.0])
    e2 = np.array([0.0, step])
    fd1 = (phi.map(pts + e1) - phi.map(pts - e1)) / (2 * step)
    fd2 = (phi.map(pts + e2) - phi.map(pts - e2)) / (2 * step)
    fd = np.stack([fd1, fd2], axis=-1)
    rel = np.abs(jac - fd).max(axis=(1, 2)) / np.abs(jac).max(axis=(1, 2))
    _check(out, "conformal Jacobian vs central differences (1000 pts)",
           rel.max(), 1e-5, t0=t0)

    t0 = time.time()
    angles = a * pts[:, 0] + b * pts[:, 1] + c
    v = np.einsum("nji,j->ni", jac, np.array([1.0, 0.0]))  # DPhi^T e1
    v /= np.hypot(v[:, 0], v[:, 1])[:, None]
    want = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    _check(out, "DPhi^T e1 direction == (cos a, sin a)",
           np.abs(v - want).max(), 1e-10, t0=t0)

    t0 = time.time()
    model = WAFBF(phi, AFBF(0.5, 0.0, 0.3))
    worst = 0.0
    for p in rng.uniform(-1, 1, size=(20, 2)):
        o = local_orientation(model, p)
        want = wrap_axial(a * p[0] + b * p[1] + c)
        worst = max(worst, axial_distance(o.angle, want))
    _check(out, "conformal warp local orientation == angle field [rad]",
           worst, 1e-10, t0=t0)

    return out


def run_closedform(seeds: int = 10) -> list[CheckResult]:
    return tensor_checks(seeds) + deformation_checks(seeds) + conformal_checks(seeds)


# ---------------------------------------------------------------------------
# frame suite


def run_frame(seeds: int = 10) -> list[CheckResult]:
    out: list[CheckResult] = []
    for kind in ("simoncelli", "meyer"):
        t0 = time.time()
        defect = monogenic.partition_defect(monogenic.radial_profile(kind))
        _check(out, f"{kind} partition of unity defect", defect, 1e-12, t0=t0)

    rng = np.random.default_rng(7)
    for kind in ("simoncelli", "meyer"):
        t0 = time.time()
        img = rng.standard_normal((256, 256))
        pyr = monogenic.wavelet_pyramid(img, range(0, monogenic.max_scale(256) + 1), kind)
        total = sum(np.sum(c * c) for c, _, _ in pyr.channels.values())
        spec = np.abs(np.fft.fft2(img)) ** 2
        band_energy = np.sum(spec * pyr.band_mask) / img.size
        rel = abs(total - band_energy) / band_energy
        _check(out, f"{kind} pyramid energy vs bandpassed energy", rel, 1e-8, t0=t0)

    # a pure radial tone lands in exactly one scale
    t0 = time.time()
    n = 256
    f = 2 * np.pi * np.fft.fftfreq(n)
    g1, g2 = np.meshgrid(f, f, indexing="ij")
    lam = np.hypot(g1, g2)
    target = (np.abs(lam - np.pi / 2 * 0.9) < 0.05) & (lam > 0)
    spec = np.where(target, 1.0, 0.0) + 0j
    spec = spec + np.conj(spec[np.ix_((-np.arange(n)) % n, (-np.arange(n)) % n)])
    img = np.fft.ifft2(spec).real
    pyr = monogenic.wavelet_pyramid(img, [0, 1, 2, 3], "simoncelli")
    energies = {s: float(np.sum(c * c)) for s, (c, _, _) in pyr.channels.items()}
    leak = sum(v for s, v in energies.items() if s not in (0, 1)) / sum(energies.values())
    _check(out, "band isolation: off-band energy fraction", leak, 1e-10, t0=t0)
    return out


# ---------------------------------------------------------------------------
# riesz suite


def _degenerate_free_image(rng, n):
    """Random mean-zero image with no energy on the DC/Nyquist lattice lines.

    The Riesz multipliers vanish identically on those lines (no sign is
    representable there), so images supported away from them see the exact
    unitary operator.
    """
    img = rng.standard_normal((n, n))
    spec = np.fft.fft2(img)
    spec[0, 0] = 0.0
    spec[n // 2, :] = 0.0
    spec[:, n // 2] = 0.0
    return np.fft.ifft2(spec).real


def run_riesz(seeds: int = 10) -> list[CheckResult]:
    out: list[CheckResult] = []
    rng = np.random.default_rng(11)

    t0 = time.time()
    worst = 0.0
    for _ in range(20):
        img = _degenerate_free_image(rng, 256)
        r1, r2 = monogenic.riesz_transform(img)
        lhs = np.sum(r1 * r1) + np.sum(r2 * r2)
        rhs = np.sum(img * img)
        worst = max(worst, abs(lhs - rhs) / rhs)
    _check(out, "Riesz unitarity on 20 random mean-zero images", worst, 1e-10, t0=t0)

    t0 = time.time()
    img = _degenerate_free_image(rng, 128)
    r1, r2 = monogenic.riesz_transform(img)
    worst = 0.0
    for k in (1, 2, 3):
        theta = k * np.pi / 2
        rot = lambda a: np.rot90(a, k)
        rr1, rr2 = monogenic.riesz_transform(rot(img))
        steered1 = np.cos(theta) * rr1 + np.sin(theta) * rr2
        steered2 = -np.sin(theta) * rr1 + np.cos(theta) * rr2
        scale = np.abs(r1).max()
        worst = max(worst, np.abs(rot(r1) - steered1).max() / scale)
        worst = max(worst, np.abs(rot(r2) - steered2).max() / scale)
    _check(out, "steerability at 90-degree multiples", worst, 1e-10, t0=t0)

    t0 = time.time()
    img = rng.standard_normal((64, 64))
    r1, r2 = monogenic.riesz_transform(img)
    s1, s2 = monogenic.riesz_transform(np.roll(img, (5, -3), axis=(0, 1)))
    worst = max(
        np.abs(np.roll(r1, (5, -3), axis=(0, 1)) - s1).max(),
        np.abs(np.roll(r2, (5, -3), axis=(0, 1)) - s2).max(),
    ) / np.abs(r1).max()
    _check(out, "translation commutation", worst, 1e-12, t0=t0)

    t0 = time.time()
    img = rng.standard_normal((64, 64))
    amp, phase, orient, mask = monogenic.monogenic_components(img)
    r1, r2 = monogenic.riesz_transform(img)
    ident = np.abs(amp**2 - (img**2 + r1**2 + r2**2)).max() / np.abs(amp**2).max()
    _check(out, "monogenic amplitude identity", ident, 1e-12, t0=t0)
    return out


# ---------------------------------------------------------------------------
# Monte-Carlo suite


def run_montecarlo(seeds: int = 10) -> list[CheckResult]:
    out: list[CheckResult] = []
    grid = synth.Grid(512, 0.0, 1.0)

    for alpha0 in (0.0, np.pi / 3):
        t0 = time.time()
        ang_err, coh, scale_dev, prof_dev, hurst = [], [], [], [], []
        for seed in range(seeds):
            real = synth.synthesize_ssi(AFBF(0.5, alpha0, 0.3), grid, seed=seed)
            pyr = monogenic.wavelet_pyramid(real.values, [0, 1, 2], "simoncelli")
            o0 = tensor.orientation_of(monogenic.empirical_structure_tensor(pyr, 0))
            o1 = tensor.orientation_of(monogenic.empirical_structure_tensor(pyr, 1))
            ang_err.append(axial_distance(o0.angle, alpha0) * DEG)
            coh.append(o0.coherency)
            scale_dev.append(axial_distance(o0.angle, o1.angle) * DEG)
            hurst.append(monogenic.estimate_hurst(pyr, [0, 1, 2]))
            pyr_m = monogenic.wavelet_pyramid(real.values, [0], "meyer")
            o_m = tensor.orientation_of(monogenic.empirical_structure_tensor(pyr_m, 0))
            prof_dev.append(axial_distance(o0.angle, o_m.angle) * DEG)
        tag = f"a0={alpha0:.2f}"
        _check(out, f"cone field {tag}: mean angle error [deg]", np.mean(ang_err), 3.0, t0=t0)
        _check(out, f"cone field {tag}: coherency offset from 0.94", abs(np.mean(coh) - 0.94), 0.06)
        _check(out, f"cone field {tag}: scale invariance [deg]", np.mean(scale_dev), 2.0)
        _check(out, f"cone field {tag}: profile invariance [deg]", np.mean(prof_dev), 2.0)
        _check(out, f"cone field {tag}: Hurst error", abs(np.mean(hurst) - 0.5), 0.1)

    t0 = time.time()
    hs = []
    for seed in range(seeds):
        real = synth.synthesize_ssi(FBF(0.5), grid, seed=seed)
        pyr = monogenic.wavelet_pyramid(real.values, [0, 1, 2], "simoncelli")
        hs.append(monogenic.estimate_hurst(pyr, [0, 1, 2]))
    _check(out, "isotropic field: Hurst error", abs(np.mean(hs) - 0.5), 0.1, t0=t0)

    # conformal warp with the published figure parameters
    t0 = time.time()
    phi = affine_conformal_deformation(2.0, -1.0, 0.0)
    model = WAFBF(phi, AFBF(0.5, 0.0, 0.3))
    pts = grid.points()
    alpha_true = 2.0 * pts[..., 0] - pts[..., 1]
    crop = slice(128, 384)
    maes = []
    for seed in range(min(seeds, 3)):
        real = synth.synthesize_wafbf(model, grid, seed=seed, margin=0.1, base_n=4096)
        pyr = monogenic.wavelet_pyramid(real.values, [0], "simoncelli")
        fld = monogenic.windowed_orientation_field(pyr, 0, 8)
        err = axial_distance(fld.angle, alpha_true)[crop, crop]
        maes.append(np.mean(err[fld.mask[crop, crop]]) * DEG)
    _check(out, "conformal warp: per-pixel mean angle error [deg]",
           np.mean(maes), 10.0, t0=t0)

    # space-varying cone with constant parameters matches the stationary cone
    t0 = time.time()
    g256 = synth.Grid(256, 0.0, 1.0)
    gaf = GAFBF(ScalarField.constant(0.5), ScalarField.constant(0.4), 0.3)
    diffs = []
    for seed in range(seeds):
        r1 = synth.synthesize_gafbf(gaf, g256, seed=seed, freq_n=64)
        r2 = synth.synthesize_ssi(AFBF(0.5, 0.4, 0.3), g256, seed=seed + 1000)
        o1 = tensor.orientation_of(
            monogenic.empirical_structure_tensor(monogenic.wavelet_pyramid(r1.values, [1]), 1)
        )
        o2 = tensor.orientation_of(
            monogenic.empirical_structure_tensor(monogenic.wavelet_pyramid(r2.values, [1]), 1)
        )
        diffs.append(axial_distance(o1.angle, o2.angle) * DEG)
    _check(out, "varying-cone vs stationary cone orientation [deg]",
           np.mean(diffs), 3.0, t0=t0)

    out.extend(determinism_checks(seeds))
    return out


def determinism_checks(seeds: int = 10) -> list[CheckResult]:
    """Re-running any synthesis with the same seed is bit-identical,
    including across kernel thread counts."""
    out: list[CheckResult] = []
    t0 = time.time()
    g256 = synth.Grid(256, 0.0, 1.0)
    g64 = synth.Grid(64, 0.0, 1.0)
    gaf = GAFBF(ScalarField.constant(0.5), ScalarField.affine(1.0, 0.0, 0.0), 0.3)
    a = synth.synthesize_ssi(AFBF(0.5, 0.0, 0.3), g256, seed=42)
    b = synth.synthesize_ssi(AFBF(0.5, 0.0, 0.3), g256, seed=42)
    c = synth.synthesize_gafbf(gaf, g64, seed=42, freq_n=32, threads=1)
    d = synth.synthesize_gafbf(gaf, g64, seed=42, freq_n=32, threads=4)
    e2 = synth.synthesize_gafbf(gaf, g64, seed=42, freq_n=32, threads=2)
    w = WAFBF(linear_deformation(np.eye(2)), AFBF(0.5, 0.0, 0.3))
    e = synth.synthesize_wafbf(w, g64, seed=9)
    f = synth.synthesize_wafbf(w, g64, seed=9)
    mismatches = (
        int(not np.array_equal(a.values, b.values))
        + int(not np.array_equal(c.values, d.values))
        + int(not np.array_equal(c.values, e2.values))
        + int(not np.array_equal(e.values, f.values))
    )
    _check(out, "determinism: mismatching rasters", mismatches, 0.0, t0=t0)
    return out


SUITES = {
    "closedform": run_closedform,
    "frame": run_frame,
    "riesz": run_riesz,
    "montecarlo": run_montecarlo,
}


def suite_names() -> list[str]:
    return list(SUITES)


def run_suite(name: str, seeds: int = 10) -> list[CheckResult]:
    try:
        runner = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {suite_names()}")
    return runner(seeds=seeds)
