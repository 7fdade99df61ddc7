import json

import numpy as np
import pytest

from orifield.errors import NonInvertible, OverlappingConesWarning, ZeroFrequency
from orifield.spectral import (
    Cone,
    Custom,
    Isotropic,
    LinearlyTransformed,
    Sum,
    axial_distance,
    eval_anisotropy,
    eval_spectral_density,
    spec_from_json,
    spec_to_json,
    validate_hurst,
    wrap_axial,
)


def test_isotropic_default_level():
    # 1/(2*pi), the unit-mass constant density
    assert eval_anisotropy(Isotropic(), 1.234) == pytest.approx(0.15915494309189535, abs=1e-12)
    assert eval_anisotropy(Isotropic(), -2.9) == pytest.approx(0.15915494309189535, abs=1e-12)


def test_cone_membership_and_level():
    spec = Cone(alpha0=0.0, delta=0.3)
    # default level 1/(4*delta) spreads unit mass over the two antipodal arcs
    assert spec.level == pytest.approx(1.0 / 1.2)
    assert eval_anisotropy(spec, 0.1) == pytest.approx(0.8333333333333334, abs=1e-12)
    assert eval_anisotropy(spec, 0.5) == 0.0
    # antipodal symmetry: theta and theta + pi are the same direction
    assert eval_anisotropy(spec, np.pi + 0.1) == pytest.approx(0.8333333333333334, abs=1e-12)
    # boundary is closed
    assert eval_anisotropy(spec, 0.3) == pytest.approx(spec.level)


def test_cone_even_symmetry_random_angles():
    rng = np.random.default_rng(0)
    spec = Cone(alpha0=0.7, delta=0.4)
    theta = rng.uniform(-10, 10, size=1000)
    np.testing.assert_allclose(
        eval_anisotropy(spec, theta), eval_anisotropy(spec, theta + np.pi), atol=1e-12
    )


def test_linearly_transformed_eval():
    # |det L| * |L^T u|^(-2H-2) * S_base evaluated by hand for L = diag(2, 1),
    # H = 0.5, theta = 0: 2 * 2^-3 * 5/6
    spec = LinearlyTransformed(Cone(0.0, 0.3), 0.5, np.diag([2.0, 1.0]))
    assert eval_anisotropy(spec, 0.0) == pytest.approx(0.20833333333333334, abs=1e-12)


def test_spectral_density_values():
    iso = Isotropic()
    assert eval_spectral_density(iso, 0.5, [1.0, 0.0]) == pytest.approx(
        0.15915494309189535, abs=1e-12
    )
    assert eval_spectral_density(iso, 0.5, [2.0, 0.0]) == pytest.approx(
        0.019894367886486918, abs=1e-12
    )


def test_spectral_density_even():
    rng = np.random.default_rng(1)
    spec = Sum(Cone(0.3, 0.2), Cone(-0.9, 0.2))
    xi = rng.normal(size=(500, 2))
    np.testing.assert_allclose(
        eval_spectral_density(spec, 0.7, xi),
        eval_spectral_density(spec, 0.7, -xi),
        rtol=1e-12,
    )


def test_zero_frequency_raises():
    with pytest.raises(ZeroFrequency):
        eval_spectral_density(Isotropic(), 0.5, [0.0, 0.0])


def test_homogeneity():
    # f(xi/c) = c^(2H+2) f(xi) for every spec family
    rng = np.random.default_rng(2)
    specs = [
        Isotropic(),
        Cone(0.4, 0.25),
        Sum(Cone(0.1, 0.1), Cone(1.2, 0.1)),
        LinearlyTransformed(Cone(0.2, 0.3), 0.6, np.array([[1.0, 0.3], [-0.5, 2.0]])),
    ]
    for spec in specs:
        for hurst in (0.2, 0.5, 0.8):
            xi = rng.normal(size=(200, 2))
            c = rng.uniform(0.1, 10.0, size=200)
            lhs = eval_spectral_density(spec, hurst, xi / c[:, None])
            rhs = c ** (2 * hurst + 2) * eval_spectral_density(spec, hurst, xi)
            np.testing.assert_allclose(lhs, rhs, rtol=1e-10)


def test_linear_transform_consistency():
    # f_L(xi) = |det L| f(L^T xi)
    rng = np.random.default_rng(3)
    base = Cone(0.2, 0.35)
    mat = np.array([[1.3, -0.4], [0.2, 0.8]])
    hurst = 0.55
    spec = LinearlyTransformed(base, hurst, mat)
    xi = rng.normal(size=(500, 2))
    lhs = eval_spectral_density(spec, hurst, xi)
    rhs = abs(np.linalg.det(mat)) * eval_spectral_density(base, hurst, xi @ mat)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


def test_rotation_transforms_cone_center():
    # deforming by a rotation matrix re-centers the cone
    rng = np.random.default_rng(4)
    a0, d, th = 0.3, 0.2, 0.7
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    transformed = LinearlyTransformed(Cone(a0, d), 0.5, rot)
    shifted = Cone(a0 + th, d)
    theta = rng.uniform(0, 2 * np.pi, size=1_000_000)
    np.testing.assert_allclose(
        eval_anisotropy(transformed, theta), eval_anisotropy(shifted, theta), atol=1e-12
    )


def test_sum_evaluates_pointwise():
    rng = np.random.default_rng(5)
    left, right = Cone(0.1, 0.15), Cone(1.0, 0.15)
    s = Sum(left, right)
    theta = rng.uniform(0, 2 * np.pi, size=1000)
    np.testing.assert_allclose(
        eval_anisotropy(s, theta),
        eval_anisotropy(left, theta) + eval_anisotropy(right, theta),
        rtol=1e-14,
    )


def test_sum_overlap_warns():
    with pytest.warns(OverlappingConesWarning):
        Sum(Cone(0.0, 0.3), Cone(0.2, 0.3))


def test_custom_spec():
    spec = Custom(evaluator=lambda t: np.cos(t) ** 2 / np.pi)
    assert eval_anisotropy(spec, 0.0) == pytest.approx(1 / np.pi)
    with pytest.raises(TypeError):
        spec_to_json(spec)


def test_noninvertible_matrix_rejected():
    with pytest.raises(NonInvertible):
        LinearlyTransformed(Isotropic(), 0.5, np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_hurst_validation():
    assert validate_hurst(0.5) == 0.5
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            validate_hurst(bad)


def test_cone_invariants():
    with pytest.raises(ValueError):
        Cone(0.0, -0.1)
    # alpha0 is stored as its axial representative
    assert Cone(2.0, 0.1).alpha0 == pytest.approx(wrap_axial(2.0))


def test_wrap_and_distance():
    assert wrap_axial(np.pi / 2) == pytest.approx(np.pi / 2)
    assert wrap_axial(-np.pi / 2) == pytest.approx(np.pi / 2)
    assert wrap_axial(np.pi + 0.1) == pytest.approx(0.1)
    assert axial_distance(0.1, np.pi + 0.2) == pytest.approx(0.1)
    assert axial_distance(-np.pi / 2 + 0.05, np.pi / 2 - 0.05) == pytest.approx(0.1)


def test_json_round_trip():
    specs = [
        Isotropic(level=0.3),
        Cone(0.4, 0.25),
        Sum(Cone(0.1, 0.1), Isotropic()),
        LinearlyTransformed(Cone(0.2, 0.3), 0.6, np.array([[1.0, 0.3], [-0.5, 2.0]])),
    ]
    rng = np.random.default_rng(6)
    theta = rng.uniform(0, 2 * np.pi, 200)
    for spec in specs:
        blob = json.dumps(spec_to_json(spec))
        back = spec_from_json(json.loads(blob))
        np.testing.assert_allclose(
            eval_anisotropy(spec, theta), eval_anisotropy(back, theta), rtol=1e-14
        )


def test_json_errors():
    with pytest.raises(ValueError):
        spec_from_json({"kind": "mystery"})
    with pytest.raises(ValueError):
        spec_from_json({"no": "kind"})
    with pytest.raises(ValueError):
        spec_from_json({"kind": "cone", "alpha0": 0.1})
