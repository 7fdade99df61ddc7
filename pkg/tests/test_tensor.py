import numpy as np
import pytest

from orifield.errors import NonInvertible, OverlappingCones, ZeroTensor
from orifield.spectral import Cone, Isotropic, LinearlyTransformed, Sum, axial_distance
from orifield.tensor import (
    StructureTensor,
    afbf_tensor_closed,
    circle_integral,
    cone_limit_tensor,
    deformed_orientation,
    orientation_of,
    sinc2,
    structure_tensor_quadrature,
    sum_afbf_tensor_closed,
)

# cone tensor entries for delta = 0.3: 0.5 +- 0.5 * sin(0.6)/0.6
J11_03 = 0.9705353944958629
J22_03 = 0.0294646055041371
SINC_06 = 0.9410707889917256

# Frozen midpoint-rule oracle (4e7 nodes) for a transformed cone with no
# closed form: base Cone(0.3, 0.25), H = 0.6, L = [[1.5, 0.4], [-0.2, 0.9]].
ORACLE_DEFORMED = {
    "j11": 0.567008632215,
    "j12": 0.035663027040,
    "j22": 0.035991927164,
    "mass": 0.603000559379,
}


def test_quadrature_isotropic():
    t = structure_tensor_quadrature(Isotropic())
    np.testing.assert_allclose(t.as_array(), 0.5 * np.eye(2), atol=1e-13)


def test_quadrature_cone_matches_closed_form_values():
    t = structure_tensor_quadrature(Cone(0.0, 0.3))
    assert t.j11 == pytest.approx(J11_03, abs=1e-8)
    assert t.j22 == pytest.approx(J22_03, abs=1e-8)
    assert t.j12 == pytest.approx(0.0, abs=1e-10)
    t45 = structure_tensor_quadrature(Cone(np.pi / 4, 0.3))
    assert t45.j12 == pytest.approx(0.5 * SINC_06, abs=1e-8)


def test_quadrature_vs_closed_random():
    rng = np.random.default_rng(10)
    for _ in range(50):
        a0 = rng.uniform(-np.pi / 2, np.pi / 2)
        d = rng.uniform(0.01, 1.3)
        quad = structure_tensor_quadrature(Cone(a0, d))
        closed = afbf_tensor_closed(a0, d)
        np.testing.assert_allclose(quad.as_array(), closed.as_array(), atol=1e-8)


def test_quadrature_vs_bruteforce_oracle_deformed():
    spec = LinearlyTransformed(Cone(0.3, 0.25), 0.6, np.array([[1.5, 0.4], [-0.2, 0.9]]))
    t = structure_tensor_quadrature(spec)
    assert t.j11 == pytest.approx(ORACLE_DEFORMED["j11"], abs=5e-7)
    assert t.j12 == pytest.approx(ORACLE_DEFORMED["j12"], abs=5e-7)
    assert t.j22 == pytest.approx(ORACLE_DEFORMED["j22"], abs=5e-7)
    assert circle_integral(spec) == pytest.approx(ORACLE_DEFORMED["mass"], abs=5e-7)


def test_quadrature_node_floor():
    with pytest.raises(ValueError):
        structure_tensor_quadrature(Isotropic(), nodes=32)


def test_trace_identity():
    # trace(J) equals the total mass of S since u1^2 + u2^2 = 1
    rng = np.random.default_rng(11)
    specs = [
        Isotropic(),
        Cone(rng.uniform(-1.5, 1.5), 0.4),
        Sum(Cone(-0.6, 0.1), Cone(0.8, 0.1)),
        LinearlyTransformed(Cone(0.1, 0.2), 0.45, np.array([[0.9, 0.2], [0.1, 1.4]])),
    ]
    for spec in specs:
        t = structure_tensor_quadrature(spec)
        assert t.trace == pytest.approx(circle_integral(spec), rel=1e-10)


def test_afbf_closed_form():
    t = afbf_tensor_closed(0.0, 0.3)
    assert t.j11 == pytest.approx(J11_03, abs=1e-12)
    assert t.j22 == pytest.approx(J22_03, abs=1e-12)
    lam1, lam2 = t.eigenvalues()
    assert lam1 == pytest.approx(0.5 * (1 + SINC_06), abs=1e-12)
    assert lam2 == pytest.approx(0.5 * (1 - SINC_06), abs=1e-12)
    # a full half-circle cone has no preferred direction: sin(2*pi) = 0
    iso = afbf_tensor_closed(1.1, np.pi)
    np.testing.assert_allclose(iso.as_array(), 0.5 * np.eye(2), atol=1e-12)
    assert orientation_of(iso).coherency == pytest.approx(0.0, abs=1e-12)


def test_cone_limit_tensor():
    a0 = 0.77
    t = cone_limit_tensor(a0)
    want = np.array(
        [
            [np.cos(a0) ** 2, np.cos(a0) * np.sin(a0)],
            [np.cos(a0) * np.sin(a0), np.sin(a0) ** 2],
        ]
    )
    np.testing.assert_allclose(t.as_array(), want, atol=1e-15)
    lam1, lam2 = t.eigenvalues()
    assert lam1 == pytest.approx(1.0)
    assert lam2 == pytest.approx(0.0, abs=1e-15)
    o = orientation_of(t)
    assert o.angle == pytest.approx(a0)
    assert o.coherency == pytest.approx(1.0)


def test_sum_closed_form():
    o = orientation_of(sum_afbf_tensor_closed(np.pi / 6, np.pi / 3, 0.05))
    assert o.angle == pytest.approx(np.pi / 4, abs=1e-10)
    # orthogonal directions cancel the anisotropic part entirely
    t = sum_afbf_tensor_closed(0.0, np.pi / 2, 0.2)
    np.testing.assert_allclose(t.as_array(), np.eye(2), atol=1e-12)
    assert orientation_of(t).coherency == pytest.approx(0.0, abs=1e-12)


def test_sum_coherency_random():
    rng = np.random.default_rng(12)
    done = 0
    while done < 100:
        a0 = rng.uniform(-np.pi / 2, np.pi / 2)
        a1 = a0 + rng.uniform(-1.4, 1.4)
        gap = axial_distance(a0, a1)
        if gap < 0.02 or abs(a0 - a1) >= np.pi / 2:
            continue
        d = rng.uniform(0.005, 0.49 * gap)
        coh = orientation_of(sum_afbf_tensor_closed(a0, a1, d)).coherency
        assert coh == pytest.approx(sinc2(d) * np.cos(a0 - a1), abs=1e-10)
        done += 1


def test_sum_requires_disjoint_supports():
    with pytest.raises(OverlappingCones):
        sum_afbf_tensor_closed(0.0, 0.1, 0.3)


def test_sum_matches_quadrature_of_sum_spec():
    a0, a1, d = -0.5, 0.6, 0.12
    quad = structure_tensor_quadrature(Sum(Cone(a0, d), Cone(a1, d)))
    closed = sum_afbf_tensor_closed(a0, a1, d)
    np.testing.assert_allclose(quad.as_array(), closed.as_array(), atol=1e-8)


def test_orientation_basic():
    o = orientation_of(StructureTensor(2.0, 0.0, 1.0))
    assert o.direction == pytest.approx((1.0, 0.0))
    assert o.coherency == pytest.approx(1.0 / 3.0)
    assert not o.degenerate


def test_orientation_of_closed_cone():
    o = orientation_of(afbf_tensor_closed(np.pi / 3, 0.3))
    assert o.direction[0] == pytest.approx(0.5, abs=1e-12)
    assert o.direction[1] == pytest.approx(np.sqrt(3) / 2, abs=1e-12)


def test_orientation_degenerate():
    o = orientation_of(StructureTensor(0.5, 0.0, 0.5))
    assert o.degenerate
    assert o.direction == (1.0, 0.0)
    assert o.coherency == pytest.approx(0.0, abs=1e-15)


def test_orientation_scale_invariant():
    t = afbf_tensor_closed(0.9, 0.4)
    ref = orientation_of(t)
    for c in (1e-6, 1.0, 1e6):
        o = orientation_of(t.scaled(c))
        assert o.direction == pytest.approx(ref.direction, abs=1e-12)
        assert o.coherency == pytest.approx(ref.coherency, rel=1e-12)


def test_orientation_angle_range():
    rng = np.random.default_rng(13)
    for _ in range(200):
        a = rng.normal(size=(2, 2))
        t = StructureTensor.from_array(a @ a.T)
        o = orientation_of(t)
        assert -np.pi / 2 < o.angle <= np.pi / 2
        assert np.hypot(*o.direction) == pytest.approx(1.0)


def test_zero_tensor_raises():
    with pytest.raises(ZeroTensor):
        orientation_of(StructureTensor(0.0, 0.0, 0.0))


def test_structure_tensor_validation():
    with pytest.raises(ValueError):
        StructureTensor(1.0, 5.0, 1.0)  # indefinite
    with pytest.raises(ValueError):
        StructureTensor(-1.0, 0.0, 1.0)


def test_deformed_orientation_rules():
    # rotation: angles add
    th, a0 = 0.7, 0.3
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    n = np.array([np.cos(a0), np.sin(a0)])
    got = deformed_orientation(n, rot)
    np.testing.assert_allclose(got, [np.cos(a0 + th), np.sin(a0 + th)], atol=1e-12)
    # diagonal: componentwise rescale by the inverse then normalize
    got = deformed_orientation(np.array([np.sqrt(2) / 2, np.sqrt(2) / 2]), np.diag([2.0, 1.0]))
    np.testing.assert_allclose(got, [0.4472135954999579, 0.8944271909999159], atol=1e-10)
    # identity
    np.testing.assert_allclose(deformed_orientation(n, np.eye(2)), n, atol=1e-15)


def test_deformed_orientation_errors():
    with pytest.raises(NonInvertible):
        deformed_orientation(np.array([1.0, 0.0]), np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(ValueError):
        deformed_orientation(np.array([2.0, 0.0]), np.eye(2))


def _random_invertible(rng):
    th1, th2 = rng.uniform(0, 2 * np.pi, 2)
    s = np.exp(rng.uniform(-np.log(2), np.log(2), 2))
    r1 = np.array([[np.cos(th1), -np.sin(th1)], [np.sin(th1), np.cos(th1)]])
    r2 = np.array([[np.cos(th2), -np.sin(th2)], [np.sin(th2), np.cos(th2)]])
    return r1 @ np.diag(s) @ r2


def test_svd_composition():
    # transporting through U, D, V^T one factor at a time equals one shot
    rng = np.random.default_rng(14)
    for _ in range(100):
        mat = _random_invertible(rng)
        a0 = rng.uniform(-np.pi / 2, np.pi / 2)
        n = np.array([np.cos(a0), np.sin(a0)])
        u, s, vt = np.linalg.svd(mat)
        step = deformed_orientation(n, vt)
        step = deformed_orientation(step, np.diag(s))
        step = deformed_orientation(step, u)
        direct = deformed_orientation(n, mat)
        np.testing.assert_allclose(step, direct, atol=1e-12)


def test_transported_vector_approximates_deformed_tensor():
    # the transported base orientation is an O(delta^2) eigenvector of the
    # deformed tensor; 5*delta^2 bounds the angle gap
    rng = np.random.default_rng(15)
    delta = 0.02
    for _ in range(20):
        a0 = rng.uniform(-np.pi / 2, np.pi / 2)
        mat = _random_invertible(rng)
        n = np.array([np.cos(a0), np.sin(a0)])
        predicted = deformed_orientation(n, mat)
        spec = LinearlyTransformed(Cone(a0, delta), 0.5, mat)
        o = orientation_of(structure_tensor_quadrature(spec, nodes=8192))
        gap = axial_distance(o.angle, np.arctan2(predicted[1], predicted[0]))
        assert gap <= 5 * delta**2
