"""Structure tensors of oriented fields: quadrature, closed forms, orientation.

The structure tensor of a self-similar field with anisotropy function ``S``
is the matrix of second angular moments

    J[l1, l2] = integral over the circle of  u_l1 u_l2 S(u) d(theta),

whose top eigenvector is the field's orientation and whose eigenvalue spread
gives the coherency.  For cone-type ``S`` the integral has jump
discontinuities, so the quadrature splits the circle at every cone edge and
applies Gauss-Legendre on each smooth piece.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonInvertible, OverlappingCones, ZeroTensor
from .spectral import (
    AnisotropySpec,
    axial_distance,
    discontinuity_angles,
    eval_anisotropy,
    wrap_axial,
)

__all__ = [
    "StructureTensor",
    "OrientationResult",
    "structure_tensor_quadrature",
    "circle_integral",
    "afbf_tensor_closed",
    "sum_afbf_tensor_closed",
    "cone_limit_tensor",
    "orientation_of",
    "deformed_orientation",
    "sinc2",
]

#: Relative eigenvalue-gap threshold below which a tensor is isotropic.
DEGENERACY_TOL = 1e-9


def sinc2(delta: float) -> float:
    """sin(2*delta) / (2*delta), the coherency of a cone of half-width delta."""
    t = 2.0 * delta
    return float(np.sin(t) / t) if t != 0.0 else 1.0


@dataclass(frozen=True)
class StructureTensor:
    """Symmetric positive-semidefinite 2x2 matrix (j21 == j12)."""

    j11: float
    j12: float
    j22: float

    def __post_init__(self):
        scale = max(abs(self.j11), abs(self.j22), abs(self.j12), 1.0)
        eps = 1e-9 * scale
        if self.j11 < -eps or self.j22 < -eps:
            raise ValueError("structure tensor has a negative diagonal entry")
        if self.j11 * self.j22 - self.j12**2 < -eps * scale:
            raise ValueError("structure tensor is not positive-semidefinite")

    @property
    def trace(self) -> float:
        return self.j11 + self.j22

    def as_array(self) -> np.ndarray:
        return np.array([[self.j11, self.j12], [self.j12, self.j22]])

    def eigenvalues(self) -> tuple[float, float]:
        """Eigenvalues sorted descending."""
        half_gap = 0.5 * np.hypot(self.j11 - self.j22, 2.0 * self.j12)
        mid = 0.5 * self.trace
        return mid + half_gap, mid - half_gap

    def scaled(self, c: float) -> "StructureTensor":
        return StructureTensor(c * self.j11, c * self.j12, c * self.j22)

    def to_json(self) -> dict:
        return {"j11": self.j11, "j12": self.j12, "j22": self.j22}

    @classmethod
    def from_array(cls, a) -> "StructureTensor":
        a = np.asarray(a, dtype=float)
        if a.shape != (2, 2):
            raise ValueError("expected a 2x2 array")
        if not np.isclose(a[0, 1], a[1, 0], rtol=1e-9, atol=1e-12):
            raise ValueError("expected a symmetric matrix")
        return cls(float(a[0, 0]), 0.5 * float(a[0, 1] + a[1, 0]), float(a[1, 1]))


@dataclass(frozen=True)
class OrientationResult:
    """Dominant direction of a structure tensor.

    ``direction`` is the unit eigenvector of the largest eigenvalue with the
    axial sign convention angle in (-pi/2, pi/2]; when the eigenvalues are
    equal up to tolerance the result is flagged degenerate and the direction
    defaults to (1, 0).
    """

    direction: tuple[float, float]
    angle: float
    coherency: float
    degenerate: bool

    def to_json(self) -> dict:
        return {
            "direction": list(self.direction),
            "angle": self.angle,
            "coherency": self.coherency,
            "degenerate": self.degenerate,
        }


def orientation_of(tensor: StructureTensor, tol: float = DEGENERACY_TOL) -> OrientationResult:
    """Orientation, coherency and degeneracy flag of a structure tensor."""
    tr = tensor.trace
    if tr <= 0.0:
        raise ZeroTensor("tensor trace must be positive to define an orientation")
    gap = np.hypot(tensor.j11 - tensor.j22, 2.0 * tensor.j12)
    coherency = float(gap / tr)
    if gap <= tol * tr:
        return OrientationResult((1.0, 0.0), 0.0, coherency, True)
    # Half-angle form of the top eigenvector; atan2 lands in (-pi, pi] so the
    # halved angle is the axial representative in (-pi/2, pi/2].
    angle = 0.5 * np.arctan2(2.0 * tensor.j12, tensor.j11 - tensor.j22)
    angle = wrap_axial(angle)
    return OrientationResult(
        (float(np.cos(angle)), float(np.sin(angle))), float(angle), coherency, False
    )


@lru_cache(maxsize=64)
def _gauss_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(m)


def _composite_gauss(spec: AnisotropySpec, nodes: int, weight_fn) -> float:
    """Integrate ``weight_fn(theta) * S(theta)`` over [0, 2*pi)."""
    splits = discontinuity_angles(spec)
    if splits.size:
        edges = np.concatenate([splits, [splits[0] + 2.0 * np.pi]])
    else:
        edges = np.array([0.0, 2.0 * np.pi])
    spans = np.diff(edges)
    # Distribute the node budget proportionally to subinterval length,
    # at least 16 points each so narrow cones are still well resolved, and
    # at most 512: the integrand is smooth on each piece, so Gauss-Legendre
    # converges spectrally and higher orders only cost time.
    counts = np.clip(np.ceil(nodes * spans / (2.0 * np.pi)).astype(int), 16, 512)
    total = 0.0
    for a, span, m in zip(edges[:-1], spans, counts):
        x, w = _gauss_nodes(int(m))
        theta = a + 0.5 * span * (x + 1.0)
        # Gauss nodes are interior, so jumps at the edges are never sampled.
        vals = eval_anisotropy(spec, theta) * weight_fn(theta)
        total += 0.5 * span * np.dot(w, vals)
    return total


def structure_tensor_quadrature(spec: AnisotropySpec, nodes: int = 4096) -> StructureTensor:
    """Second angular moments of ``S`` by boundary-split Gauss-Legendre."""
    if nodes < 64:
        raise ValueError("nodes must be at least 64")
    j11 = _composite_gauss(spec, nodes, lambda t: np.cos(t) ** 2)
    j12 = _composite_gauss(spec, nodes, lambda t: np.cos(t) * np.sin(t))
    j22 = _composite_gauss(spec, nodes, lambda t: np.sin(t) ** 2)
    return StructureTensor(j11, j12, j22)


def circle_integral(spec: AnisotropySpec, nodes: int = 4096) -> float:
    """Total mass of ``S`` over the circle (equals the tensor trace)."""
    if nodes < 64:
        raise ValueError("nodes must be at least 64")
    return _composite_gauss(spec, nodes, lambda t: np.ones_like(t))


def afbf_tensor_closed(alpha0: float, delta: float) -> StructureTensor:
    """Closed-form tensor of a cone field: eigenvalues (1 +- sinc2(delta))/2."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    s = sinc2(delta)
    return StructureTensor(
        0.5 + 0.5 * np.cos(2.0 * alpha0) * s,
        0.5 * np.sin(2.0 * alpha0) * s,
        0.5 - 0.5 * np.cos(2.0 * alpha0) * s,
    )


def sum_afbf_tensor_closed(alpha0: float, alpha1: float, delta: float) -> StructureTensor:
    """Closed-form tensor of a sum of two equal-width cone fields.

    Requires disjoint supports (delta < half the axial gap between the two
    center angles); the top eigenvector then sits at the half angle
    (alpha0 + alpha1) / 2 and the coherency is sinc2(delta) * cos(alpha0 - alpha1).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    gap = axial_distance(alpha0, alpha1)
    if delta >= gap / 2.0:
        raise OverlappingCones(
            f"needs delta < |alpha1 - alpha0|/2 = {gap / 2.0:.6g}, got {delta:.6g}"
        )
    s = sinc2(delta)
    return StructureTensor(
        1.0 + 0.5 * s * (np.cos(2.0 * alpha0) + np.cos(2.0 * alpha1)),
        0.5 * s * (np.sin(2.0 * alpha0) + np.sin(2.0 * alpha1)),
        1.0 - 0.5 * s * (np.cos(2.0 * alpha0) + np.cos(2.0 * alpha1)),
    )


def cone_limit_tensor(alpha0: float) -> StructureTensor:
    """Rank-1 tensor of the zero-width cone limit (all mass along alpha0).

    The delta -> 0 limit of the cone density is a Dirac mass on the line at
    angle alpha0; the tensor limit is the projector onto that direction and
    is exposed directly because a measure-valued spec is out of scope.
    """
    c, s = np.cos(alpha0), np.sin(alpha0)
    return StructureTensor(c * c, c * s, s * s)


def deformed_orientation(n, matrix) -> np.ndarray:
    """Transport a unit orientation vector under ``x -> X(L^-1 x)``.

    Returns ``(L^-1)^T n`` normalized; raises NonInvertible for det L = 0.
    """
    n = np.asarray(n, dtype=float)
    if n.shape != (2,):
        raise ValueError("orientation must be a 2-vector")
    norm_n = np.hypot(n[0], n[1])
    if not np.isclose(norm_n, 1.0, rtol=1e-9, atol=1e-12):
        raise ValueError("orientation must be a unit vector")
    m = np.asarray(matrix, dtype=float)
    if m.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if np.linalg.det(m) == 0.0:
        raise NonInvertible("deformation matrix has zero determinant")
    v = np.linalg.inv(m).T @ n
    return v / np.hypot(v[0], v[1])
