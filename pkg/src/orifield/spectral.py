"""Anisotropy functions and spectral densities of self-similar Gaussian fields.

A field that is H-self-similar with stationary increments has a spectral
density of the form

    f(xi) = |xi|^(-2H-2) * S(xi / |xi|),

where ``S`` is an even, non-negative function on the unit circle (the
anisotropy function).  This module represents the families of ``S`` used by
the synthesis and analysis code: the isotropic constant, the cone indicator,
sums, and the image of any of these under an invertible linear map.

Directions are axial: ``S(theta) == S(theta + pi)`` for every spec built
here, so the corresponding fields are real-valued.  Built-in specs are
normalized to unit total mass on the circle (the isotropic level defaults to
``1/(2*pi)`` and the cone level to ``1/(4*delta)`` spread over the two
antipodal arcs), which makes the closed-form structure tensors come out with
trace one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NonInvertible, OverlappingConesWarning, ZeroFrequency

__all__ = [
    "AnisotropySpec",
    "Isotropic",
    "Cone",
    "Sum",
    "LinearlyTransformed",
    "Custom",
    "eval_anisotropy",
    "eval_spectral_density",
    "validate_hurst",
    "wrap_axial",
    "axial_distance",
    "spec_to_json",
    "spec_from_json",
]


def validate_hurst(value: float) -> float:
    """Check a Hurst exponent lies in the open interval (0, 1)."""
    h = float(value)
    if not 0.0 < h < 1.0:
        raise ValueError(f"Hurst exponent must be in (0, 1), got {value!r}")
    return h


def wrap_axial(theta):
    """Reduce angles to the axial representative in (-pi/2, pi/2]."""
    theta = np.asarray(theta, dtype=float)
    out = np.mod(theta + np.pi / 2, np.pi) - np.pi / 2
    # mod puts the result in [-pi/2, pi/2); move the lower endpoint up.
    out = np.where(out == -np.pi / 2, np.pi / 2, out)
    return out if out.ndim else float(out)


def axial_distance(a, b):
    """Distance between directions identified with their antipodes, in [0, pi/2]."""
    d = np.mod(np.asarray(a, dtype=float) - b, np.pi)
    d = np.minimum(d, np.pi - d)
    return d if d.ndim else float(d)


def _as_matrix2(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.shape != (2, 2) or not np.all(np.isfinite(a)):
        raise ValueError("expected a finite 2x2 matrix")
    return a


class AnisotropySpec:
    """Base class for anisotropy functions on the circle."""

    def __call__(self, theta):
        return eval_anisotropy(self, theta)


@dataclass(frozen=True)
class Isotropic(AnisotropySpec):
    """Constant directional density; level 1/(2*pi) integrates to one."""

    level: float = 1.0 / (2.0 * np.pi)

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be non-negative")


@dataclass(frozen=True)
class Cone(AnisotropySpec):
    """Indicator of the double cone of half-width ``delta`` around ``alpha0``.

    The support is the pair of antipodal arcs where the axial distance to
    ``alpha0`` is at most ``delta`` (boundary included).  The default level
    ``1/(4*delta)`` gives unit total mass over the two arcs.
    """

    alpha0: float
    delta: float
    level: float | None = None

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        a0 = wrap_axial(self.alpha0)
        object.__setattr__(self, "alpha0", a0)
        if self.level is None:
            object.__setattr__(self, "level", 1.0 / (4.0 * self.delta))
        elif self.level < 0:
            raise ValueError("level must be non-negative")


@dataclass(frozen=True)
class Sum(AnisotropySpec):
    """Pointwise sum of two anisotropy functions."""

    left: AnisotropySpec
    right: AnisotropySpec

    def __post_init__(self):
        if isinstance(self.left, Cone) and isinstance(self.right, Cone):
            gap = axial_distance(self.left.alpha0, self.right.alpha0)
            if gap <= self.left.delta + self.right.delta:
                warnings.warn(
                    "cone supports overlap; the sum-of-cones closed forms "
                    "assume disjoint supports",
                    OverlappingConesWarning,
                    stacklevel=2,
                )


@dataclass(frozen=True)
class LinearlyTransformed(AnisotropySpec):
    """Anisotropy of ``x -> X(L^-1 x)`` for an H-self-similar base field.

    Evaluates ``|det L| * |L^T u|^(-2H-2) * S_base(L^T u / |L^T u|)``.
    """

    base: AnisotropySpec
    hurst: float
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "hurst", validate_hurst(self.hurst))
        m = _as_matrix2(self.matrix)
        if np.linalg.det(m) == 0.0:
            raise NonInvertible("deformation matrix has zero determinant")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class Custom(AnisotropySpec):
    """User-supplied evaluator ``theta -> S(theta)``.

    The callable must be vectorized over theta, non-negative and satisfy
    ``S(theta) == S(theta + pi)``; ``discontinuities`` lists the angles where
    it jumps so quadrature can split there.  Not JSON-serializable.
    """

    evaluator: Callable = field(compare=False)
    discontinuities: tuple = ()


def eval_anisotropy(spec: AnisotropySpec, theta):
    """Evaluate ``S(cos theta, sin theta)``; vectorized over ``theta``."""
    theta = np.asarray(theta, dtype=float)
    scalar = theta.ndim == 0
    out = _eval(spec, np.atleast_1d(theta))
    return float(out[0]) if scalar else out


def _eval(spec, theta):
    if isinstance(spec, Isotropic):
        return np.full(theta.shape, spec.level)
    if isinstance(spec, Cone):
        inside = axial_distance(theta, spec.alpha0) <= spec.delta
        return np.where(inside, spec.level, 0.0)
    if isinstance(spec, Sum):
        return _eval(spec.left, theta) + _eval(spec.right, theta)
    if isinstance(spec, LinearlyTransformed):
        lt = spec.matrix.T
        u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        v = u @ lt.T  # rows v = L^T u
        norm = np.hypot(v[..., 0], v[..., 1])
        ang = np.arctan2(v[..., 1], v[..., 0])
        det = abs(np.linalg.det(spec.matrix))
        return det * norm ** (-2.0 * spec.hurst - 2.0) * _eval(spec.base, ang)
    if isinstance(spec, Custom):
        return np.asarray(spec.evaluator(theta), dtype=float)
    raise TypeError(f"not an anisotropy spec: {spec!r}")


def eval_spectral_density(spec: AnisotropySpec, hurst: float, xi):
    """Evaluate ``|xi|^(-2H-2) * S(xi/|xi|)``; vectorized over points ``xi``.

    ``xi`` is an array of shape (..., 2).  Raises ZeroFrequency if any point
    is the origin, where the density is singular.
    """
    h = validate_hurst(hurst)
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != 2:
        raise ValueError("xi must have shape (..., 2)")
    scalar = xi.ndim == 1
    xi = np.atleast_2d(xi)
    norm = np.hypot(xi[..., 0], xi[..., 1])
    if np.any(norm == 0.0):
        raise ZeroFrequency("spectral density is singular at xi = 0")
    ang = np.arctan2(xi[..., 1], xi[..., 0])
    out = norm ** (-2.0 * h - 2.0) * _eval(spec, ang)
    return float(out[0]) if scalar else out


def discontinuity_angles(spec: AnisotropySpec) -> np.ndarray:
    """Angles in [0, 2*pi) where ``S`` jumps, for quadrature splitting."""
    return np.sort(np.mod(np.asarray(_jumps(spec), dtype=float), 2.0 * np.pi))


def _jumps(spec) -> list:
    if isinstance(spec, Isotropic):
        return []
    if isinstance(spec, Cone):
        edges = [spec.alpha0 - spec.delta, spec.alpha0 + spec.delta]
        return edges + [e + np.pi for e in edges]
    if isinstance(spec, Sum):
        return _jumps(spec.left) + _jumps(spec.right)
    if isinstance(spec, LinearlyTransformed):
        # S_L jumps where the direction of L^T u crosses a jump of the base:
        # L^T u parallel to u(beta)  <=>  u parallel to (L^T)^-1 u(beta).
        inv_t = np.linalg.inv(spec.matrix.T)
        out = []
        for beta in _jumps(spec.base):
            v = inv_t @ np.array([np.cos(beta), np.sin(beta)])
            out.append(np.arctan2(v[1], v[0]))
        return out
    if isinstance(spec, Custom):
        return list(spec.discontinuities)
    raise TypeError(f"not an anisotropy spec: {spec!r}")


def spec_to_json(spec: AnisotropySpec) -> dict:
    """Serialize a spec to the JSON object layout documented in docs/formats.md."""
    if isinstance(spec, Isotropic):
        return {"kind": "isotropic", "level": spec.level}
    if isinstance(spec, Cone):
        return {
            "kind": "cone",
            "alpha0": spec.alpha0,
            "delta": spec.delta,
            "level": spec.level,
        }
    if isinstance(spec, Sum):
        return {
            "kind": "sum",
            "left": spec_to_json(spec.left),
            "right": spec_to_json(spec.right),
        }
    if isinstance(spec, LinearlyTransformed):
        return {
            "kind": "linear",
            "base": spec_to_json(spec.base),
            "hurst": spec.hurst,
            "matrix": np.asarray(spec.matrix).tolist(),
        }
    raise TypeError(f"spec is not JSON-serializable: {spec!r}")


def spec_from_json(obj: dict) -> AnisotropySpec:
    """Inverse of :func:`spec_to_json`."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("anisotropy spec JSON must be an object with a 'kind' key")
    kind = obj["kind"]
    try:
        if kind == "isotropic":
            return Isotropic(level=float(obj.get("level", 1.0 / (2.0 * np.pi))))
        if kind == "cone":
            level = obj.get("level")
            return Cone(
                alpha0=float(obj["alpha0"]),
                delta=float(obj["delta"]),
                level=None if level is None else float(level),
            )
        if kind == "sum":
            return Sum(spec_from_json(obj["left"]), spec_from_json(obj["right"]))
        if kind == "linear":
            return LinearlyTransformed(
                base=spec_from_json(obj["base"]),
                hurst=float(obj["hurst"]),
                matrix=np.asarray(obj["matrix"], dtype=float),
            )
    except KeyError as exc:
        raise ValueError(f"anisotropy spec JSON missing field {exc}") from exc
    raise ValueError(f"unknown anisotropy spec kind {kind!r}")
