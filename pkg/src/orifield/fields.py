"""Field models, their tangent fields, and local orientation.

Seven families are covered: the isotropic self-similar field (FBF), the
oriented cone field (AFBF), sums of two cone fields, linear deformations of
any of those, and three space-varying constructions -- multifractional
fields (space-varying Hurst exponent), generalized cone fields
(space-varying Hurst exponent and cone direction), and warped cone fields
(composition with a smooth deformation).

The space-varying models are localizable: zooming at a point x0 yields a
self-similar field (the tangent field), whose anisotropy carries the local
orientation.  ``tangent_field`` returns that limit model and
``local_orientation`` evaluates the closed-form orientation transport:
through the Jacobian transpose for warped fields, and directly from the
angle field for generalized cone fields.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateConformalWarning, SingularJacobian
from .spectral import (
    AnisotropySpec,
    Cone,
    Isotropic,
    LinearlyTransformed,
    Sum,
    validate_hurst,
    wrap_axial,
)
from .tensor import (
    OrientationResult,
    StructureTensor,
    afbf_tensor_closed,
    orientation_of,
    sinc2,
    structure_tensor_quadrature,
    sum_afbf_tensor_closed,
)

__all__ = [
    "ScalarField",
    "Deformation",
    "FieldModel",
    "FBF",
    "AFBF",
    "SumAFBF",
    "LinearDeformed",
    "MBF",
    "GAFBF",
    "WAFBF",
    "local_rotation_deformation",
    "affine_conformal_deformation",
    "linear_deformation",
    "user_deformation",
    "is_self_similar",
    "model_anisotropy",
    "tangent_field",
    "local_structure_tensor",
    "local_orientation",
    "model_to_json",
    "model_from_json",
]

_FD_STEP = 1e-6


# ---------------------------------------------------------------------------
# scalar fields (Hurst functions h(x), angle functions alpha(x))


class ScalarField:
    """Scalar function of the plane with an optional analytic gradient.

    Built-in symbolic kinds (constant, affine, quadratic_affine) serialize to
    JSON and carry exact gradients; arbitrary callables are wrapped with a
    central-difference gradient.  Callables must be pure, reentrant and
    vectorized over points of shape (..., 2).
    """

    def __init__(self, fn: Callable, grad: Callable | None = None,
                 kind: str = "callable", params: dict | None = None):
        self._fn = fn
        self._grad = grad
        self.kind = kind
        self.params = params or {}

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self._fn(x)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        if self._grad is not None:
            return self._grad(x)
        e1 = np.array([_FD_STEP, 0.0])
        e2 = np.array([0.0, _FD_STEP])
        g1 = (self._fn(x + e1) - self._fn(x - e1)) / (2.0 * _FD_STEP)
        g2 = (self._fn(x + e2) - self._fn(x - e2)) / (2.0 * _FD_STEP)
        return np.stack([g1, g2], axis=-1)

    # -- symbolic constructors ------------------------------------------------

    @staticmethod
    def constant(value: float) -> "ScalarField":
        v = float(value)
        return ScalarField(
            lambda x: np.full(x.shape[:-1], v),
            lambda x: np.zeros(x.shape),
            kind="constant",
            params={"value": v},
        )

    @staticmethod
    def affine(a: float, b: float, c: float) -> "ScalarField":
        """a*x1 + b*x2 + c."""
        a, b, c = float(a), float(b), float(c)

        def fn(x):
            return a * x[..., 0] + b * x[..., 1] + c

        def grad(x):
            g = np.empty(x.shape)
            g[..., 0] = a
            g[..., 1] = b
            return g

        return ScalarField(fn, grad, kind="affine", params={"a": a, "b": b, "c": c})

    @staticmethod
    def quadratic_affine(q1: float, q2: float, a: float, b: float, c: float) -> "ScalarField":
        """q1*x1^2 + q2*x2^2 + a*x1 + b*x2 + c."""
        q1, q2, a, b, c = (float(v) for v in (q1, q2, a, b, c))

        def fn(x):
            return q1 * x[..., 0] ** 2 + q2 * x[..., 1] ** 2 + a * x[..., 0] + b * x[..., 1] + c

        def grad(x):
            g = np.empty(x.shape)
            g[..., 0] = 2.0 * q1 * x[..., 0] + a
            g[..., 1] = 2.0 * q2 * x[..., 1] + b
            return g

        return ScalarField(
            fn, grad, kind="quadratic_affine",
            params={"q1": q1, "q2": q2, "a": a, "b": b, "c": c},
        )

    def to_json(self) -> dict:
        if self.kind == "callable":
            raise TypeError("callable scalar fields are not JSON-serializable")
        return {"kind": self.kind, **self.params}

    @staticmethod
    def from_json(obj: dict) -> "ScalarField":
        kind = obj.get("kind")
        if kind == "constant":
            return ScalarField.constant(obj["value"])
        if kind == "affine":
            return ScalarField.affine(obj["a"], obj["b"], obj["c"])
        if kind == "quadratic_affine":
            return ScalarField.quadratic_affine(
                obj["q1"], obj["q2"], obj["a"], obj["b"], obj["c"]
            )
        raise ValueError(f"unknown scalar field kind {kind!r}")


def as_scalar_field(value) -> ScalarField:
    """Coerce a number or callable to a ScalarField."""
    if isinstance(value, ScalarField):
        return value
    if np.isscalar(value):
        return ScalarField.constant(float(value))
    if callable(value):
        return ScalarField(value)
    raise TypeError(f"cannot interpret {value!r} as a scalar field")


# ---------------------------------------------------------------------------
# deformations


@dataclass(frozen=True)
class Deformation:
    """Plane deformation with its exact Jacobian.

    ``map`` takes points of shape (..., 2) to points of shape (..., 2);
    ``jacobian`` returns matrices of shape (..., 2, 2).  The jacobian is the
    derivative of the map (central differences agree within 1e-5 relative at
    random points); both callables must be pure and reentrant.
    """

    map: Callable = field(compare=False)
    jacobian: Callable = field(compare=False)
    tag: str = "user"
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        if self.tag == "user":
            raise TypeError("user-supplied deformations are not JSON-serializable")
        out = {"kind": self.tag}
        for key, val in self.params.items():
            out[key] = val.to_json() if isinstance(val, ScalarField) else val
        return out


def user_deformation(map_fn: Callable, jacobian_fn: Callable | None = None) -> Deformation:
    """Wrap user callables; a central-difference Jacobian fills in if absent."""
    if jacobian_fn is None:
        def jacobian_fn(x, _map=map_fn):
            x = np.asarray(x, dtype=float)
            e1 = np.array([_FD_STEP, 0.0])
            e2 = np.array([0.0, _FD_STEP])
            d1 = (_map(x + e1) - _map(x - e1)) / (2.0 * _FD_STEP)
            d2 = (_map(x + e2) - _map(x - e2)) / (2.0 * _FD_STEP)
            return np.stack([d1, d2], axis=-1)

    return Deformation(map=map_fn, jacobian=jacobian_fn, tag="user")


def linear_deformation(matrix) -> Deformation:
    """Global linear map x -> M x."""
    m = np.array(matrix, dtype=float)
    if m.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")

    def map_fn(x):
        return np.asarray(x, dtype=float) @ m.T

    def jac_fn(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(m, x.shape[:-1] + (2, 2)).copy()

    return Deformation(map_fn, jac_fn, tag="linear", params={"matrix": m.tolist()})


def local_rotation_deformation(alpha, grad_alpha: Callable | None = None) -> Deformation:
    """Pointwise rotation x -> R_{-alpha(x)} x with its closed-form Jacobian.

    ``alpha`` is a ScalarField (or number / callable); when a bare callable
    is given, ``grad_alpha`` may supply the analytic gradient.  The Jacobian
    determinant is 1 + d1alpha*x2 - d2alpha*x1, so the map degenerates
    exactly where that expression vanishes; downstream operations raise
    SingularJacobian there.
    """
    alpha_f = as_scalar_field(alpha)
    if grad_alpha is not None:
        alpha_f = ScalarField(alpha_f._fn, grad_alpha, alpha_f.kind, alpha_f.params)

    def map_fn(x):
        x = np.asarray(x, dtype=float)
        a = alpha_f(x)
        c, s = np.cos(a), np.sin(a)
        return np.stack(
            [c * x[..., 0] + s * x[..., 1], -s * x[..., 0] + c * x[..., 1]], axis=-1
        )

    def jac_fn(x):
        x = np.asarray(x, dtype=float)
        a = alpha_f(x)
        g = alpha_f.gradient(x)
        c, s = np.cos(a), np.sin(a)
        p1 = c * x[..., 0] + s * x[..., 1]
        p2 = -s * x[..., 0] + c * x[..., 1]
        jac = np.empty(x.shape[:-1] + (2, 2))
        jac[..., 0, 0] = c + g[..., 0] * p2
        jac[..., 0, 1] = s + g[..., 1] * p2
        jac[..., 1, 0] = -s - g[..., 0] * p1
        jac[..., 1, 1] = c - g[..., 1] * p1
        return jac

    return Deformation(map_fn, jac_fn, tag="local_rotation", params={"alpha": alpha_f})


def affine_conformal_deformation(a: float, b: float, c: float = 0.0) -> Deformation:
    """Conformal warp whose local orientation is exactly a*x1 + b*x2 + c.

    The map is the closed-form primitive

        Phi(x) = exp(a*x2 - b*x1) / (a^2 + b^2)
                 * (a*sin(alpha) - b*cos(alpha), a*cos(alpha) + b*sin(alpha))

    with alpha(x) = a*x1 + b*x2 + c, and its Jacobian is the scaled rotation
    exp(a*x2 - b*x1) * [[cos a, sin a], [-sin a, cos a]], so DPhi(x)^T e1
    points along (cos alpha(x), sin alpha(x)) at every x.  The degenerate
    case a = b = 0 falls back to the global rotation x -> R_{-c} x.
    """
    a, b, c = float(a), float(b), float(c)
    if a == 0.0 and b == 0.0:
        warnings.warn(
            "a = b = 0 gives a constant angle; falling back to a global rotation",
            DegenerateConformalWarning,
            stacklevel=2,
        )
        rot = local_rotation_deformation(ScalarField.constant(c))
        return Deformation(rot.map, rot.jacobian, tag="affine_conformal",
                           params={"a": a, "b": b, "c": c})
    norm2 = a * a + b * b

    def map_fn(x):
        x = np.asarray(x, dtype=float)
        alpha = a * x[..., 0] + b * x[..., 1] + c
        scale = np.exp(a * x[..., 1] - b * x[..., 0]) / norm2
        return np.stack(
            [
                scale * (a * np.sin(alpha) - b * np.cos(alpha)),
                scale * (a * np.cos(alpha) + b * np.sin(alpha)),
            ],
            axis=-1,
        )

    def jac_fn(x):
        x = np.asarray(x, dtype=float)
        alpha = a * x[..., 0] + b * x[..., 1] + c
        scale = np.exp(a * x[..., 1] - b * x[..., 0])
        ca, sa = np.cos(alpha), np.sin(alpha)
        jac = np.empty(x.shape[:-1] + (2, 2))
        jac[..., 0, 0] = scale * ca
        jac[..., 0, 1] = scale * sa
        jac[..., 1, 0] = -scale * sa
        jac[..., 1, 1] = scale * ca
        return jac

    return Deformation(map_fn, jac_fn, tag="affine_conformal",
                       params={"a": a, "b": b, "c": c})


def _deformation_from_json(obj: dict) -> Deformation:
    kind = obj.get("kind")
    if kind == "linear":
        return linear_deformation(np.asarray(obj["matrix"], dtype=float))
    if kind == "local_rotation":
        return local_rotation_deformation(ScalarField.from_json(obj["alpha"]))
    if kind == "affine_conformal":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateConformalWarning)
            return affine_conformal_deformation(obj["a"], obj["b"], obj.get("c", 0.0))
    raise ValueError(f"unknown deformation kind {kind!r}")


# ---------------------------------------------------------------------------
# field models


class FieldModel:
    """Base class for the field families."""


@dataclass(frozen=True)
class FBF(FieldModel):
    """Isotropic self-similar field with stationary increments."""

    hurst: float

    def __post_init__(self):
        object.__setattr__(self, "hurst", validate_hurst(self.hurst))


@dataclass(frozen=True)
class AFBF(FieldModel):
    """Oriented self-similar field: cone anisotropy at angle alpha0, half-width delta."""

    hurst: float
    alpha0: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "hurst", validate_hurst(self.hurst))
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        object.__setattr__(self, "alpha0", float(wrap_axial(self.alpha0)))


@dataclass(frozen=True)
class SumAFBF(FieldModel):
    """Sum of two independent cone fields of equal regularity and width."""

    hurst: float
    alpha0: float
    alpha1: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "hurst", validate_hurst(self.hurst))
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        object.__setattr__(self, "alpha0", float(wrap_axial(self.alpha0)))
        object.__setattr__(self, "alpha1", float(wrap_axial(self.alpha1)))


@dataclass(frozen=True)
class LinearDeformed(FieldModel):
    """x -> X(L^-1 x) for a self-similar base model and invertible L."""

    base: FieldModel
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not is_self_similar(self.base):
            raise TypeError("base of a linear deformation must be self-similar")
        m = np.array(self.matrix, dtype=float)
        if m.shape != (2, 2) or np.linalg.det(m) == 0.0:
            raise ValueError("matrix must be an invertible 2x2 matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def hurst(self) -> float:
        return self.base.hurst


@dataclass(frozen=True)
class MBF(FieldModel):
    """Multifractional field: isotropic with space-varying Hurst function."""

    h: ScalarField

    def __post_init__(self):
        object.__setattr__(self, "h", as_scalar_field(self.h))


@dataclass(frozen=True)
class GAFBF(FieldModel):
    """Space-varying cone field: Hurst h(x), direction alpha(x), width delta.

    The spectral amplitude is C(x, xi) = (2*delta)^(-1/2) on the double cone
    of axial half-width delta around alpha(x), so the local anisotropy
    function at x0 is C(x0, .)^2.  Smoothness trade-offs between h and alpha
    (the Holder conditions making the field localizable) are the caller's
    responsibility.
    """

    h: ScalarField
    alpha: ScalarField
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        object.__setattr__(self, "h", as_scalar_field(self.h))
        object.__setattr__(self, "alpha", as_scalar_field(self.alpha))


@dataclass(frozen=True)
class WAFBF(FieldModel):
    """Warped cone field Z(x) = X(Phi(x)) for an AFBF X and C1 map Phi."""

    deformation: Deformation
    base: AFBF

    def __post_init__(self):
        if not isinstance(self.base, AFBF):
            raise TypeError("warped base must be an AFBF")

    @property
    def hurst(self) -> float:
        return self.base.hurst


def is_self_similar(model: FieldModel) -> bool:
    return isinstance(model, (FBF, AFBF, SumAFBF, LinearDeformed))


def model_anisotropy(model: FieldModel) -> AnisotropySpec:
    """Anisotropy function of a self-similar model."""
    if isinstance(model, FBF):
        return Isotropic()
    if isinstance(model, AFBF):
        return Cone(model.alpha0, model.delta)
    if isinstance(model, SumAFBF):
        return Sum(Cone(model.alpha0, model.delta), Cone(model.alpha1, model.delta))
    if isinstance(model, LinearDeformed):
        return LinearlyTransformed(
            model_anisotropy(model.base), model.hurst, model.matrix
        )
    raise TypeError(f"{type(model).__name__} has no global anisotropy function")


def tangent_field(model: FieldModel, x0) -> FieldModel:
    """Self-similar local limit of ``model`` at the point ``x0``.

    Self-similar models are their own tangent fields; the multifractional
    field freezes h at x0, the generalized cone field freezes (h, alpha) at
    x0, and the warped field becomes the base deformed by the inverse
    Jacobian (so the tangent is x -> X(DPhi(x0) x)).
    """
    x0 = np.asarray(x0, dtype=float)
    if is_self_similar(model):
        return model
    if isinstance(model, MBF):
        return FBF(float(model.h(x0)))
    if isinstance(model, GAFBF):
        return AFBF(float(model.h(x0)), float(model.alpha(x0)), model.delta)
    if isinstance(model, WAFBF):
        jac = np.asarray(model.deformation.jacobian(x0), dtype=float)
        det = np.linalg.det(jac)
        if det == 0.0 or not np.isfinite(det):
            raise SingularJacobian(f"deformation is singular at {x0.tolist()}")
        if np.array_equal(jac, np.eye(2)):
            return model.base
        return LinearDeformed(model.base, np.linalg.inv(jac))
    raise TypeError(f"not a field model: {model!r}")


def local_structure_tensor(model: FieldModel, x0=(0.0, 0.0), nodes: int = 4096) -> StructureTensor:
    """Structure tensor of the tangent field at ``x0``.

    Closed forms are used where they exist (isotropic, cone, sum of cones);
    linearly deformed tangents fall back to boundary-split quadrature.
    """
    tangent = tangent_field(model, x0)
    if isinstance(tangent, FBF):
        return StructureTensor(0.5, 0.0, 0.5)
    if isinstance(tangent, AFBF):
        return afbf_tensor_closed(tangent.alpha0, tangent.delta)
    if isinstance(tangent, SumAFBF):
        return sum_afbf_tensor_closed(tangent.alpha0, tangent.alpha1, tangent.delta)
    return structure_tensor_quadrature(model_anisotropy(tangent), nodes)


def local_orientation(model: FieldModel, x0=(0.0, 0.0), nodes: int = 2048) -> OrientationResult:
    """Local orientation of ``model`` at ``x0``.

    Isotropic tangents (FBF, MBF) come back degenerate.  For the generalized
    cone field the direction is (cos alpha(x0), sin alpha(x0)) with the
    tangent cone's closed-form coherency.  For warped fields the direction
    is the base orientation pushed through the Jacobian transpose,
    DPhi(x0)^T n normalized (exact up to O(delta^2)), with coherency taken
    from the tangent tensor quadrature.
    """
    x0 = np.asarray(x0, dtype=float)
    if isinstance(model, (FBF, MBF)):
        return OrientationResult((1.0, 0.0), 0.0, 0.0, True)
    if isinstance(model, GAFBF):
        angle = float(wrap_axial(float(model.alpha(x0))))
        return OrientationResult(
            (float(np.cos(angle)), float(np.sin(angle))), angle, sinc2(model.delta), False
        )
    if isinstance(model, WAFBF):
        jac = np.asarray(model.deformation.jacobian(x0), dtype=float)
        det = np.linalg.det(jac)
        if det == 0.0 or not np.isfinite(det):
            raise SingularJacobian(f"deformation is singular at {x0.tolist()}")
        n = np.array([np.cos(model.base.alpha0), np.sin(model.base.alpha0)])
        v = jac.T @ n
        v /= np.hypot(v[0], v[1])
        angle = float(wrap_axial(np.arctan2(v[1], v[0])))
        tangent = LinearDeformed(model.base, np.linalg.inv(jac))
        coh = orientation_of(
            structure_tensor_quadrature(model_anisotropy(tangent), nodes)
        ).coherency
        return OrientationResult((float(v[0]), float(v[1])), angle, coh, False)
    if isinstance(model, (AFBF, SumAFBF, LinearDeformed)):
        return orientation_of(local_structure_tensor(model, x0))
    raise TypeError(f"not a field model: {model!r}")


# ---------------------------------------------------------------------------
# JSON


def model_to_json(model: FieldModel) -> dict:
    if isinstance(model, FBF):
        return {"kind": "fbf", "hurst": model.hurst}
    if isinstance(model, AFBF):
        return {"kind": "afbf", "hurst": model.hurst, "alpha0": model.alpha0,
                "delta": model.delta}
    if isinstance(model, SumAFBF):
        return {"kind": "sum_afbf", "hurst": model.hurst, "alpha0": model.alpha0,
                "alpha1": model.alpha1, "delta": model.delta}
    if isinstance(model, LinearDeformed):
        return {"kind": "linear_deformed", "base": model_to_json(model.base),
                "matrix": np.asarray(model.matrix).tolist()}
    if isinstance(model, MBF):
        return {"kind": "mbf", "h": model.h.to_json()}
    if isinstance(model, GAFBF):
        return {"kind": "gafbf", "h": model.h.to_json(),
                "alpha": model.alpha.to_json(), "delta": model.delta}
    if isinstance(model, WAFBF):
        return {"kind": "wafbf", "base": model_to_json(model.base),
                "deformation": model.deformation.to_json()}
    raise TypeError(f"not a field model: {model!r}")


def model_from_json(obj: dict) -> FieldModel:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("field model JSON must be an object with a 'kind' key")
    kind = obj["kind"]
    try:
        if kind == "fbf":
            return FBF(float(obj["hurst"]))
        if kind == "afbf":
            return AFBF(float(obj["hurst"]), float(obj["alpha0"]), float(obj["delta"]))
        if kind == "sum_afbf":
            return SumAFBF(float(obj["hurst"]), float(obj["alpha0"]),
                           float(obj["alpha1"]), float(obj["delta"]))
        if kind == "linear_deformed":
            return LinearDeformed(model_from_json(obj["base"]),
                                  np.asarray(obj["matrix"], dtype=float))
        if kind == "mbf":
            return MBF(ScalarField.from_json(obj["h"]))
        if kind == "gafbf":
            return GAFBF(ScalarField.from_json(obj["h"]),
                         ScalarField.from_json(obj["alpha"]), float(obj["delta"]))
        if kind == "wafbf":
            base = model_from_json(obj["base"])
            if not isinstance(base, AFBF):
                raise ValueError("wafbf base must be an afbf model")
            return WAFBF(_deformation_from_json(obj["deformation"]), base)
    except KeyError as exc:
        raise ValueError(f"field model JSON missing field {exc}") from exc
    raise ValueError(f"unknown field model kind {kind!r}")
