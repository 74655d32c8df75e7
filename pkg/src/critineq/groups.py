"""Model homogeneous groups: dilations, quasi-norms, and the sphere measure.

Two concrete models are provided: abelian ``euclidean(n)`` (all dilation
weights 1) and the first Heisenberg group ``heisenberg1`` with weights
(1, 1, 2) and the Koranyi gauge.  Everything downstream (constants,
verification reports) is parametrised by a :class:`GroupDescriptor`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss


class InvalidDescriptorError(ValueError):
    """Descriptor fields violate the model-group invariants."""


class AccuracyError(RuntimeError):
    """A quadrature did not meet the requested accuracy at this resolution."""


#: Constant in the Koranyi gauge ((x^2+y^2)^2 + KORANYI_C * t^2)^(1/4).
#: Any positive value gives a homogeneous quasi-norm; 16 is the common
#: convention that makes the gauge arise from |z|^2 + 4it on C x R.
KORANYI_C = 16.0


def homogeneous_dimension(weights) -> float:
    """Sum of the dilation weights."""
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        raise InvalidDescriptorError("weight list is empty")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise InvalidDescriptorError(f"weights must be positive finite, got {weights}")
    return float(w.sum())


@dataclass(frozen=True)
class GroupDescriptor:
    """Dilation structure of a model group plus a chosen quasi-norm.

    Attributes
    ----------
    name : str
        ``"euclidean{n}"`` or ``"heisenberg1"``.
    weights : tuple of float
        Dilation weights, sorted ascending.
    Q : float
        Homogeneous dimension, sum of the weights.
    gamma : float
        1 on stratified models (all abelian weights 1, or heisenberg1),
        otherwise the largest weight.
    quasi_norm : str
        One of ``"euclidean"``, ``"anisotropic"``, ``"koranyi"``.
    """

    name: str
    weights: tuple
    Q: float
    gamma: float
    quasi_norm: str
    koranyi_constant: float = KORANYI_C

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if not np.all(np.diff(w) >= 0):
            raise InvalidDescriptorError("weights must be sorted ascending")
        q = homogeneous_dimension(w)
        if abs(q - self.Q) > 1e-12 * max(1.0, abs(q)):
            raise InvalidDescriptorError(f"Q={self.Q} does not equal sum of weights {q}")
        if self.quasi_norm not in ("euclidean", "anisotropic", "koranyi"):
            raise InvalidDescriptorError(f"unknown quasi-norm tag {self.quasi_norm!r}")
        if self.quasi_norm == "euclidean" and not np.allclose(w, 1.0):
            raise InvalidDescriptorError("euclidean norm requires all weights 1")
        if self.quasi_norm == "koranyi" and tuple(w) != (1.0, 1.0, 2.0):
            raise InvalidDescriptorError("koranyi norm is specific to weights (1, 1, 2)")

    @property
    def n(self) -> int:
        return len(self.weights)

    def norm(self, x):
        """Homogeneous quasi-norm of points ``x`` with shape (..., n)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise ValueError(f"points have dimension {x.shape[-1]}, expected {self.n}")
        if self.quasi_norm == "euclidean":
            return np.sqrt(np.sum(x * x, axis=-1))
        if self.quasi_norm == "koranyi":
            rho2 = x[..., 0] ** 2 + x[..., 1] ** 2
            return (rho2**2 + self.koranyi_constant * x[..., 2] ** 2) ** 0.25
        # anisotropic: (sum |x_i|^(2M/nu_i))^(1/2M), M = max weight
        m = max(self.weights)
        acc = np.zeros(x.shape[:-1])
        for i, nu in enumerate(self.weights):
            acc = acc + np.abs(x[..., i]) ** (2.0 * m / nu)
        return acc ** (1.0 / (2.0 * m))

    def to_json(self) -> str:
        return json.dumps(
            {
                "name": self.name,
                "weights": list(self.weights),
                "Q": self.Q,
                "gamma": self.gamma,
                "quasi_norm": self.quasi_norm,
                "koranyi_constant": self.koranyi_constant,
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "GroupDescriptor":
        doc = json.loads(text)
        return GroupDescriptor(
            name=doc["name"],
            weights=tuple(float(v) for v in doc["weights"]),
            Q=float(doc["Q"]),
            gamma=float(doc["gamma"]),
            quasi_norm=doc["quasi_norm"],
            koranyi_constant=float(doc.get("koranyi_constant", KORANYI_C)),
        )


def euclidean(n: int, quasi_norm: str = "euclidean") -> GroupDescriptor:
    """Abelian R^n with weights 1 (stratified, gamma = 1)."""
    if n < 1:
        raise InvalidDescriptorError("dimension must be >= 1")
    return GroupDescriptor(
        name=f"euclidean{n}",
        weights=(1.0,) * n,
        Q=float(n),
        gamma=1.0,
        quasi_norm=quasi_norm,
    )


def heisenberg1() -> GroupDescriptor:
    """First Heisenberg group: weights (1, 1, 2), Q = 4, Koranyi gauge."""
    return GroupDescriptor(
        name="heisenberg1",
        weights=(1.0, 1.0, 2.0),
        Q=4.0,
        gamma=1.0,
        quasi_norm="koranyi",
    )


def anisotropic(weights) -> GroupDescriptor:
    """Abelian model with general positive weights and the anisotropic gauge.

    Stratified only when all weights are 1; otherwise gamma is the largest
    weight.
    """
    w = tuple(sorted(float(v) for v in weights))
    q = homogeneous_dimension(w)
    gamma = 1.0 if all(v == 1.0 for v in w) else w[-1]
    return GroupDescriptor(
        name=f"anisotropic{len(w)}",
        weights=w,
        Q=q,
        gamma=gamma,
        quasi_norm="anisotropic",
    )


def dilate(x, r: float, descriptor: GroupDescriptor):
    """Group dilation: component i is scaled by r**weight_i."""
    if not r > 0:
        raise ValueError(f"dilation factor must be positive, got {r}")
    x = np.asarray(x, dtype=float)
    scale = np.array([r**nu for nu in descriptor.weights])
    return x * scale


def _gauss_nodes(m: int, lo: float, hi: float):
    z, w = leggauss(m)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return mid + half * z, half * w


def _superball_volume(powers, m: int) -> float:
    """Volume of {sum_i |x_i|^a_i <= 1} by iterated 1D Gauss quadrature.

    With x_i = (budget)^(1/a_i) sin(theta) the nested integral factorises
    into one smooth 1D integral per coordinate.
    """
    a = np.asarray(powers, dtype=float)
    n = a.size
    theta, w = _gauss_nodes(m, 0.0, 0.5 * math.pi)
    vol = 2.0**n
    tail = np.cumsum((1.0 / a)[::-1])[::-1]  # tail[j] = sum_{i>=j} 1/a_i
    for j in range(n):
        s_rest = tail[j] - 1.0 / a[j]
        integrand = np.cos(theta) * (1.0 - np.sin(theta) ** a[j]) ** s_rest
        vol *= float(np.dot(w, integrand))
    return vol


def _koranyi_volume(m: int, c: float = KORANYI_C) -> float:
    """Volume of the unit Koranyi ball ((x^2+y^2)^2 + c t^2)^(1/4) <= 1.

    The t-extent given (x, y) is sqrt(1 - rho^4)/sqrt(c); sine substitutions
    in x and y leave a smooth integrand on [0, pi/2]^2.
    """
    theta1, w1 = _gauss_nodes(m, 0.0, 0.5 * math.pi)
    theta2, w2 = _gauss_nodes(m, 0.0, 0.5 * math.pi)
    s1, c1 = np.sin(theta1)[:, None], np.cos(theta1)[:, None]
    s2, c2 = np.sin(theta2)[None, :], np.cos(theta2)[None, :]
    rho2 = s1**2 + (c1 * s2) ** 2
    integrand = c1**3 * c2**2 * np.sqrt(1.0 + rho2)
    quadrant = float(w1 @ integrand @ w2)
    # x,y quadrant symmetry (x4), t symmetry (x2), t-extent factor 1/sqrt(c)
    return 8.0 * quadrant / math.sqrt(c)


def unit_ball_volume(descriptor: GroupDescriptor, nodes: int = 96) -> float:
    """Volume of the unit quasi-ball at a fixed quadrature resolution."""
    if descriptor.quasi_norm == "koranyi":
        return _koranyi_volume(nodes, descriptor.koranyi_constant)
    if descriptor.quasi_norm == "euclidean":
        powers = [2.0] * descriptor.n
    else:
        m = max(descriptor.weights)
        powers = [2.0 * m / nu for nu in descriptor.weights]
    if descriptor.n == 1:
        return 2.0
    return _superball_volume(powers, nodes)


def sphere_measure(
    descriptor: GroupDescriptor,
    nodes: int = 96,
    tol: float = 1e-6,
    return_error: bool = False,
):
    """Surface measure |P| of the unit quasi-sphere, as Q * vol(unit ball).

    The polar decomposition applied to the indicator of the unit ball gives
    vol(B_1) = |P| / Q.  Deterministic tensor Gauss quadrature; the value at
    ``nodes`` and ``2 * nodes`` must agree within ``tol`` or an
    :class:`AccuracyError` is raised.
    """
    coarse = descriptor.Q * unit_ball_volume(descriptor, nodes)
    fine = descriptor.Q * unit_ball_volume(descriptor, 2 * nodes)
    err = abs(fine - coarse)
    if err > tol:
        raise AccuracyError(
            f"sphere measure changed by {err:.3e} when doubling resolution "
            f"(tol {tol:.1e}); increase nodes"
        )
    if return_error:
        return fine, err
    return fine
