"""Closed-form constants of the critical-inequality machinery.

Pure numeric functions for one (p, q, Q) triple and a sphere measure:
kernel-split Young norms, Marcinkiewicz weak-type constants, the envelope
constant of the critical Gagliardo-Nirenberg bound, the exponential-class
series constant, and the sharp constant from a ground-state mass.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np


class SeriesDivergenceError(ValueError):
    """The exponential-class series diverges for this argument."""


class InconclusiveEnvelopeWarning(UserWarning):
    """Envelope supremum sits at a grid endpoint; the grid proves nothing."""


def conjugate_exponent(p: float) -> float:
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p}")
    return p / (p - 1.0)


@dataclass(frozen=True)
class GNParams:
    """Exponents and sphere measure entering the critical-GN constants."""

    p: float
    q: float
    Q: float
    sphere: float

    def __post_init__(self):
        if not (1.0 < self.p <= self.q < math.inf):
            raise ValueError(f"need 1 < p <= q < inf, got p={self.p}, q={self.q}")
        if self.Q <= 0 or self.sphere <= 0:
            raise ValueError("Q and sphere measure must be positive")
        if not (0.0 <= self.lam < self.Q):
            raise ValueError("derived lambda = Q(1/p - 1/q) is out of [0, Q)")

    @property
    def p_prime(self) -> float:
        return conjugate_exponent(self.p)

    @property
    def lam(self) -> float:
        return self.Q * (1.0 / self.p - 1.0 / self.q)


def kernel_split_norms(lam: float, s: float, p_tilde: float, Q: float, sphere: float):
    """Young-inequality norms of the near/far split of the Riesz kernel.

    Splitting |x|^(lam-Q) at radius s gives, by polar integration,
    ||K1||_1 = |P| s^lam / lam and ||K2||_{pt'} with pt' conjugate to the
    given p_tilde and 1/qt = 1/pt - lam/Q.
    """
    if not (0.0 < lam < Q):
        raise ValueError(f"need 0 < lambda < Q, got lambda={lam}, Q={Q}")
    if s <= 0:
        raise ValueError("split radius must be positive")
    if p_tilde < 1:
        raise ValueError("p_tilde must be >= 1")
    inv_qt = 1.0 / p_tilde - lam / Q
    if inv_qt <= 0:
        raise ValueError(
            "far-kernel norm diverges: 1/q_tilde = 1/p_tilde - lambda/Q <= 0"
        )
    q_tilde = 1.0 / inv_qt
    k1 = sphere * s**lam / lam
    if p_tilde == 1.0:
        k2 = s ** (lam - Q)  # pt' = inf: sup of the far kernel
    else:
        pt_prime = conjugate_exponent(p_tilde)
        k2 = (sphere * q_tilde / (Q * pt_prime)) ** (1.0 / pt_prime) * s ** (
            lam - Q / p_tilde
        )
    return k1, k2


class WeakTypeConstants(NamedTuple):
    m1: float
    m2: float
    theta: float


def _interpolation_pairs(p: float, q: float):
    """(p1, q1), (p2, q2) used in the two weak-type estimates."""
    q1 = 1.0 / (1.0 - 1.0 / p + 1.0 / q)
    p2 = 1.0 / (1.0 / p - 1.0 / q + 1.0 / (q + 1.0))
    q2 = q + 1.0
    return (1.0, q1), (p2, q2)


def weak_type_constants(params: GNParams) -> WeakTypeConstants:
    """Weak-type (1, q1) and (p2, q2) constants of the Riesz potential.

    M1 comes from the near-kernel split with L^1 input; M2 from the split at
    (p2, q2); theta is the interpolation weight recovering (p, q).
    """
    p, q, Q, sphere = params.p, params.q, params.Q, params.sphere
    if not q > p:
        raise ValueError("weak-type constants need q > p")
    (_, q1), (p2, q2) = _interpolation_pairs(p, q)
    theta = (1.0 - 1.0 / p) / (1.0 - 1.0 / p + 1.0 / q - 1.0 / (q + 1.0))
    m1 = (sphere * q1 / (Q * (q1 - 1.0))) ** (1.0 / q1)
    m2 = (
        (sphere * q2 / Q) ** (1.0 - 1.0 / p2 + 1.0 / q2)
        * (p2 - 1.0) ** ((p2 - 1.0) * (q2 - p2) / (p2 * q2))
        / (p2 ** (1.0 - 1.0 / p2 - (2.0 * p2 - 1.0) / q2) * (q2 - p2) ** (p2 / q2))
    )
    return WeakTypeConstants(m1=m1, m2=m2, theta=theta)


def marcinkiewicz_gn_bound(params: GNParams) -> float:
    """Strong (p, q) bound of the Riesz potential via Marcinkiewicz.

    4 (q + (pq - q + p) / (q (p-1)))^(1/q) M1^(1-theta) M2^theta.
    """
    p, q = params.p, params.q
    m1, m2, theta = weak_type_constants(params)
    factor = 4.0 * (q + (p * q - q + p) / (q * (p - 1.0))) ** (1.0 / q)
    return factor * m1 ** (1.0 - theta) * m2**theta


def weak_type_asymptotics(p: float, Q: float, sphere: float):
    """Large-q limits: M1 -> (|P| p / Q)^(1-1/p), q^(1/p-1) M2 -> same with (p-1)/p."""
    lim_m1 = (sphere * p / Q) ** (1.0 - 1.0 / p)
    lim_m2 = (sphere * (p - 1.0) / (Q * p)) ** (1.0 - 1.0 / p)
    return lim_m1, lim_m2


def default_q_grid(p: float, num: int = 400) -> np.ndarray:
    """Logarithmic grid on (p + 1e-3, 1e4)."""
    return np.geomspace(p + 1e-3, 1e4, num)


def c1_envelope(p: float, Q: float, sphere: float, q_grid=None) -> float:
    """Grid supremum of the Marcinkiewicz bound divided by q^(1-1/p).

    A valid critical-GN constant for every q in the grid.  The supremum is
    expected to warn when attained at a grid endpoint: the bound inflates
    like 1/(q - p) near q = p, so on any grid reaching down toward p the sup
    sits at the left edge and the envelope is certified but conservative.
    """
    if q_grid is None:
        q_grid = default_q_grid(p)
    q_grid = np.asarray(q_grid, dtype=float)
    if q_grid.size < 2 or np.any(q_grid <= p):
        raise ValueError("q_grid must have >= 2 points, all > p")
    q_grid = np.sort(q_grid)
    vals = np.array(
        [
            marcinkiewicz_gn_bound(GNParams(p=p, q=qq, Q=Q, sphere=sphere))
            / qq ** (1.0 - 1.0 / p)
            for qq in q_grid
        ]
    )
    k = int(np.argmax(vals))
    if k in (0, len(q_grid) - 1):
        warnings.warn(
            f"envelope supremum attained at grid endpoint q={q_grid[k]:.4g}; "
            "the grid does not bracket the supremum",
            InconclusiveEnvelopeWarning,
            stacklevel=2,
        )
    return float(vals[k])


#: Convergence threshold of the exponential-class series in x = p' C1^p' alpha.
SERIES_RADIUS = 1.0 / math.e


def trudinger_constant(
    alpha: float,
    c1: float,
    p: float,
    tol: float = 1e-12,
    max_terms: int = 10**5,
) -> float:
    """Partial sum of C2(alpha) = sum_{k >= p-1} k^k / k! (p' C1^p' alpha)^k.

    Requires x = p' C1^p' alpha < 1/e (ratio test: k^k/k! ~ e^k).  Terms are
    accumulated until the next one falls below tol times the running sum;
    non-integer p starts at k = ceil(p - 1).
    """
    if alpha <= 0 or c1 <= 0:
        raise ValueError("alpha and C1 must be positive")
    pp = conjugate_exponent(p)
    x = pp * c1**pp * alpha
    if x >= SERIES_RADIUS:
        raise SeriesDivergenceError(
            f"series argument x = p' C1^p' alpha = {x:.6g} >= 1/e; "
            "no finite constant at this alpha"
        )
    k0 = max(1, math.ceil(p - 1.0))
    # term at k0 computed in logs to stay finite for large k0
    log_t = k0 * math.log(k0) - math.lgamma(k0 + 1.0) + k0 * math.log(x)
    term = math.exp(log_t)
    total = term
    k = k0
    while k - k0 < max_terms:
        k += 1
        term *= x * (1.0 + 1.0 / (k - 1.0)) ** (k - 1.0)
        total += term
        if term < tol * total:
            return total
    raise SeriesDivergenceError(
        f"series did not reach tol={tol} within {max_terms} terms (x={x:.6g})"
    )


def trudinger_alpha_threshold(c1: float, p: float) -> float:
    """Largest alpha below which trudinger_constant converges: 1/(e p' C1^p')."""
    pp = conjugate_exponent(p)
    return 1.0 / (math.e * pp * c1**pp)


def equivalence_alpha(a_const: float, p: float) -> float:
    """Exponential-class threshold from the GN constant: 1/(e p' A^p')."""
    if a_const <= 0:
        raise ValueError("A must be positive")
    pp = conjugate_exponent(p)
    return 1.0 / (math.e * pp * a_const**pp)


def gn_constant_from_alpha(alpha_tilde: float, p: float) -> float:
    """Inverse of :func:`equivalence_alpha`: A = (1/(e p' alpha))^(1/p')."""
    if alpha_tilde <= 0:
        raise ValueError("alpha must be positive")
    pp = conjugate_exponent(p)
    return (1.0 / (math.e * pp * alpha_tilde)) ** (1.0 / pp)


def best_constant_from_mass(
    p: float, q: float, mass: Optional[float] = None, d: Optional[float] = None
) -> float:
    """Sharp constant of the q-powered critical GN inequality from a ground state.

    C = q^(-q+q/p) (q/p) ((q-p)/p)^((p-q)/p) mass^((p-q)/p), with
    mass = ||phi||_p^p.  The least energy d converts via mass = p^2 d/(q-p);
    when both are passed the two routes must agree to 1e-14.
    """
    if not q > p or not p > 1:
        raise ValueError(f"need 1 < p < q, got p={p}, q={q}")
    if mass is None and d is None:
        raise ValueError("pass mass or d")

    def from_mass(m):
        if m <= 0:
            raise ValueError("mass must be positive")
        return (
            q ** (-q + q / p) * (q / p) * ((q - p) / p) ** ((p - q) / p) * m ** ((p - q) / p)
        )

    if mass is not None and d is not None:
        via_mass = from_mass(mass)
        via_d = from_mass(p * p * d / (q - p))
        rel = abs(via_mass - via_d) / via_mass
        if rel > 1e-14:
            raise ValueError(
                f"mass and d routes disagree by {rel:.3e}: inputs violate "
                "mass = p^2 d / (q - p)"
            )
        return via_mass
    if mass is None:
        mass = p * p * d / (q - p)
    return from_mass(mass)


def plain_constant_from_sharp(c_gn: float, q: float) -> float:
    """Per-norm normalization C1 = C^(1/q) of the q-powered sharp constant."""
    return c_gn ** (1.0 / q)


@dataclass
class ConstantsReport:
    """All closed-form constants for one (p, q, Q) triple."""

    p: float
    q: float
    Q: float
    sphere: float
    quasi_norm: str
    m1: float
    m2: float
    theta: float
    marcinkiewicz_bound: float
    c1_envelope: float
    envelope_inconclusive: bool
    alpha_threshold: float
    alpha_tilde: float
    q_grid_min: float
    q_grid_max: float
    q_grid_size: int
    c2_of_alpha: Callable[[float], float] = field(repr=False, compare=False, default=None)

    def validate(self):
        vals = [self.m1, self.m2, self.marcinkiewicz_bound, self.c1_envelope,
                self.alpha_threshold, self.alpha_tilde]
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise ValueError("constants report contains a non-finite or non-positive entry")
        if not (0.0 < self.theta < 1.0):
            raise ValueError("theta must lie in (0, 1)")

    def to_json(self) -> str:
        doc = {
            k: v
            for k, v in self.__dict__.items()
            if k != "c2_of_alpha"
        }
        doc["schema_version"] = 1
        return json.dumps(doc, sort_keys=True, indent=2)


def compute_constants_report(
    p: float, q: float, Q: float, sphere: float, quasi_norm: str = "euclidean",
    q_grid=None,
) -> ConstantsReport:
    if q_grid is None:
        q_grid = default_q_grid(p)
    q_grid = np.sort(np.asarray(q_grid, dtype=float))
    params = GNParams(p=p, q=q, Q=Q, sphere=sphere)
    m1, m2, theta = weak_type_constants(params)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", InconclusiveEnvelopeWarning)
        env = c1_envelope(p, Q, sphere, q_grid)
        inconclusive = any(
            issubclass(w.category, InconclusiveEnvelopeWarning) for w in caught
        )
    report = ConstantsReport(
        p=p,
        q=q,
        Q=Q,
        sphere=sphere,
        quasi_norm=quasi_norm,
        m1=m1,
        m2=m2,
        theta=theta,
        marcinkiewicz_bound=marcinkiewicz_gn_bound(params),
        c1_envelope=env,
        envelope_inconclusive=inconclusive,
        alpha_threshold=trudinger_alpha_threshold(env, p),
        alpha_tilde=equivalence_alpha(env, p),
        q_grid_min=float(q_grid[0]),
        q_grid_max=float(q_grid[-1]),
        q_grid_size=int(q_grid.size),
        c2_of_alpha=lambda a, _env=env, _p=p: trudinger_constant(a, _env, _p),
    )
    report.validate()
    return report
