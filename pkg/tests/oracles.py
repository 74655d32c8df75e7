"""Independent oracles: every frozen expected value in the suite comes from here.

These deliberately avoid the library's own code paths: the ground-state mass
comes from a radial ODE shooting method, series constants from mpmath
partial sums and a Lambert-W identity, kernel norms from adaptive quadrature,
and the Koranyi ball from midpoint quadrature with Richardson extrapolation.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad, solve_ivp


def shoot_ground_state_2d_cubic(a: float, r_max: float = 25.0):
    """Integrate u'' + u'/r - u + u^3 = 0 from a series start at r ~ 0.

    Returns +1 if u crosses zero (initial height too large), -1 if u' turns
    positive while u > 0 (too small), 0 if neither happened by r_max.
    """

    def rhs(r, y):
        u, v = y
        return [v, u - u**3 - v / r]

    r0 = 1e-8
    u0 = a + (a - a**3) / 4.0 * r0**2
    v0 = (a - a**3) / 2.0 * r0

    cross = lambda r, y: y[0]
    cross.terminal = True
    cross.direction = -1
    turn = lambda r, y: y[1]
    turn.terminal = True
    turn.direction = 1

    sol = solve_ivp(
        rhs, (r0, r_max), [u0, v0], events=(cross, turn),
        rtol=1e-12, atol=1e-14, method="DOP853",
    )
    if sol.t_events[0].size:
        return 1
    if sol.t_events[1].size:
        return -1
    return 0


def townes_initial_height(lo: float = 2.0, hi: float = 2.5, iters: int = 60) -> float:
    """Bisect the shooting parameter of the 2D cubic ground state."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if shoot_ground_state_2d_cubic(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def townes_mass_shooting(r_max: float = 25.0) -> float:
    """||phi||_2^2 = 2 pi int u^2 r dr along the shot trajectory."""
    a = townes_initial_height()

    def rhs(r, y):
        u, v, m = y
        return [v, u - u**3 - v / r, 2.0 * math.pi * r * u * u]

    r0 = 1e-8
    sol = solve_ivp(
        rhs,
        (r0, r_max),
        [a + (a - a**3) / 4.0 * r0**2, (a - a**3) / 2.0 * r0, 0.0],
        rtol=1e-12,
        atol=1e-14,
        method="DOP853",
    )
    return float(sol.y[2, -1])


def exp_series_mpmath(x: float, k0: int = 1, terms: int = 50) -> float:
    """sum_{k >= k0} k^k / k! x^k by extended-precision partial sums."""
    import mpmath as mp

    with mp.workdps(50):
        xs = mp.mpf(repr(x))
        total = mp.mpf(0)
        for k in range(k0, k0 + terms):
            total += mp.power(k, k) / mp.factorial(k) * xs**k
        return float(total)


def exp_series_lambertw(x: float) -> float:
    """sum_{k >= 1} k^k / k! x^k = T/(1 - T) with the tree function T = -W(-x)."""
    from scipy.special import lambertw

    t = -lambertw(-x).real
    return float(t / (1.0 - t))


def kernel_norms_quadrature(lam: float, s: float, p_tilde: float, Q: float, sphere: float):
    """Near/far Riesz-kernel norms by adaptive radial quadrature."""
    k1, _ = quad(lambda r: sphere * r ** (lam - 1.0), 0.0, s)
    if p_tilde == 1.0:
        return k1, s ** (lam - Q)
    ppr = p_tilde / (p_tilde - 1.0)
    val, _ = quad(lambda r: sphere * r ** ((lam - Q) * ppr + Q - 1.0), s, np.inf)
    return k1, val ** (1.0 / ppr)


def koranyi_sphere_midpoint(m: int, c: float = 16.0) -> float:
    """Q * vol of the unit Koranyi ball by nested midpoint quadrature.

    The t integral of the indicator is its exact extent; (x, y) use an
    m x m midpoint rule on [-1, 1]^2.
    """
    h = 2.0 / m
    x = -1.0 + h * (np.arange(m) + 0.5)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    rho4 = (xx**2 + yy**2) ** 2
    extent = np.where(rho4 <= 1.0, 2.0 * np.sqrt(np.maximum(1.0 - rho4, 0.0)) / math.sqrt(c), 0.0)
    return 4.0 * float(extent.sum()) * h * h


def koranyi_sphere_richardson(m: int = 512) -> float:
    """Two-resolution Richardson extrapolation of the midpoint oracle."""
    v1, v2, v4 = (koranyi_sphere_midpoint(k) for k in (m, 2 * m, 4 * m))
    order = math.log2(abs(v2 - v1) / abs(v4 - v2))
    return v4 + (v4 - v2) / (2.0**order - 1.0)


def lp_norm_fsum(values: np.ndarray, p: float, cell: float) -> float:
    """Compensated-summation quadrature norm, independent of numpy reductions."""
    return math.fsum(abs(float(v)) ** p for v in values.ravel()) ** (1.0 / p) * cell ** (1.0 / p)
