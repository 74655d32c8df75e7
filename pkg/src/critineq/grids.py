"""Periodic grids, sampled fields, and quadrature.

A :class:`Field` is the discrete stand-in for a function on the group: real
samples on a centred periodic box with rectangle-rule quadrature (spectrally
accurate for smooth periodic integrands, and exactly paired with the FFT used
by :mod:`critineq.spectral`).
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple, Union

import numpy as np

#: Default cap on total grid points; grids above this raise at construction.
DEFAULT_MAX_POINTS = 2**26


class LocalizationWarning(UserWarning):
    """Field mass touches the box boundary; domain truncation is suspect."""


class EmptySetWarning(UserWarning):
    """set_integral received a selection with no grid points."""


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic box [-L/2, L/2)^n with N points per dimension."""

    n: int
    L: float
    N: int
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.L <= 0:
            raise ValueError("box side must be positive")
        if self.N < 8 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 8, got {self.N}")
        if self.N**self.n > self.max_points:
            raise ValueError(
                f"grid has {self.N**self.n} points, over the budget {self.max_points}"
            )

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def cell(self) -> float:
        """Quadrature weight of one cell, h^n."""
        return self.h**self.n

    @property
    def volume(self) -> float:
        return self.L**self.n

    def axis(self) -> np.ndarray:
        """1D coordinates -L/2 + i*h."""
        return -0.5 * self.L + self.h * np.arange(self.N)

    def coords(self):
        """Broadcastable coordinate arrays, one per dimension."""
        ax = self.axis()
        out = []
        for i in range(self.n):
            shape = [1] * self.n
            shape[i] = self.N
            out.append(ax.reshape(shape))
        return out

    def radius_sq(self) -> np.ndarray:
        r2 = np.zeros(self.shape)
        for c in self.coords():
            r2 = r2 + c * c
        return r2


@dataclass(frozen=True)
class Field:
    """Real function samples on a periodic grid. Values are immutable."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains NaN or Inf")
        v = v.copy() if v.flags.writeable else v
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "Field":
        return Field(self.grid, np.asarray(values, dtype=float))


def constant_field(grid: PeriodicGrid, value: float) -> Field:
    return Field(grid, np.full(grid.shape, float(value)))


def gaussian_field(grid, width: float, center=None, amplitude: float = 1.0) -> Field:
    """exp(-|x - center|^2 / (2 width^2)), the workhorse localized profile."""
    if center is None:
        center = [0.0] * grid.n
    r2 = np.zeros(grid.shape)
    for c, x0 in zip(grid.coords(), center):
        r2 = r2 + (c - x0) ** 2
    return Field(grid, amplitude * np.exp(-r2 / (2.0 * width**2)))


def lp_norm(f: Field, p: float) -> float:
    """Discrete L^p norm (sum |f|^p h^n)^(1/p); p = inf gives max |f|."""
    if p != np.inf and p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    a = np.abs(f.values)
    if p == np.inf:
        return float(a.max())
    if p == 1:
        return float(a.sum() * f.grid.cell)
    if p == 2:
        return float(np.sqrt(np.sum(a * a) * f.grid.cell))
    return float((np.sum(a**p) * f.grid.cell) ** (1.0 / p))


def inner(f: Field, g: Field) -> float:
    """Quadrature inner product sum f*g*h^n."""
    return float(np.sum(f.values * g.values) * f.grid.cell)


class SetIntegral(NamedTuple):
    value: float
    measure: float
    empty: bool


def set_integral(f: Field, omega: Union[np.ndarray, Callable]) -> SetIntegral:
    """Integral of f over the selected cells, plus the measure of the selection.

    ``omega`` is a boolean mask over the grid or a predicate taking the
    broadcastable coordinate arrays.  An empty selection returns (0, 0) and
    warns.
    """
    if callable(omega):
        mask = np.broadcast_to(omega(*f.grid.coords()), f.grid.shape)
    else:
        mask = np.asarray(omega, dtype=bool)
        if mask.shape != f.grid.shape:
            raise ValueError("mask shape does not match grid")
    count = int(mask.sum())
    if count == 0:
        warnings.warn("set_integral over an empty selection", EmptySetWarning)
        return SetIntegral(0.0, 0.0, True)
    value = float(f.values[mask].sum() * f.grid.cell)
    return SetIntegral(value, count * f.grid.cell, False)


def boundary_ratio(f: Field, shell: int = 1) -> float:
    """max |f| on the outermost cells relative to max |f| overall."""
    a = np.abs(f.values)
    peak = a.max()
    if peak == 0.0:
        return 0.0
    worst = 0.0
    for ax in range(f.grid.n):
        sl_lo = [slice(None)] * f.grid.n
        sl_lo[ax] = slice(0, shell)
        sl_hi = [slice(None)] * f.grid.n
        sl_hi[ax] = slice(f.grid.N - shell, f.grid.N)
        worst = max(worst, a[tuple(sl_lo)].max(), a[tuple(sl_hi)].max())
    return float(worst / peak)


def is_localized(f: Field, threshold: float = 1e-10, shell: int = 1) -> bool:
    return boundary_ratio(f, shell) <= threshold


def warn_if_not_localized(f: Field, threshold: float = 1e-10, what: str = "field"):
    ratio = boundary_ratio(f)
    if ratio > threshold:
        warnings.warn(
            f"{what} has boundary magnitude {ratio:.2e} of its peak "
            f"(threshold {threshold:.0e}); box-truncation error is not controlled",
            LocalizationWarning,
            stacklevel=3,
        )


def dilate_field(f: Field, m: int) -> Field:
    """Samples of x -> f(m x) for a positive integer factor (exact on the grid).

    The field is treated as a function on R^n supported in the box: points
    where m*x leaves the box map to zero instead of wrapping, so the usual
    scaling of integrals (factor m^-n per power) holds for localized fields.
    """
    if m < 1 or int(m) != m:
        raise ValueError("dilation factor must be a positive integer")
    m = int(m)
    N = f.grid.N
    src = m * np.arange(N) - (m - 1) * (N // 2)
    valid = (src >= 0) & (src < N)
    v = f.values
    for ax in range(f.grid.n):
        taken = np.take(v, np.clip(src, 0, N - 1), axis=ax)
        shape = [1] * f.grid.n
        shape[ax] = N
        v = np.where(valid.reshape(shape), taken, 0.0)
    return Field(f.grid, v)


def translate_field(f: Field, shifts) -> Field:
    """Periodic translation by whole cells (exact symmetry of the grid)."""
    v = f.values
    for ax, s in enumerate(shifts):
        v = np.roll(v, int(s), axis=ax)
    return Field(f.grid, v)


def save_field(f: Field, path) -> None:
    """Write flat float64 binary plus a {n, L, N} JSON sidecar."""
    path = Path(path)
    path.with_suffix(".bin").write_bytes(np.ascontiguousarray(f.values).tobytes())
    sidecar = {"n": f.grid.n, "L": f.grid.L, "N": f.grid.N}
    path.with_suffix(".json").write_text(json.dumps(sidecar, sort_keys=True))


def load_field(path) -> Field:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    grid = PeriodicGrid(n=int(meta["n"]), L=float(meta["L"]), N=int(meta["N"]))
    raw = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype=np.float64)
    return Field(grid, raw.reshape(grid.shape))


def export_csv(f: Field, path, axes=(0,)) -> None:
    """CSV of a 1D or 2D slice through the box centre."""
    if len(axes) not in (1, 2):
        raise ValueError("CSV export supports 1D or 2D slices")
    idx = [f.grid.N // 2] * f.grid.n
    ax = f.grid.axis()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if len(axes) == 1:
            a0 = axes[0]
            w.writerow([f"x{a0}", "value"])
            sel = list(idx)
            for i in range(f.grid.N):
                sel[a0] = i
                w.writerow([ax[i], f.values[tuple(sel)]])
        else:
            a0, a1 = axes
            w.writerow([f"x{a0}", f"x{a1}", "value"])
            sel = list(idx)
            for i in range(f.grid.N):
                for j in range(f.grid.N):
                    sel[a0], sel[a1] = i, j
                    w.writerow([ax[i], ax[j], f.values[tuple(sel)]])
