"""Finite-difference lattice: fields, discrete operators, quadrature and masks.

The computational domain D is a rectangle sampled on an nx-by-ny node
lattice with uniform spacing h (node (i, j) sits at (i*h, j*h)), optionally
restricted to a general shape by a boolean mask.  Masked-out nodes are
frozen at value zero, excluded from quadrature, and any finite difference
that reads them evaluates to zero, so a mask boundary behaves like a free
boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

NEUMANN = "neumann"
PERIODIC = "periodic"
_BOUNDARIES = (NEUMANN, PERIODIC)


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular lattice with a boundary mode and optional mask.

    mask[i, j] is True for nodes inside the domain.  A periodic grid must
    cover the full rectangle (no mask).
    """

    nx: int
    ny: int
    h: float
    boundary: str = NEUMANN
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid needs at least 2 nodes per axis, got {self.nx}x{self.ny}")
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        if self.boundary not in _BOUNDARIES:
            raise ValueError(f"unknown boundary mode {self.boundary!r}")
        if self.mask is not None:
            if self.boundary == PERIODIC:
                raise ValueError("periodic grids do not support masks")
            m = np.asarray(self.mask, dtype=bool)
            if m.shape != (self.nx, self.ny):
                raise ValueError(f"mask shape {m.shape} does not match grid {(self.nx, self.ny)}")
            if not m.any():
                raise ValueError("mask excludes every node")
            object.__setattr__(self, "mask", m)

    @classmethod
    def unit_square(cls, n: int, boundary: str = NEUMANN, mask: Optional[np.ndarray] = None) -> "Grid":
        """n-by-n grid on [0,1]^2 with h = 1/(n-1)."""
        return cls(n, n, 1.0 / (n - 1), boundary, mask)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    @property
    def n_inside(self) -> int:
        return int(self.mask.sum()) if self.mask is not None else self.nx * self.ny

    @property
    def domain_area(self) -> float:
        """Quadrature measure of D: h^2 times the number of unmasked nodes."""
        return self.cell_area * self.n_inside

    def xs(self) -> np.ndarray:
        return np.arange(self.nx) * self.h

    def ys(self) -> np.ndarray:
        return np.arange(self.ny) * self.h

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")

    def inside(self) -> np.ndarray:
        """Boolean inside-indicator, all-True when there is no mask."""
        if self.mask is not None:
            return self.mask
        return np.ones(self.shape, dtype=bool)

    def with_mask(self, mask: np.ndarray) -> "Grid":
        return Grid(self.nx, self.ny, self.h, self.boundary, mask)

    def same_rectangle(self, other: "Grid", rtol: float = 1e-9) -> bool:
        wx, wy = (self.nx - 1) * self.h, (self.ny - 1) * self.h
        ox, oy = (other.nx - 1) * other.h, (other.ny - 1) * other.h
        return abs(wx - ox) <= rtol * wx and abs(wy - oy) <= rtol * wy

    def active_x(self) -> np.ndarray:
        """Nodes whose forward x-difference is active (reads no masked node)."""
        act = np.zeros(self.shape, dtype=bool)
        if self.boundary == PERIODIC:
            act[:] = True
            return act
        ins = self.inside()
        act[:-1, :] = ins[:-1, :] & ins[1:, :]
        return act

    def active_y(self) -> np.ndarray:
        act = np.zeros(self.shape, dtype=bool)
        if self.boundary == PERIODIC:
            act[:] = True
            return act
        ins = self.inside()
        act[:, :-1] = ins[:, :-1] & ins[:, 1:]
        return act


@dataclass
class Field:
    """One real value per grid node; masked-out nodes hold exactly zero."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        if self.grid.mask is not None:
            v = np.where(self.grid.mask, v, 0.0)
        self.values = v

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def full(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, f: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "Field":
        X, Y = grid.meshgrid()
        return cls(grid, np.asarray(f(X, Y), dtype=float))

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def sample(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Bilinear interpolation of node values at arbitrary points."""
        return _bilinear(self.values, self.grid.h, x, y)


@dataclass
class Labels:
    """Integer phase labels per node; masked-out nodes carry label 0."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.shape:
            raise ValueError(f"labels shape {v.shape} does not match grid {self.grid.shape}")
        v = v.astype(np.int32)
        if self.grid.mask is not None:
            v = np.where(self.grid.mask, v, 0)
        self.values = v

    @property
    def n_phases(self) -> int:
        return int(self.values.max())


def _bilinear(values: np.ndarray, h: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    nx, ny = values.shape
    sx = np.asarray(x, dtype=float) / h
    sy = np.asarray(y, dtype=float) / h
    i0 = np.clip(np.floor(sx).astype(int), 0, nx - 2)
    j0 = np.clip(np.floor(sy).astype(int), 0, ny - 2)
    tx = np.clip(sx - i0, 0.0, 1.0)
    ty = np.clip(sy - j0, 0.0, 1.0)
    v00 = values[i0, j0]
    v10 = values[i0 + 1, j0]
    v01 = values[i0, j0 + 1]
    v11 = values[i0 + 1, j0 + 1]
    return (v00 * (1 - tx) * (1 - ty) + v10 * tx * (1 - ty)
            + v01 * (1 - tx) * ty + v11 * tx * ty)


def gradient_arrays(grid: Grid, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward-difference gradient components as raw arrays.

    Neumann: the one-sided difference across the rectangle edge is zero.
    Periodic: differences wrap around.  Differences at or into masked
    nodes are zero.
    """
    h = grid.h
    gx = np.zeros_like(values)
    gy = np.zeros_like(values)
    if grid.boundary == PERIODIC:
        gx[:] = (np.roll(values, -1, axis=0) - values) / h
        gy[:] = (np.roll(values, -1, axis=1) - values) / h
        return gx, gy
    gx[:-1, :] = (values[1:, :] - values[:-1, :]) / h
    gy[:, :-1] = (values[:, 1:] - values[:, :-1]) / h
    if grid.mask is not None:
        gx *= grid.active_x()
        gy *= grid.active_y()
    return gx, gy


def gradient_field(f: Field) -> tuple[Field, Field]:
    """Forward-difference gradient of a Field as a pair of Fields."""
    gx, gy = gradient_arrays(f.grid, f.values)
    return Field(f.grid, gx), Field(f.grid, gy)


def gradient_adjoint(grid: Grid, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Adjoint of the forward-difference stencil.

    Returns g with <p, (Dx u, Dy u)> = <g, u> for every u, matching
    gradient_arrays' boundary and mask handling exactly (px, py are
    assumed zero wherever the corresponding difference is inactive).
    """
    h = grid.h
    g = np.zeros_like(px)
    if grid.boundary == PERIODIC:
        g += (np.roll(px, 1, axis=0) - px) / h
        g += (np.roll(py, 1, axis=1) - py) / h
        return g
    if grid.mask is not None:
        px = px * grid.active_x()
        py = py * grid.active_y()
    g[:-1, :] -= px[:-1, :] / h
    g[1:, :] += px[:-1, :] / h
    g[:, :-1] -= py[:, :-1] / h
    g[:, 1:] += py[:, :-1] / h
    return g


def integrate(f: Field) -> float:
    """Rectangle-rule quadrature: h^2 times the sum over unmasked nodes."""
    return integrate_values(f.grid, f.values)


def integrate_values(grid: Grid, values: np.ndarray) -> float:
    if grid.mask is not None:
        return grid.cell_area * float(np.sum(values, where=grid.mask))
    return grid.cell_area * float(np.sum(values))


def refine_interpolate(f: Field, new_grid: Grid) -> Field:
    """Bilinear interpolation onto a finer grid covering the same rectangle."""
    old = f.grid
    if not old.same_rectangle(new_grid):
        raise ValueError("target grid does not cover the same rectangle")
    if new_grid.nx < old.nx or new_grid.ny < old.ny:
        raise ValueError("refine_interpolate requires the target resolution to be at least the source's")
    x = np.arange(new_grid.nx) * new_grid.h
    y = np.arange(new_grid.ny) * new_grid.h
    X, Y = np.meshgrid(x, y, indexing="ij")
    vals = _bilinear(f.values, old.h, X, Y)
    return Field(new_grid, vals)


def _polygon_mask(grid: Grid, vertices: Sequence[tuple[float, float]]) -> np.ndarray:
    """Nodes strictly inside a convex polygon given by ccw or cw vertices."""
    X, Y = grid.meshgrid()
    verts = [(float(px), float(py)) for px, py in vertices]
    k = len(verts)
    signs = []
    for a in range(k):
        x0, y0 = verts[a]
        x1, y1 = verts[(a + 1) % k]
        cross = (x1 - x0) * (Y - y0) - (y1 - y0) * (X - x0)
        signs.append(cross)
    pos = np.ones(grid.shape, dtype=bool)
    neg = np.ones(grid.shape, dtype=bool)
    for cross in signs:
        pos &= cross > 0
        neg &= cross < 0
    mask = pos | neg
    if not mask.any():
        raise ValueError("polygon mask contains no nodes")
    return mask


def make_disk_mask(grid: Grid, center: tuple[float, float], radius: float) -> np.ndarray:
    """Nodes strictly inside the disk of the given center and radius."""
    if radius <= 0:
        raise ValueError(f"disk radius must be positive, got {radius}")
    X, Y = grid.meshgrid()
    mask = (X - center[0]) ** 2 + (Y - center[1]) ** 2 < radius * radius
    if not mask.any():
        raise ValueError("disk mask contains no nodes")
    return mask


def make_triangle_mask(grid: Grid, vertices: Sequence[tuple[float, float]]) -> np.ndarray:
    """Nodes strictly inside the triangle with the given three vertices."""
    if len(vertices) != 3:
        raise ValueError("triangle mask needs exactly 3 vertices")
    return _polygon_mask(grid, vertices)


def make_hexagon_mask(grid: Grid, center: tuple[float, float], radius: float) -> np.ndarray:
    """Nodes strictly inside the regular hexagon with a vertex on the +x axis."""
    if radius <= 0:
        raise ValueError(f"hexagon radius must be positive, got {radius}")
    cx, cy = center
    verts = [(cx + radius * np.cos(a), cy + radius * np.sin(a))
             for a in np.arange(6) * (np.pi / 3.0)]
    return _polygon_mask(grid, verts)
