"""Uniform box grids on [-R, R]^N with zero-boundary nodal functions.

The continuous problem is posed on the whole space; computations truncate it
to a box with homogeneous Dirichlet boundary and a uniform tensor grid.  The
weighted norm

    ||u|| = ( integral |grad u|^p + V(x) |u|^p )^(1/p)

is discretized with the same cell-based gradient quadrature as the energy in
:mod:`plmp.frozen` (trapezoid weights for the nodal terms), so that
``energy(u) == w_norm(u)^p / p`` holds exactly when the nonlinearity is zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

__all__ = [
    "Grid",
    "GridFunction",
    "VectorField",
    "build_grid",
    "gradient_field",
    "w_norm",
    "quad_norm",
]


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid on [-radius, radius]^dim."""

    dim: int
    radius: float
    points_per_axis: int

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be positive and finite, got {self.radius}")
        if self.points_per_axis < 3:
            raise ValueError(f"points_per_axis must be >= 3, got {self.points_per_axis}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.radius / (self.points_per_axis - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def n_nodes(self) -> int:
        return self.points_per_axis**self.dim

    def axis_coords(self) -> np.ndarray:
        return np.linspace(-self.radius, self.radius, self.points_per_axis)

    def node_coords(self) -> np.ndarray:
        """Coordinates of all nodes, shape (n_nodes, dim), C-order."""
        x = self.axis_coords()
        if self.dim == 1:
            return x[:, None]
        a, b = np.meshgrid(x, x, indexing="ij")
        return np.column_stack([a.ravel(), b.ravel()])

    def quad_weights(self) -> np.ndarray:
        """Trapezoid quadrature weights per node, flat."""
        w1 = np.full(self.points_per_axis, self.spacing)
        w1[0] *= 0.5
        w1[-1] *= 0.5
        if self.dim == 1:
            return w1
        return np.outer(w1, w1).ravel()

    def boundary_mask(self) -> np.ndarray:
        """True at nodes on the box boundary, flat."""
        m = self.points_per_axis
        mask = np.zeros(self.shape, dtype=bool)
        if self.dim == 1:
            mask[0] = mask[-1] = True
        else:
            mask[0, :] = mask[-1, :] = True
            mask[:, 0] = mask[:, -1] = True
        return mask.ravel()


def build_grid(dim: int, radius: float, points_per_axis: int) -> Grid:
    return Grid(dim=dim, radius=radius, points_per_axis=points_per_axis)


@dataclass
class GridFunction:
    """Nodal scalar field with zero values on the box boundary.

    ``values`` is flat in C-order over the grid shape.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"values must be flat with {self.grid.n_nodes} entries, got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")
        bnd = self.grid.boundary_mask()
        if np.any(self.values[bnd] != 0.0):
            raise ValueError("boundary nodes must carry exact zeros")

    @property
    def reshaped(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n_nodes))

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        """Sample ``fn`` on the nodes and clamp the boundary to zero."""
        vals = np.asarray(fn(grid.node_coords()), dtype=float).reshape(grid.n_nodes).copy()
        vals[grid.boundary_mask()] = 0.0
        return cls(grid, vals)


@dataclass
class VectorField:
    """Nodal vector field; one flat component array per axis."""

    grid: Grid
    components: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.components) != self.grid.dim:
            raise ValueError("one component per axis required")
        comps = []
        for c in self.components:
            c = np.asarray(c, dtype=float)
            if c.shape != (self.grid.n_nodes,):
                raise ValueError("components must be flat nodal arrays")
            comps.append(c)
        self.components = tuple(comps)

    def magnitude(self) -> np.ndarray:
        sq = sum(c * c for c in self.components)
        return np.sqrt(sq)

    def as_matrix(self) -> np.ndarray:
        """Stack components into shape (n_nodes, dim)."""
        return np.column_stack(self.components)

    def sup_norm(self) -> float:
        return float(np.max(self.magnitude()))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, tuple(np.zeros(grid.n_nodes) for _ in range(grid.dim)))


def _axis_derivative(vals: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Central differences inside, one-sided first-order at the two ends."""
    d = np.empty_like(vals)
    up = np.moveaxis(vals, axis, 0)
    dd = np.moveaxis(d, axis, 0)
    dd[1:-1] = (up[2:] - up[:-2]) / (2.0 * h)
    dd[0] = (up[1] - up[0]) / h
    dd[-1] = (up[-1] - up[-2]) / h
    return d


def gradient_field(u: GridFunction) -> VectorField:
    """Nodal gradient: central differences, one-sided on the boundary."""
    g = u.grid
    vals = u.reshaped
    comps = tuple(_axis_derivative(vals, g.spacing, ax).ravel() for ax in range(g.dim))
    return VectorField(g, comps)


def potential_values(V, grid: Grid) -> np.ndarray:
    """Evaluate a potential on the grid nodes.

    Accepts a PotentialHandle, a callable on an (n, dim) coordinate array,
    or a ready nodal array.
    """
    if isinstance(V, np.ndarray):
        vals = V
    elif hasattr(V, "eval"):
        vals = V.eval(grid.node_coords())
    else:
        vals = V(grid.node_coords())
    vals = np.asarray(vals, dtype=float).reshape(grid.n_nodes)
    if not np.all(np.isfinite(vals)):
        raise ValueError("potential produced non-finite node values")
    return vals


def w_norm(u: GridFunction, V, p: float) -> float:
    """Discrete weighted norm (integral |grad u|^p + V |u|^p)^(1/p)."""
    if not p > 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    g = u.grid
    vv = potential_values(V, g)
    if np.min(vv) <= 0.0:
        raise ValueError("potential must be positive on the sampled nodes")
    if g.dim == 1:
        grad_term = kernels.pdirichlet_1d(u.values, g.spacing, p, 0.0)
    else:
        grad_term = kernels.pdirichlet_2d(u.reshaped, g.spacing, p, 0.0)
    pot_term = float(np.dot(g.quad_weights(), vv * np.abs(u.values) ** p))
    return (grad_term + pot_term) ** (1.0 / p)


def quad_norm(grid: Grid, values: np.ndarray) -> float:
    """Quadrature-weighted l2 norm of a nodal array."""
    return float(np.sqrt(np.dot(grid.quad_weights(), values * values)))
