"""Gradient-frozen subproblems: energy, residual, and their consistency.

Freezing the vector field g = |grad w|^(p-2) grad w at a fixed w turns the
quasilinear equation into a variational one with energy

    I_w(u) = (1/p) int |grad u|^p + V |u|^p  -  int F(u, g).

The residual returned here is the exact nodal gradient of the discrete
energy in the quadrature pairing (divergence-form flux stencil for the
p-Laplacian part), which :func:`directional_derivative_check` verifies
against central differences.  For p < 2 the flux coefficient is regularized
with ``delta``; the energy uses the same regularization so the pair stays
variationally consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grid import Grid, GridFunction, VectorField, gradient_field, potential_values, quad_norm
from .model import F_eval, ProblemSpec

__all__ = [
    "FrozenProblem",
    "energy",
    "residual",
    "residual_norm",
    "directional_derivative_check",
    "derivative_check_report",
    "default_delta",
]

_G_CONSISTENCY_TOL = 1e-12


def _abs_pow(vals: np.ndarray, p: float) -> np.ndarray:
    """|v|^p with the float pow skipped on the common p = 2 hot path."""
    if p == 2.0:
        return vals * vals
    return np.abs(vals) ** p


def _odd_pow(vals: np.ndarray, e: float) -> np.ndarray:
    """sign(v)|v|^e, the odd power entering the potential term's gradient."""
    if e == 1.0:
        return vals
    return np.sign(vals) * np.abs(vals) ** e


def default_delta(p: float) -> float:
    """Flux regularization: needed only in the singular regime p < 2."""
    return 1e-8 if p < 2.0 else 0.0


@dataclass
class FrozenProblem:
    """One subproblem with the gradient argument frozen at a fixed field."""

    spec: ProblemSpec
    grid: Grid
    w_grad: VectorField
    g_field: VectorField
    delta: float

    _v_nodes: np.ndarray = field(init=False, repr=False)
    _weights: np.ndarray = field(init=False, repr=False)
    _g_matrix: np.ndarray = field(init=False, repr=False)
    _interior: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.spec.dim != self.grid.dim:
            raise ValueError("problem dimension does not match the grid")
        if self.delta < 0.0:
            raise ValueError("delta must be non-negative")
        p = self.spec.p
        wmag = self.w_grad.magnitude()
        gmag = self.g_field.magnitude()
        expected = wmag ** (p - 1.0)
        if np.max(np.abs(gmag - expected)) > _G_CONSISTENCY_TOL * (1.0 + np.max(expected)):
            raise ValueError("frozen field magnitude does not equal |grad w|^(p-1)")
        self._v_nodes = potential_values(self.spec.V, self.grid)
        if np.min(self._v_nodes) <= 0.0:
            raise ValueError("potential must be positive on the grid")
        self._weights = self.grid.quad_weights()
        self._g_matrix = self.g_field.as_matrix()
        self._interior = ~self.grid.boundary_mask()

    @property
    def weights(self) -> np.ndarray:
        """Flat quadrature weights of the grid."""
        return self._weights

    @property
    def g_matrix(self) -> np.ndarray:
        """Frozen field as an (n_nodes, dim) matrix."""
        return self._g_matrix

    @classmethod
    def from_w(
        cls, spec: ProblemSpec, grid: Grid, w: GridFunction, delta: float | None = None
    ) -> "FrozenProblem":
        """Freeze at w: compute grad w nodally and g = |grad w|^(p-2) grad w."""
        wg = gradient_field(w)
        mag = wg.magnitude()
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(mag > 0.0, mag ** (spec.p - 2.0), 0.0)
        g = VectorField(grid, tuple(scale * c for c in wg.components))
        if delta is None:
            delta = default_delta(spec.p)
        return cls(spec=spec, grid=grid, w_grad=wg, g_field=g, delta=delta)

    @classmethod
    def from_zero(
        cls, spec: ProblemSpec, grid: Grid, delta: float | None = None
    ) -> "FrozenProblem":
        if delta is None:
            delta = default_delta(spec.p)
        zero = VectorField.zeros(grid)
        return cls(spec=spec, grid=grid, w_grad=zero, g_field=zero, delta=delta)

    # -- discrete functional pieces ------------------------------------

    def dirichlet_term(self, values: np.ndarray) -> float:
        """integral of (|grad u|^2 + delta^2)^(p/2), cell quadrature."""
        h = self.grid.spacing
        p = self.spec.p
        d2 = self.delta * self.delta
        if self.grid.dim == 1:
            return kernels.pdirichlet_1d(values, h, p, d2)
        return kernels.pdirichlet_2d(values.reshape(self.grid.shape), h, p, d2)

    def _dirichlet_grad(self, values: np.ndarray) -> np.ndarray:
        h = self.grid.spacing
        p = self.spec.p
        d2 = self.delta * self.delta
        if self.grid.dim == 1:
            return kernels.pdirichlet_grad_1d(values, h, p, d2)
        return kernels.pdirichlet_grad_2d(values.reshape(self.grid.shape), h, p, d2).ravel()

    def nonlinear_term(self, values: np.ndarray) -> float:
        """integral of F(u, g) with the stored frozen field."""
        fvals = np.asarray(F_eval(self.spec.f, values, self._g_matrix), dtype=float)
        return float(np.dot(self._weights, fvals))

    def norm_p_term(self, values: np.ndarray) -> float:
        """||u||^p in the cell quadrature without flux regularization."""
        h = self.grid.spacing
        p = self.spec.p
        if self.grid.dim == 1:
            grad = kernels.pdirichlet_1d(values, h, p, 0.0)
        else:
            grad = kernels.pdirichlet_2d(values.reshape(self.grid.shape), h, p, 0.0)
        return grad + float(np.dot(self._weights, self._v_nodes * _abs_pow(values, p)))


def _check_same_grid(fp: FrozenProblem, u: GridFunction) -> None:
    if u.grid != fp.grid:
        raise ValueError("grid of the argument does not match the frozen problem")


def energy(fp: FrozenProblem, u: GridFunction) -> float:
    """I_w(u) under the frozen field; exact zero at u = 0."""
    _check_same_grid(fp, u)
    vals = u.values
    p = fp.spec.p
    quad = fp.dirichlet_term(vals) + float(
        np.dot(fp._weights, fp._v_nodes * _abs_pow(vals, p))
    )
    e = quad / p - fp.nonlinear_term(vals)
    if not np.isfinite(e):
        raise ArithmeticError("non-finite energy; for p < 2 use a positive delta")
    return e


def residual(fp: FrozenProblem, u: GridFunction) -> GridFunction:
    """Nodal gradient of the energy in the quadrature pairing.

    Interior node i carries the divergence-form stencil value
    -div(|grad u|^(p-2) grad u) + V |u|^(p-2) u - f(u, g); boundary entries
    are zero because test functions vanish there.
    """
    _check_same_grid(fp, u)
    vals = u.values
    p = fp.spec.p
    r = fp._dirichlet_grad(vals) / fp._weights
    r += fp._v_nodes * _odd_pow(vals, p - 1.0)
    r -= np.asarray(fp.spec.f.eval(vals, fp._g_matrix), dtype=float)
    r[~fp._interior] = 0.0
    if not np.all(np.isfinite(r)):
        raise ArithmeticError(
            "non-finite residual entries; the flux coefficient is singular at "
            "flat gradients when p < 2, use a positive delta"
        )
    return GridFunction(fp.grid, r)


def residual_norm(fp: FrozenProblem, u: GridFunction) -> float:
    return quad_norm(fp.grid, residual(fp, u).values)


def directional_derivative_check(
    fp: FrozenProblem, u: GridFunction, v: GridFunction, step: float = 1e-5
) -> float:
    """|<residual(u), v> - central difference of the energy along v|.

    The pairing uses the quadrature inner product, so agreement certifies
    that the residual really is the discrete gradient of the energy.
    """
    _check_same_grid(fp, u)
    _check_same_grid(fp, v)
    if not (np.isfinite(step) and step > 0.0):
        raise ValueError("step must be positive")
    r = residual(fp, u)
    pairing = float(np.dot(fp._weights, r.values * v.values))
    return abs(pairing - _energy_slope(fp, u, v, step))


def _energy_slope(fp: FrozenProblem, u: GridFunction, v: GridFunction, eps: float) -> float:
    up = GridFunction(fp.grid, u.values + eps * v.values)
    um = GridFunction(fp.grid, u.values - eps * v.values)
    return (energy(fp, up) - energy(fp, um)) / (2.0 * eps)


def derivative_check_report(
    fp: FrozenProblem, u: GridFunction, v: GridFunction, step: float = 1e-5
) -> dict:
    """Diagnostics behind the check: pairing, both central differences,
    both discrepancies, and the order ratio disc(step)/disc(step/2),
    close to 4 for a second-order scheme."""
    r = residual(fp, u)
    pairing = float(np.dot(fp._weights, r.values * v.values))
    fd1 = _energy_slope(fp, u, v, step)
    fd2 = _energy_slope(fp, u, v, 0.5 * step)
    disc1 = abs(pairing - fd1)
    disc2 = abs(pairing - fd2)
    order_ratio = disc1 / disc2 if disc2 > 0.0 else np.inf
    return {
        "pairing": pairing,
        "fd": fd1,
        "fd_half": fd2,
        "discrepancy": disc1,
        "discrepancy_half": disc2,
        "order_ratio": order_ratio,
        "step": step,
    }
