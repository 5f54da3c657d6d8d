"""Problem data: exponents, nonlinearity and potential handles, builtins.

A nonlinearity is a map f(t, g) where t is the unknown's value and g is the
frozen vector field |grad w|^(p-2) grad w evaluated at the same node.  Handles
must vanish for t < 0 and are expected to broadcast: t may be a scalar or a
1d array, g a (dim,) vector or an (n, dim) matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.integrate

__all__ = [
    "NonlinearityHandle",
    "PotentialHandle",
    "ProblemSpec",
    "F_eval",
    "builtin_problem",
    "BUILTIN_NAMES",
    "power_graded_nonlinearity",
    "zero_nonlinearity",
    "constant_potential",
    "cosine_potential",
    "QuadratureError",
]

BUILTIN_NAMES = ("classical_cubic", "graded_cubic", "plap_model")


class QuadratureError(RuntimeError):
    """Raised when the adaptive primitive-of-f quadrature does not converge."""


@dataclass(frozen=True)
class NonlinearityHandle:
    """f(t, g) with optional closed-form primitive F(t, g) = int_0^t f(s, g) ds."""

    eval: Callable[[np.ndarray, np.ndarray], np.ndarray]
    antiderivative: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    label: str = ""


@dataclass(frozen=True)
class PotentialHandle:
    """Potential V(x) with its claimed positive floor and periodicity cell."""

    eval: Callable[[np.ndarray], np.ndarray]
    floor: float
    period: tuple[float, ...]
    label: str = ""

    def __post_init__(self) -> None:
        if not self.floor > 0.0:
            raise ValueError("claimed floor must be positive")
        if any(not (np.isfinite(p) and p > 0) for p in self.period):
            raise ValueError("period entries must be positive")


def _g_magnitude(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    return np.sqrt(np.sum(g * g, axis=-1))


def power_graded_nonlinearity(growth: float, coupling: float) -> NonlinearityHandle:
    """f(t, g) = max(t, 0)^(growth-1) * (1 + coupling / (1 + |g|)).

    ``coupling = 0`` removes the dependence on the frozen gradient entirely.
    """
    if not growth > 1.0:
        raise ValueError("growth exponent must exceed 1")
    if coupling < 0.0:
        raise ValueError("coupling must be non-negative")
    gm1 = growth - 1.0

    def pos_pow(t, e):
        # multiplication chain for small integer exponents; float pow is
        # an order of magnitude slower and sits on the solver's hot path
        tp = np.maximum(np.asarray(t, dtype=float), 0.0)
        k = int(e)
        if e != k or not 1 <= k <= 8:
            return tp**e
        out = tp if k & 1 else None
        sq = tp
        k >>= 1
        while k:
            sq = sq * sq
            if k & 1:
                out = sq if out is None else out * sq
            k >>= 1
        return out

    def amp_factor(g):
        if coupling == 0.0:
            return 1.0
        return 1.0 + coupling / (1.0 + _g_magnitude(g))

    def feval(t, g):
        return pos_pow(t, gm1) * amp_factor(g)

    def fprim(t, g):
        return pos_pow(t, growth) / growth * amp_factor(g)

    if coupling == 0.0:
        label = f"t_+^{gm1:g}"
    else:
        label = f"t_+^{gm1:g} * (1 + {coupling:g}/(1+|g|))"
    return NonlinearityHandle(eval=feval, antiderivative=fprim, label=label)


def zero_nonlinearity() -> NonlinearityHandle:
    def feval(t, g):
        t = np.asarray(t, dtype=float)
        gm = _g_magnitude(g)
        return np.zeros(np.broadcast_shapes(t.shape, gm.shape))

    return NonlinearityHandle(eval=feval, antiderivative=feval, label="0")


def constant_potential(value: float) -> PotentialHandle:
    def veval(x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], float(value))

    return PotentialHandle(eval=veval, floor=float(value), period=(1.0,), label=f"{value:g}")


def cosine_potential(base: float = 1.5, amplitude: float = 0.5) -> PotentialHandle:
    """Separable 1-periodic potential base + amplitude * prod_i cos(2 pi x_i)."""
    if not base - abs(amplitude) > 0.0:
        raise ValueError("potential floor base - |amplitude| must stay positive")

    def veval(x):
        x = np.asarray(x, dtype=float)
        prod = np.prod(np.cos(2.0 * np.pi * x), axis=-1)
        return base + amplitude * prod

    return PotentialHandle(
        eval=veval,
        floor=base - abs(amplitude),
        period=(1.0, 1.0),
        label=f"{base:g} + {amplitude:g} cos",
    )


@dataclass(frozen=True)
class ProblemSpec:
    """Exponents, coefficient bounds and handles for one problem instance.

    ``theta`` is the superquadraticity exponent (0 < theta F <= t f), ``q``
    the growth exponent, and (a, b) the coercivity offsets F >= a t^theta - b.
    ``lambda_floor`` is an optional norm floor measured once from a converged
    reference run and asserted on later runs.
    """

    p: float
    q: float
    theta: float
    a: float
    b: float
    f: NonlinearityHandle
    V: PotentialHandle
    dim: int
    lambda_floor: float | None = None
    name: str = ""

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not self.p > 1.0:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.theta > self.p:
            raise ValueError(f"theta must exceed p, got theta={self.theta}, p={self.p}")
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValueError("coercivity offsets a, b must be positive")
        if not self.q > self.p:
            raise ValueError(f"q must exceed p, got q={self.q}, p={self.p}")
        if self.p < self.dim and not self.q < self.critical_exponent:
            raise ValueError(
                f"q must stay below the critical exponent {self.critical_exponent:g}, got {self.q}"
            )
        if self.lambda_floor is not None and not self.lambda_floor > 0.0:
            raise ValueError("lambda_floor must be positive when given")

    @property
    def critical_exponent(self) -> float:
        """N p / (N - p) for p < N, +inf otherwise."""
        if self.p < self.dim:
            return self.dim * self.p / (self.dim - self.p)
        return np.inf

    @property
    def formal_regime(self) -> bool:
        """True when p >= dim, where the subcritical window is unbounded."""
        return self.p >= self.dim


def F_eval(f: NonlinearityHandle, t, g) -> float | np.ndarray:
    """Primitive F(t, g) = int_0^t f(s, g) ds, zero for t <= 0.

    Uses the stored closed form when available, otherwise adaptive
    quadrature per scalar t with absolute tolerance 1e-10; non-convergence
    raises :class:`QuadratureError` rather than returning a silent value.
    """
    t_arr = np.asarray(t, dtype=float)
    if f.antiderivative is not None:
        vals = np.asarray(f.antiderivative(t_arr, g), dtype=float)
        return float(vals) if np.isscalar(t) or t_arr.ndim == 0 else vals

    def one(tv: float, gv) -> float:
        if tv <= 0.0:
            return 0.0
        val, err = scipy.integrate.quad(
            lambda s: float(f.eval(s, gv)), 0.0, tv, epsabs=1e-10, epsrel=1e-10, limit=500
        )
        if not np.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
            raise QuadratureError(
                f"primitive quadrature did not converge at t={tv!r} (error estimate {err:g})"
            )
        return val

    if t_arr.ndim == 0:
        return one(float(t_arr), g)
    g_arr = np.asarray(g, dtype=float)
    if g_arr.ndim == 2:
        return np.array([one(tv, gv) for tv, gv in zip(t_arr, g_arr)])
    return np.array([one(tv, g_arr) for tv in t_arr])


def builtin_problem(name: str, **params) -> ProblemSpec:
    """Construct one of the named builtin problems.

    classical_cubic:  dim 1, p = 2, f = t_+^3 (no gradient dependence).
    graded_cubic:     dim 1, p = 2, f = t_+^3 (1 + eps/(1+|g|)), 0 <= eps <= 0.2.
    plap_model:       dim 2, p in (1, 2), cosine potential,
                      f = t_+^(q-1) (1 + eps/(1+|g|)).
    """
    if name == "classical_cubic":
        _reject_extra(name, params, ())
        return ProblemSpec(
            p=2.0,
            q=4.0,
            theta=4.0,
            a=0.125,
            b=1.0,
            f=power_graded_nonlinearity(4.0, 0.0),
            V=constant_potential(1.0),
            dim=1,
            lambda_floor=1.0,
            name=name,
        )
    if name == "graded_cubic":
        _reject_extra(name, params, ("epsilon",))
        eps = float(params.get("epsilon", 0.1))
        if not 0.0 <= eps <= 0.2:
            raise ValueError(f"graded_cubic coupling must lie in [0, 0.2], got {eps}")
        return ProblemSpec(
            p=2.0,
            q=4.0,
            theta=4.0,
            a=0.125,
            b=1.0,
            f=power_graded_nonlinearity(4.0, eps),
            V=constant_potential(1.0),
            dim=1,
            lambda_floor=1.0,
            name=name,
        )
    if name == "plap_model":
        _reject_extra(name, params, ("epsilon", "p", "q"))
        eps = float(params.get("epsilon", 0.1))
        p = float(params.get("p", 1.5))
        q = float(params.get("q", 3.0))
        if not 0.0 <= eps <= 0.2:
            raise ValueError(f"plap_model coupling must lie in [0, 0.2], got {eps}")
        if not 1.0 < p < 2.0:
            raise ValueError(f"plap_model requires p in (1, 2), got {p}")
        return ProblemSpec(
            p=p,
            q=q,
            theta=q,
            a=0.5 / q,
            b=1.0,
            f=power_graded_nonlinearity(q, eps),
            V=cosine_potential(),
            dim=2,
            lambda_floor=None,
            name=name,
        )
    raise ValueError(f"unknown builtin problem {name!r}; choices: {', '.join(BUILTIN_NAMES)}")


def _reject_extra(name: str, params: dict, allowed: tuple[str, ...]) -> None:
    extra = set(params) - set(allowed)
    if extra:
        raise ValueError(f"{name} does not accept parameters {sorted(extra)}")
