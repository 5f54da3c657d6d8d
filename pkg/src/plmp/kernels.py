"""Hot numerical kernels: p-Dirichlet energies and their nodal gradients.

These stencil loops are evaluated once or more per descent iteration and
dominate solver runtime.  Every kernel exists twice: a pure-numpy
implementation (suffix ``_numpy``) and, when numba imports cleanly, an
``@njit``-compiled twin.  The active backend is chosen at import time; set
``PLMP_DISABLE_NUMBA=1`` in the environment to force the numpy path.
``benchmarks/bench_kernels.py`` times the two backends against each other.

Discretization: the gradient part of the energy is a per-cell quadrature.
In 1d a cell is the interval between adjacent nodes and carries the exact
face difference; in 2d a cell is the square spanned by four nodes and
carries the average of the two face differences along each axis.  The
``*_grad_*`` kernels return the exact partial derivatives of
``(1/p) * pdirichlet``, so energy and residual stay variationally
consistent to rounding.  ``delta2`` is the square of the regularization
inserted under the root for p < 2; pass 0.0 to disable.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "NUMBA_AVAILABLE",
    "pdirichlet_1d",
    "pdirichlet_grad_1d",
    "pdirichlet_2d",
    "pdirichlet_grad_2d",
    "pdirichlet_1d_numpy",
    "pdirichlet_grad_1d_numpy",
    "pdirichlet_2d_numpy",
    "pdirichlet_grad_2d_numpy",
]


def pdirichlet_1d_numpy(u: np.ndarray, h: float, p: float, delta2: float) -> float:
    d = np.diff(u) / h
    if p == 2.0:
        dens = d * d + delta2
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = (d * d + delta2) ** (0.5 * p)
    return h * float(np.sum(dens))


def pdirichlet_grad_1d_numpy(u: np.ndarray, h: float, p: float, delta2: float) -> np.ndarray:
    d = np.diff(u) / h
    if p == 2.0:
        flux = d
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            flux = (d * d + delta2) ** (0.5 * (p - 2.0)) * d
    out = np.zeros_like(u)
    out[1:-1] = flux[:-1] - flux[1:]
    return out


def pdirichlet_2d_numpy(u: np.ndarray, h: float, p: float, delta2: float) -> float:
    inv2 = 0.5 / h
    a = (u[1:, :-1] - u[:-1, :-1] + u[1:, 1:] - u[:-1, 1:]) * inv2
    b = (u[:-1, 1:] - u[:-1, :-1] + u[1:, 1:] - u[1:, :-1]) * inv2
    if p == 2.0:
        dens = a * a + b * b + delta2
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = (a * a + b * b + delta2) ** (0.5 * p)
    return h * h * float(np.sum(dens))


def pdirichlet_grad_2d_numpy(u: np.ndarray, h: float, p: float, delta2: float) -> np.ndarray:
    inv2 = 0.5 / h
    a = (u[1:, :-1] - u[:-1, :-1] + u[1:, 1:] - u[:-1, 1:]) * inv2
    b = (u[:-1, 1:] - u[:-1, :-1] + u[1:, 1:] - u[1:, :-1]) * inv2
    if p == 2.0:
        ca = a
        cb = b
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = (a * a + b * b + delta2) ** (0.5 * (p - 2.0))
        ca = coef * a
        cb = coef * b
    t1 = 0.5 * h * (ca + cb)
    t2 = 0.5 * h * (ca - cb)
    out = np.zeros_like(u)
    out[:-1, :-1] -= t1
    out[1:, 1:] += t1
    out[1:, :-1] += t2
    out[:-1, 1:] -= t2
    return out


def _env_disabled() -> bool:
    return os.environ.get("PLMP_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only on stripped installs
    numba = None
    NUMBA_AVAILABLE = False


if NUMBA_AVAILABLE:

    @numba.njit(cache=True)
    def pdirichlet_1d_numba(u, h, p, delta2):  # pragma: no cover - compiled
        acc = 0.0
        inv = 1.0 / h
        if p == 2.0:
            for i in range(u.shape[0] - 1):
                d = (u[i + 1] - u[i]) * inv
                acc += d * d + delta2
        else:
            e = 0.5 * p
            for i in range(u.shape[0] - 1):
                d = (u[i + 1] - u[i]) * inv
                acc += (d * d + delta2) ** e
        return h * acc

    @numba.njit(cache=True)
    def pdirichlet_grad_1d_numba(u, h, p, delta2):  # pragma: no cover - compiled
        n = u.shape[0]
        out = np.zeros(n)
        inv = 1.0 / h
        if p == 2.0:
            for i in range(1, n - 1):
                out[i] = (2.0 * u[i] - u[i - 1] - u[i + 1]) * inv
            return out
        e = 0.5 * (p - 2.0)
        d = (u[1] - u[0]) * inv
        fprev = (d * d + delta2) ** e * d
        for i in range(1, n - 1):
            d = (u[i + 1] - u[i]) * inv
            f = (d * d + delta2) ** e * d
            out[i] = fprev - f
            fprev = f
        return out

    @numba.njit(cache=True)
    def pdirichlet_2d_numba(u, h, p, delta2):  # pragma: no cover - compiled
        m0, m1 = u.shape
        inv2 = 0.5 / h
        acc = 0.0
        if p == 2.0:
            for i in range(m0 - 1):
                for j in range(m1 - 1):
                    a = (u[i + 1, j] - u[i, j] + u[i + 1, j + 1] - u[i, j + 1]) * inv2
                    b = (u[i, j + 1] - u[i, j] + u[i + 1, j + 1] - u[i + 1, j]) * inv2
                    acc += a * a + b * b + delta2
        else:
            e = 0.5 * p
            for i in range(m0 - 1):
                for j in range(m1 - 1):
                    a = (u[i + 1, j] - u[i, j] + u[i + 1, j + 1] - u[i, j + 1]) * inv2
                    b = (u[i, j + 1] - u[i, j] + u[i + 1, j + 1] - u[i + 1, j]) * inv2
                    acc += (a * a + b * b + delta2) ** e
        return h * h * acc

    @numba.njit(cache=True)
    def pdirichlet_grad_2d_numba(u, h, p, delta2):  # pragma: no cover - compiled
        m0, m1 = u.shape
        out = np.zeros((m0, m1))
        inv2 = 0.5 / h
        e = 0.5 * (p - 2.0)
        half_h = 0.5 * h
        two_exp = p == 2.0
        for i in range(m0 - 1):
            for j in range(m1 - 1):
                a = (u[i + 1, j] - u[i, j] + u[i + 1, j + 1] - u[i, j + 1]) * inv2
                b = (u[i, j + 1] - u[i, j] + u[i + 1, j + 1] - u[i + 1, j]) * inv2
                if two_exp:
                    ca = a
                    cb = b
                else:
                    coef = (a * a + b * b + delta2) ** e
                    ca = coef * a
                    cb = coef * b
                t1 = half_h * (ca + cb)
                t2 = half_h * (ca - cb)
                out[i, j] -= t1
                out[i + 1, j + 1] += t1
                out[i + 1, j] += t2
                out[i, j + 1] -= t2
        return out


if NUMBA_AVAILABLE and not _env_disabled():
    BACKEND = "numba"
    pdirichlet_1d = pdirichlet_1d_numba
    pdirichlet_grad_1d = pdirichlet_grad_1d_numba
    pdirichlet_2d = pdirichlet_2d_numba
    pdirichlet_grad_2d = pdirichlet_grad_2d_numba
else:
    BACKEND = "numpy"
    pdirichlet_1d = pdirichlet_1d_numpy
    pdirichlet_grad_1d = pdirichlet_grad_1d_numpy
    pdirichlet_2d = pdirichlet_2d_numpy
    pdirichlet_grad_2d = pdirichlet_grad_2d_numpy


def warm_up() -> None:
    """Trigger JIT compilation on tiny inputs so timed runs stay honest."""
    u1 = np.array([0.0, 1.0, 0.5, 0.0])
    u2 = np.zeros((3, 3))
    u2[1, 1] = 1.0
    for p, d2 in ((2.0, 0.0), (1.5, 1e-16), (3.0, 0.0)):
        pdirichlet_1d(u1, 0.5, p, d2)
        pdirichlet_grad_1d(u1, 0.5, p, d2)
        pdirichlet_2d(u2, 0.5, p, d2)
        pdirichlet_grad_2d(u2, 0.5, p, d2)
