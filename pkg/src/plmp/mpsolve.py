"""Numerical mountain-pass solver for a frozen subproblem.

The discrete min-max scheme maintains a path of K grid functions joining 0
to a point t0*v0 of non-positive energy, repeatedly locates the path point
of maximal energy, and pushes it downhill along the negative residual.
Accepted steps never raise the path maximum, so the sequence of maxima is
non-increasing by construction; the maximizer converges to a saddle whose
energy estimates the mountain-pass level.

Geometry probes precede the descent: find_t0 locates the far endpoint and
geometry_probe certifies a positive energy ridge between 0 and t0*v0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .frozen import FrozenProblem, energy, residual
from .grid import GridFunction, quad_norm, w_norm

__all__ = [
    "MPConfig",
    "MPResult",
    "MountainPassError",
    "RayError",
    "StagnationError",
    "find_t0",
    "geometry_probe",
    "mountain_pass_solve",
    "continuation_solve",
    "transfer_path",
    "default_ray_direction",
]

_T_CAP = 1e6
_STAGNATION_STEP = 1e-14
_UNIT_TOL = 1e-10
_MERGE_AGE = 40


class MountainPassError(RuntimeError):
    """Inner solver failure."""


class RayError(MountainPassError):
    """The ray t -> I(t v0) never reaches non-positive energy."""


class StagnationError(MountainPassError):
    """Backtracking hit the minimum step without an acceptable move."""


@dataclass
class MPConfig:
    """Knobs of one mountain-pass solve.

    ray_direction is normalized to unit w-norm; when omitted the solver
    uses a centered Gaussian bump.  t0 is filled by find_t0.  warm_start
    threads the initial path through a given interior point (path 0 ->
    warm_start -> t0*v0) instead of the straight segment.  warm_path
    hands over a whole starting polyline (first node 0, last node of
    non-positive energy) and overrides warm_start; it is how a solve on
    a refined grid resumes from a coarser one.
    """

    path_points: int = 33
    max_iters: int = 200000
    descent_step: float = 0.1
    residual_tol: float = 1e-6
    ray_direction: GridFunction | None = None
    t0: float | None = None
    warm_start: GridFunction | None = None
    warm_path: list[GridFunction] | None = None
    n_probe_directions: int = 16
    seed: int = 0
    log_every: int = 0

    def __post_init__(self) -> None:
        if self.path_points < 3:
            raise ValueError("path_points must be at least 3")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not (np.isfinite(self.descent_step) and self.descent_step > 0.0):
            raise ValueError("descent_step must be positive")
        if not (np.isfinite(self.residual_tol) and self.residual_tol > 0.0):
            raise ValueError("residual_tol must be positive")
        if self.log_every < 0:
            raise ValueError("log_every must be non-negative")


@dataclass
class MPResult:
    u_w: GridFunction
    c_w: float
    residual_norm: float
    iters: int
    alpha_probe: float
    rho_probe: float
    min_interior: float
    negative_part_norm: float
    t0: float
    identity_gap: float
    mass_fraction: float
    converged: bool
    monotone: bool
    path: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    log: list[tuple[int, float, float, float]] = field(default_factory=list)

    def log_lines(self) -> list[str]:
        return [
            f"iter={i} c_w={c:.17g} residual={r:.17g} step={s:.17g}"
            for (i, c, r, s) in self.log
        ]


def default_ray_direction(fp: FrozenProblem) -> GridFunction:
    """Unit-w-norm Gaussian bump centered in the box."""
    grid = fp.grid
    coords = grid.node_coords()
    r2 = np.sum(coords * coords, axis=1)
    vals = np.exp(-0.5 * r2)
    vals[grid.boundary_mask()] = 0.0
    v = GridFunction(grid, vals)
    nrm = w_norm(v, fp.spec.V, fp.spec.p)
    return GridFunction(grid, v.values / nrm)


def _unit_check(fp: FrozenProblem, v: GridFunction, what: str) -> None:
    nrm = w_norm(v, fp.spec.V, fp.spec.p)
    if abs(nrm - 1.0) > _UNIT_TOL:
        raise ValueError(f"{what} must have unit w-norm, got {nrm!r}")


def find_t0(fp: FrozenProblem, v0: GridFunction) -> float:
    """Smallest ray parameter with I(t v0) <= 0, certified at 1.5t and 2t.

    Doubling locates a sign bracket, bisection shrinks it; if non-positive
    energy never shows up below t = 1e6 the ray does not descend, which
    points at a failure of the coercive lower bound along this direction.
    """
    _unit_check(fp, v0, "v0")

    def ray(t: float) -> float:
        return energy(fp, GridFunction(fp.grid, t * v0.values))

    t = 1.0
    while ray(t) > 0.0:
        t *= 2.0
        if t > _T_CAP:
            raise RayError("ray does not descend")
    hi = t
    lo = 0.0 if hi == 1.0 else hi / 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if ray(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    t0 = hi
    for _ in range(80):
        if all(ray(s) <= 0.0 for s in (t0, 1.5 * t0, 2.0 * t0)):
            return t0
        t0 *= 1.25
        if t0 > _T_CAP:
            raise RayError("ray does not descend")
    raise RayError("ray does not descend")


def geometry_probe(
    fp: FrozenProblem, directions: list[GridFunction], rho: float
) -> tuple[float, float]:
    """Sampled mountain ridge: alpha = min over directions of I(rho*v).

    alpha <= 0 is a reported probe failure (rho beyond the ridge), not an
    exception.
    """
    if not (np.isfinite(rho) and rho > 0.0):
        raise ValueError("rho must be positive")
    if not directions:
        raise ValueError("need at least one probe direction")
    alpha = math.inf
    for v in directions:
        _unit_check(fp, v, "probe direction")
        alpha = min(alpha, energy(fp, GridFunction(fp.grid, rho * v.values)))
    return alpha, rho


def _probe_directions(fp: FrozenProblem, v0: GridFunction, n: int, seed: int) -> list[GridFunction]:
    rng = np.random.default_rng(seed)
    grid = fp.grid
    interior = ~grid.boundary_mask()
    out = [v0]
    for _ in range(max(0, n - 1)):
        vals = np.zeros(grid.n_nodes)
        vals[interior] = rng.normal(size=int(np.sum(interior)))
        v = GridFunction(grid, vals)
        nrm = w_norm(v, fp.spec.V, fp.spec.p)
        out.append(GridFunction(grid, vals / nrm))
    return out


def _mass_fraction(fp: FrozenProblem, values: np.ndarray) -> float:
    """Fraction of the quadrature mass of |u|^p inside the half box
    (per-axis |x_i| <= R/2)."""
    grid = fp.grid
    coords = grid.node_coords()
    inside = np.all(np.abs(coords) <= 0.5 * grid.radius, axis=1)
    dens = fp.weights * np.abs(values) ** fp.spec.p
    total = float(np.sum(dens))
    if total == 0.0:
        return 1.0
    return float(np.sum(dens[inside])) / total


def _initial_path(
    fp: FrozenProblem, cfg: MPConfig, v0: GridFunction, t0: float
) -> np.ndarray:
    K = cfg.path_points
    n = fp.grid.n_nodes
    top = t0 * v0.values
    if cfg.warm_path is not None:
        if len(cfg.warm_path) < 3:
            raise ValueError("warm_path needs at least 3 nodes")
        for g in cfg.warm_path:
            if g.grid != fp.grid:
                raise ValueError("warm_path node lives on a different grid")
        path = np.stack([g.values for g in cfg.warm_path]).astype(float)
        path[0] = 0.0
        # a resampled endpoint can sit a hair past the energy zero
        # crossing; extend the path to this grid's own certified top
        if energy(fp, GridFunction(fp.grid, path[-1])) > 0.0:
            path = np.vstack([path, top])
        return path
    path = np.zeros((K, n))
    if cfg.warm_start is None:
        for k in range(K):
            path[k] = (k / (K - 1)) * top
        return path
    if cfg.warm_start.grid != fp.grid:
        raise ValueError("warm_start lives on a different grid")
    # thread the ray through the warm point: 0 -> warm -> t0*v0 with the
    # middle node landing exactly on the warm point
    mid = cfg.warm_start.values
    k_mid = K // 2
    for k in range(k_mid + 1):
        path[k] = (k / k_mid) * mid
    for k in range(k_mid + 1, K):
        s = (k - k_mid) / (K - 1 - k_mid)
        path[k] = (1.0 - s) * mid + s * top
    return path


_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


def _path_point(pts, k, t):
    if t <= 0.0:
        return pts[k].copy()
    if t >= 1.0:
        return pts[k + 1].copy()
    return (1.0 - t) * pts[k] + t * pts[k + 1]


def _segment_max(fp, a, b, ea, eb, coarse=7, polish=20):
    """Estimate (t, e) of the energy maximum on the chord from a to b.

    Coarse equispaced sampling brackets the maximum and golden-section
    refinement sharpens it.  The reported value never falls below any
    energy actually evaluated, and a coarse maximum at an endpoint is
    still polished on its inward bracket so a crest hiding just inside
    the endpoint is not missed.
    """
    grid = fp.grid
    d = b - a

    def ev(t):
        return energy(fp, GridFunction(grid, a + t * d))

    ts = np.linspace(0.0, 1.0, coarse + 2)
    es = np.empty_like(ts)
    es[0] = ea
    es[-1] = eb
    for i in range(1, len(ts) - 1):
        es[i] = ev(float(ts[i]))
    i = int(np.argmax(es))
    best_t, best_e = float(ts[i]), float(es[i])
    i = min(max(i, 1), len(ts) - 2)
    lo, hi = float(ts[i - 1]), float(ts[i + 1])
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    e1, e2 = ev(x1), ev(x2)
    for _ in range(polish):
        if e1 >= e2:
            if e1 > best_e:
                best_t, best_e = x1, e1
            hi, x2, e2 = x2, x1, e1
            x1 = hi - _GOLDEN * (hi - lo)
            e1 = ev(x1)
        else:
            if e2 > best_e:
                best_t, best_e = x2, e2
            lo, x1, e1 = x1, x2, e2
            x2 = lo + _GOLDEN * (hi - lo)
            e2 = ev(x2)
    if e1 > best_e:
        best_t, best_e = x1, e1
    if e2 > best_e:
        best_t, best_e = x2, e2
    return best_t, best_e




def mountain_pass_solve(fp: FrozenProblem, cfg: MPConfig) -> MPResult:
    """Discrete mountain-pass descent on the frozen energy.

    Each iteration locates the energy maximum over the whole
    piecewise-linear path, segment interiors included, and moves that
    point a backtracked step along its normalized negative residual.
    A maximum exactly at a node rewrites the node; an interior maximum
    joins the path as a new node splitting its segment, so no part of
    the old polyline is cut away by the move.  A step is accepted when
    the moved point descends by a fixed fraction of the predicted
    decrease, its residual norm does not grow past a fixed factor, and
    the two chords touching it do not rise above the old level.
    Untouched segments keep their cached maxima, so the path maximum is
    non-increasing by construction, while near-ties between neighboring
    path points cannot shrink the accepted steps.  Surplus nodes are
    merged only in bulk, only when old enough, and only when the merged
    chord stays below the current level.  Endpoints stay pinned.  Stops
    when the residual quadrature-norm at the maximizer reaches
    residual_tol; exhausting max_iters yields a result flagged
    non-converged.
    """
    grid = fp.grid
    v0 = cfg.ray_direction if cfg.ray_direction is not None else default_ray_direction(fp)
    _unit_check(fp, v0, "ray_direction")
    t0 = cfg.t0 if cfg.t0 is not None else find_t0(fp, v0)
    cfg.ray_direction = v0
    cfg.t0 = t0

    dirs = _probe_directions(fp, v0, cfg.n_probe_directions, cfg.seed)
    rho = 0.25 * t0
    alpha, rho = geometry_probe(fp, dirs, rho)
    shrink = 0
    while alpha <= 0.0 and shrink < 60:
        rho *= 0.5
        alpha, rho = geometry_probe(fp, dirs, rho)
        shrink += 1
    if alpha <= 0.0:
        raise MountainPassError("no positive energy ridge found below t0")

    K0 = cfg.path_points
    path0 = _initial_path(fp, cfg, v0, t0)
    pts: list[np.ndarray] = [path0[k].copy() for k in range(path0.shape[0])]
    e_node: list[float] = [energy(fp, GridFunction(grid, p)) for p in pts]
    birth: list[int] = [0] * len(pts)
    weights = fp.weights

    segs: list[tuple[float, float]] = [
        _segment_max(fp, pts[k], pts[k + 1], e_node[k], e_node[k + 1])
        for k in range(len(pts) - 1)
    ]

    def _seg_argmax() -> int:
        # lowest index on ties
        best, arg = -math.inf, 0
        for k, (_, e) in enumerate(segs):
            if e > best:
                best, arg = e, k
        return arg

    last_step = cfg.descent_step
    log: list[tuple[int, float, float, float]] = []
    monotone = True
    prev_max = max(e for _, e in segs)
    converged = False
    res_norm = math.inf
    iters = 0
    k0 = _seg_argmax()
    w = _path_point(pts, k0, segs[k0][0])

    for iters in range(1, cfg.max_iters + 1):
        k_star = _seg_argmax()
        t_star, e_star = segs[k_star]
        w = _path_point(pts, k_star, t_star)
        r = residual(fp, GridFunction(grid, w)).values
        res_norm = float(np.sqrt(np.dot(weights, r * r)))
        if cfg.log_every and (iters % cfg.log_every == 0 or iters == 1):
            log.append((iters, e_star, res_norm, last_step))
        if res_norm <= cfg.residual_tol:
            converged = True
            break

        # the moved point may rewrite the nearest interior node in place,
        # falling back to joining the path as a new node splitting the
        # maximizing segment.  rewriting leaves no residue behind, which
        # matters near the pass: inserts leave the old near-crest node in
        # the path, and on a critical ridge that is energy-flat along a
        # symmetry direction those leftovers form a set of tied maxima
        # that then take turns being descended.  a rewrite forces chords
        # through terrain the path bent around, so it gets a looser chord
        # cap below, sized to stay noise under the monotonicity audit
        n_pts = len(pts)
        j_rep = k_star if t_star < 0.5 else k_star + 1
        j_rep = min(max(j_rep, 1), n_pts - 2)

        direction = r / (-res_norm)
        start_trial = min(t0, max(4.0 * last_step, 1e-13))
        accepted = False
        for attempt_rep in ([j_rep, 0] if j_rep else [0]):
            trial = start_trial
            floor = 1e-12 if attempt_rep else _STAGNATION_STEP
            while trial >= floor:
                cand = w + trial * direction
                e_cand = energy(fp, GridFunction(grid, cand))
                # three-part acceptance, cheapest test first.  the moved
                # point must descend by a fraction of the first-order
                # prediction; its residual norm must not grow by more
                # than a fixed factor, which throttles the step to the
                # stable range whenever the residual carries modes near
                # the grid stiffness limit and so keeps those modes from
                # being pumped up by energy-feasible steps; and the two
                # chords the move touches must not rise above the old
                # level.  the chord cap is non-strict because adjacent
                # path points become energy-tied as the path tightens
                # around the pass, and demanding a drop below an unmoved
                # neighbor would shrink steps with the tie gap; untouched
                # segments keep their caches, so the path maximum is
                # non-increasing by construction
                if e_cand > e_star - 0.1 * trial * res_norm:
                    trial *= 0.5
                    continue
                rc = residual(fp, GridFunction(grid, cand)).values
                rc_norm = float(np.sqrt(np.dot(weights, rc * rc)))
                if rc_norm > 1.2 * res_norm:
                    trial *= 0.5
                    continue
                if attempt_rep:
                    left = _segment_max(fp, pts[attempt_rep - 1], cand, e_node[attempt_rep - 1], e_cand)
                    right = _segment_max(fp, cand, pts[attempt_rep + 1], e_cand, e_node[attempt_rep + 1])
                else:
                    left = _segment_max(fp, pts[k_star], cand, e_node[k_star], e_cand)
                    right = _segment_max(fp, cand, pts[k_star + 1], e_cand, e_node[k_star + 1])
                bulge = 1e-10 if attempt_rep else 1e-14
                if max(left[1], right[1]) <= e_star + bulge * max(1.0, abs(e_star)):
                    accepted = True
                    break
                trial *= 0.5
            if accepted:
                j_rep = attempt_rep
                break
        if not accepted:
            raise StagnationError(
                f"no local path maximum decrease above step {_STAGNATION_STEP:g}"
                f" at iteration {iters}"
            )
        last_step = trial
        if j_rep:
            pts[j_rep] = cand
            e_node[j_rep] = e_cand
            birth[j_rep] = iters
            segs[j_rep - 1] = left
            segs[j_rep] = right
            j_active = j_rep
        else:
            pts.insert(k_star + 1, cand)
            e_node.insert(k_star + 1, e_cand)
            birth.insert(k_star + 1, iters)
            segs[k_star] = left
            segs.insert(k_star + 1, right)
            j_active = k_star + 1

        cur_max = max(e for _, e in segs)
        # retire surplus nodes once the path has grown well past its
        # nominal size, draining it in one go to a lower mark so that
        # merge pressure is off most of the time.  the most crowded pairs
        # go first, a removal is applied only when the merged chord keeps
        # the path maximum from rising, and nodes placed recently are
        # left alone: near-tied crests take turns as the maximizer, and
        # without the age shield a merge can delete the fresh work of one
        # crest while another is being served, cycling forever
        merging = False
        while len(pts) > (2 * K0 if merging else 3 * K0):
            merging = True
            lens = [
                float(np.sqrt(np.dot(weights, (pts[j + 1] - pts[j]) ** 2)))
                for j in range(len(pts) - 1)
            ]
            order = sorted(
                (
                    j
                    for j in range(1, len(pts) - 1)
                    if j != j_active and iters - birth[j] >= _MERGE_AGE
                ),
                key=lambda j: lens[j - 1] + lens[j],
            )
            merged = None
            for j in order[:5]:
                tm, em = _segment_max(fp, pts[j - 1], pts[j + 1], e_node[j - 1], e_node[j + 1])
                if em <= cur_max + 1e-14 * max(1.0, abs(cur_max)):
                    merged = (j, tm, em)
                    break
            if merged is None:
                break
            j, tm, em = merged
            del pts[j]
            del e_node[j]
            del birth[j]
            segs[j - 1] = (tm, em)
            del segs[j]
            if j < j_active:
                j_active -= 1

        cur_max = max(e for _, e in segs)
        if cur_max > prev_max + 1e-6 * max(1.0, abs(prev_max)):
            monotone = False
        prev_max = cur_max

    if not converged:
        k_star = _seg_argmax()
        w = _path_point(pts, k_star, segs[k_star][0])
        r = residual(fp, GridFunction(grid, w)).values
        res_norm = float(np.sqrt(np.dot(weights, r * r)))
    u_w = GridFunction(grid, np.asarray(w, dtype=float).copy())
    c_w = max(e for _, e in segs)
    interior = ~grid.boundary_mask()
    min_interior = float(np.min(u_w.values[interior]))
    neg = GridFunction(grid, np.minimum(u_w.values, 0.0))
    negative_part_norm = w_norm(neg, fp.spec.V, fp.spec.p)
    norm_p = fp.norm_p_term(u_w.values)
    fu = np.asarray(fp.spec.f.eval(u_w.values, fp.g_matrix), dtype=float)
    identity_gap = abs(norm_p - float(np.dot(weights, fu * u_w.values)))
    return MPResult(
        u_w=u_w,
        c_w=c_w,
        residual_norm=res_norm,
        iters=iters,
        alpha_probe=alpha,
        rho_probe=rho,
        min_interior=min_interior,
        negative_part_norm=negative_part_norm,
        t0=t0,
        identity_gap=identity_gap,
        mass_fraction=_mass_fraction(fp, u_w.values),
        converged=converged,
        monotone=monotone,
        path=np.stack(pts),
        log=log,
    )


def transfer_path(path: np.ndarray, coarse, fine) -> list[GridFunction]:
    """Resample a polyline of nodal functions onto a refined grid.

    Cubic interpolation keeps the transferred nodes smooth, so the first
    residuals on the fine grid are not dominated by resampling kinks.
    Boundary values are pinned back to zero.
    """
    from scipy.ndimage import map_coordinates

    if coarse.dim != fine.dim or coarse.radius != fine.radius:
        raise ValueError("grids must share dimension and radius")
    axis = (fine.axis_coords() + coarse.radius) / coarse.spacing
    mesh = np.meshgrid(*([axis] * coarse.dim), indexing="ij")
    coords = np.stack([m.ravel() for m in mesh])
    boundary = fine.boundary_mask()
    out = []
    for row in np.asarray(path, dtype=float):
        vals = map_coordinates(row.reshape(coarse.shape), coords, order=3, mode="nearest")
        vals[boundary] = 0.0
        out.append(GridFunction(fine, vals))
    return out


def _decimate_path(path: np.ndarray, keep: int, pin: tuple[int, ...] = ()) -> np.ndarray:
    """Keep endpoints plus interior nodes picked at equal arc length.

    A solve leaves a trail of nodes draped densely over the crest ridge;
    carrying them all to the next refinement level seeds it with dozens
    of tied maxima that then each demand polishing.  A thinned polyline
    is still an admissible starting path and re-densifies on its own.
    Indices in pin are always retained: dropping the maximizer node
    would replace the crest with a chord point strictly below the
    ridge, throwing away the one node whose accuracy the caller cares
    about.
    """
    K = path.shape[0]
    if K <= keep:
        return path
    lens = np.sqrt(np.sum(np.diff(path, axis=0) ** 2, axis=1))
    arc = np.concatenate([[0.0], np.cumsum(lens)])
    targets = np.linspace(0.0, arc[-1], keep)
    idx = sorted(
        set(int(np.argmin(np.abs(arc - s))) for s in targets)
        | {0, K - 1}
        | {int(j) for j in pin if 0 <= j < K}
    )
    return path[idx]


def continuation_solve(
    problems: list[FrozenProblem],
    cfg: MPConfig | list[MPConfig],
    clip_negative: bool = True,
) -> MPResult:
    """Solve a ladder of refinements of one frozen model, coarse to fine.

    The coarsest level starts cold; each finer level resumes from the
    transferred final path of the previous one.  Transfer preserves the
    profile, so the maximizer and its energy land within discretization
    error of the finer level's pass immediately, but it does not hand
    over a small residual: every resampled node sits the inter-grid
    energy offset above the finer saddle and has to be walked down at
    stiffness-limited steps.  Budget accordingly with one config per
    level (a single config is applied to all levels): give fine levels
    a residual_tol they can actually reach or a max_iters cap sized for
    the digits the caller needs, and let the result carry
    converged=False honestly when the cap binds.

    clip_negative zeroes negative lobes that cubic resampling can
    introduce and props the transferred nodes on a faint positive ray
    profile, which is the right call for models whose pass is a
    positive state: tail entries stay strictly positive instead of
    freezing at a resampled zero the descent never revisits.
    """
    if not problems:
        raise ValueError("need at least one level")
    cfgs = [cfg] * len(problems) if isinstance(cfg, MPConfig) else list(cfg)
    if len(cfgs) != len(problems):
        raise ValueError("need one config per level")
    warm: list[GridFunction] | None = None
    result: MPResult | None = None
    for lvl, fp in enumerate(problems):
        level_cfg = replace(
            cfgs[lvl],
            ray_direction=None,
            t0=None,
            warm_path=warm,
            warm_start=cfgs[lvl].warm_start if warm is None else None,
        )
        result = mountain_pass_solve(fp, level_cfg)
        if lvl + 1 < len(problems):
            nxt = problems[lvl + 1]
            e_node = [
                energy(fp, GridFunction(fp.grid, row)) for row in result.path
            ]
            crest = (int(np.argmax(e_node)),)
            path = _decimate_path(result.path, cfgs[lvl + 1].path_points, pin=crest)
            warm = transfer_path(path, fp.grid, nxt.grid)
            if clip_negative:
                v0 = default_ray_direction(nxt)
                t0 = find_t0(nxt, v0)
                K = len(warm)
                warm = [
                    GridFunction(
                        nxt.grid,
                        np.maximum(
                            np.maximum(g.values, 0.0),
                            (k / (K - 1)) * 1e-7 * t0 * v0.values,
                        ),
                    )
                    for k, g in enumerate(warm)
                ]
    assert result is not None
    return result
