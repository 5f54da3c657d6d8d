"""Numerical audit of the structural conditions on f and V.

Every checkable condition gets a verdict ``pass`` / ``fail`` / pass
``indeterminate`` together with a witness point that can be re-evaluated
independently.  Limit conditions (superlinearity at zero, subcritical
growth at infinity) are judged by ratio decay across logarithmic bins:
evidence, not proof, hence the indeterminate verdict when samples show
neither decay nor growth.

The module also estimates the constants entering the contraction factor of
the frozen-gradient iteration: Lipschitz quotients L1 (in t) and L2 (in the
frozen field), the vector-inequality constant

    <|x|^(p-2) x - |y|^(p-2) y, x - y> >= C_p |x - y|^p,

and d = (L2 / (C_p - L1))^(1/(p-1)).  For p < 2 no positive C_p exists
(the quotient degenerates near the diagonal), which the ``not_guaranteed``
flag records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import F_eval, NonlinearityHandle, ProblemSpec

__all__ = [
    "SamplingPlan",
    "ConditionResult",
    "HypothesisReport",
    "ConstantsEstimate",
    "check_f_conditions",
    "check_V_conditions",
    "estimate_lipschitz",
    "cp_constant",
    "contraction_factor",
    "recheck_witness",
]

# Evidence thresholds for the log-binned limit checks.  The extreme bin is
# compared against the bin two steps earlier; one step is too brittle for
# fractional-power decay at the default bin width.
_DECAY_FACTOR = 0.1
_GROWTH_FACTOR = 10.0
_FLAT_FLOOR = 1e-2
_N_BINS = 10
_BIN_GAP = 2


@dataclass(frozen=True)
class SamplingPlan:
    """Deterministic sampling layout for the condition checks."""

    t_low: float = 1e-6
    t_high: float = 1e6
    n_t: int = 400
    n_neg_t: int = 64
    g_mag_high: float = 1e3
    n_g_mags: int = 6
    n_directions: int = 4
    n_cell_points: int = 10000
    n_shifts: int = 128
    shift_range: int = 50
    n_pairs: int = 10000
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.t_low < 1.0 < self.t_high:
            raise ValueError("need t_low < 1 < t_high with t_low positive")
        if self.n_t < 10 * _N_BINS:
            raise ValueError("n_t too small for binned decay evidence")
        if self.n_cell_points < 1:
            raise ValueError("n_cell_points must be positive")


@dataclass
class ConditionResult:
    condition: str
    verdict: str  # "pass" | "fail" | "indeterminate"
    witness: dict
    samples: int
    detail: str = ""


@dataclass
class HypothesisReport:
    entries: list[ConditionResult] = field(default_factory=list)

    @property
    def violations(self) -> list[ConditionResult]:
        return [e for e in self.entries if e.verdict == "fail"]

    @property
    def indeterminate(self) -> list[ConditionResult]:
        return [e for e in self.entries if e.verdict == "indeterminate"]

    def entry(self, condition: str) -> ConditionResult:
        for e in self.entries:
            if e.condition == condition:
                return e
        raise KeyError(condition)

    def to_text(self) -> str:
        lines = []
        for e in self.entries:
            wit = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(e.witness.items()))
            lines.append(f"condition={e.condition} verdict={e.verdict} samples={e.samples} {wit}")
            if e.detail:
                lines.append(f"  detail: {e.detail}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, (tuple, list, np.ndarray)):
        return "(" + ",".join(f"{float(x):.17g}" for x in np.asarray(v).ravel()) + ")"
    return str(v)


def _g_samples(spec: ProblemSpec, plan: SamplingPlan) -> list[np.ndarray]:
    """Frozen-field sample vectors: zero, axis-aligned and random directions."""
    rng = np.random.default_rng(plan.seed + 11)
    mags = np.concatenate(
        [[0.0], np.logspace(-3.0, math.log10(plan.g_mag_high), plan.n_g_mags - 1)]
    )
    dirs = [np.eye(spec.dim)[0]]
    for _ in range(plan.n_directions - 1):
        v = rng.normal(size=spec.dim)
        dirs.append(v / np.linalg.norm(v))
    out = [np.zeros(spec.dim)]
    for m in mags[1:]:
        for d in dirs:
            out.append(m * d)
    return out


def _bin_means(log_t: np.ndarray, ratios: np.ndarray, lo: float, hi: float) -> np.ndarray:
    edges = np.linspace(lo, hi, _N_BINS + 1)
    idx = np.clip(np.digitize(log_t, edges) - 1, 0, _N_BINS - 1)
    means = np.full(_N_BINS, np.nan)
    for b in range(_N_BINS):
        sel = idx == b
        if np.any(sel):
            means[b] = float(np.mean(ratios[sel]))
    return means


def _trend(means: np.ndarray, extreme: str) -> str:
    """Classify the extreme bin against the bin _BIN_GAP steps earlier."""
    if extreme == "low":
        a, b = means[0], means[_BIN_GAP]
    else:
        a, b = means[-1], means[-1 - _BIN_GAP]
    if not (np.isfinite(a) and np.isfinite(b)):
        return "flat"
    if a < _DECAY_FACTOR * b:
        return "decay"
    if a > _GROWTH_FACTOR * b:
        return "growth"
    return "flat"


def check_f_conditions(spec: ProblemSpec, plan: SamplingPlan | None = None) -> HypothesisReport:
    """Audit the five pointwise/limit conditions on the nonlinearity."""
    plan = plan or SamplingPlan()
    f = spec.f
    gs = _g_samples(spec, plan)
    report = HypothesisReport()

    # f1: f(t, g) = 0 for negative t, exact check.
    neg_t = -np.logspace(math.log10(plan.t_low), math.log10(plan.t_high), plan.n_neg_t)
    worst = {"t": float(neg_t[0]), "g": gs[0], "value": 0.0}
    verdict = "pass"
    n = 0
    for g in gs:
        vals = np.asarray(f.eval(neg_t, g), dtype=float)
        n += vals.size
        bad = np.nonzero(vals != 0.0)[0]
        if bad.size:
            i = bad[0]
            worst = {"t": float(neg_t[i]), "g": g, "value": float(vals[i])}
            verdict = "fail"
            break
    report.entries.append(
        ConditionResult(
            "f1_vanishes_for_negative_t",
            verdict,
            worst,
            n,
            "f must be exactly zero for t < 0",
        )
    )

    t_near = np.logspace(math.log10(plan.t_low), 0.0, plan.n_t)
    t_far = np.logspace(0.0, math.log10(plan.t_high), plan.n_t)
    log_near = np.log10(t_near)
    log_far = np.log10(t_far)

    # f2: f / t^(p-1) -> 0 as t -> 0+.
    verdict, witness, n = "pass", {}, 0
    for g in gs:
        ratios = np.abs(np.asarray(f.eval(t_near, g), dtype=float)) / t_near ** (spec.p - 1.0)
        n += ratios.size
        means = _bin_means(log_near, ratios, math.log10(plan.t_low), 0.0)
        trend = _trend(means, "low")
        i_ext = int(np.argmax(log_near <= math.log10(plan.t_low) + (0.0 - math.log10(plan.t_low)) / _N_BINS))
        wit = {
            "t": float(t_near[0]),
            "g": g,
            "ratio": float(ratios[0]),
            "bin_mean": float(means[0]),
            "earlier_bin_mean": float(means[_BIN_GAP]),
        }
        if trend == "growth" or (trend == "flat" and means[0] >= _FLAT_FLOOR):
            verdict, witness = "fail", wit
            break
        if trend == "flat":
            verdict, witness = "indeterminate", wit
        elif not witness:
            witness = wit
    report.entries.append(
        ConditionResult(
            "f2_superlinear_at_zero",
            verdict,
            witness,
            n,
            f"ratio f/t^(p-1) must decay towards t={plan.t_low:g}",
        )
    )

    # f3: f / t^(q'-1) -> 0 as t -> inf for some subcritical q'.  The stored
    # q is one candidate; the condition is existential, so trailing
    # exponents inside the subcritical window are probed as well.
    probes = [spec.q]
    for bump in (0.5, 1.0, 2.0):
        cand = spec.q + bump
        if cand < spec.critical_exponent:
            probes.append(cand)
    verdict, witness, n = "indeterminate", {}, 0
    for qp in probes:
        all_decay = True
        for g in gs:
            ratios = np.abs(np.asarray(f.eval(t_far, g), dtype=float)) / t_far ** (qp - 1.0)
            n += ratios.size
            means = _bin_means(log_far, ratios, 0.0, math.log10(plan.t_high))
            if _trend(means, "high") != "decay":
                all_decay = False
                witness = {
                    "t": float(t_far[-1]),
                    "g": g,
                    "exponent": qp,
                    "ratio": float(ratios[-1]),
                    "bin_mean": float(means[-1]),
                    "earlier_bin_mean": float(means[-1 - _BIN_GAP]),
                }
                break
        if all_decay:
            verdict = "pass"
            witness = {"exponent": qp, "t": float(t_far[-1])}
            break
    if verdict != "pass":
        g0 = gs[0]
        qp = probes[-1]
        ratios = np.abs(np.asarray(f.eval(t_far, g0), dtype=float)) / t_far ** (qp - 1.0)
        means = _bin_means(log_far, ratios, 0.0, math.log10(plan.t_high))
        if _trend(means, "high") == "growth":
            verdict = "fail"
            witness = {
                "t": float(t_far[-1]),
                "g": g0,
                "exponent": qp,
                "ratio": float(ratios[-1]),
                "bin_mean": float(means[-1]),
                "earlier_bin_mean": float(means[-1 - _BIN_GAP]),
            }
    report.entries.append(
        ConditionResult(
            "f3_subcritical_growth",
            verdict,
            witness,
            n,
            f"probed exponents {['%g' % q for q in probes]}",
        )
    )

    # f4: 0 < theta F(t, g) <= t f(t, g) for t > 0 (Ambrosetti-Rabinowitz).
    t_pos = np.concatenate([t_near, t_far])
    verdict, witness, n = "pass", {}, 0
    worst_margin = -np.inf
    for g in gs:
        F = np.asarray(F_eval(f, t_pos, g), dtype=float)
        tf = t_pos * np.asarray(f.eval(t_pos, g), dtype=float)
        n += t_pos.size
        nonpos = np.nonzero(spec.theta * F <= 0.0)[0]
        if nonpos.size:
            i = nonpos[0]
            verdict = "fail"
            witness = {"t": float(t_pos[i]), "g": g, "theta_F": float(spec.theta * F[i])}
            break
        margin = spec.theta * F - tf  # must stay <= 0 up to rounding
        tol = 1e-9 * np.maximum(1.0, np.abs(tf))
        bad = np.nonzero(margin > tol)[0]
        if bad.size:
            i = bad[np.argmax(margin[bad] / np.maximum(1.0, np.abs(tf[bad])))]
            verdict = "fail"
            witness = {
                "t": float(t_pos[i]),
                "g": g,
                "theta_F": float(spec.theta * F[i]),
                "t_f": float(tf[i]),
            }
            break
        i = int(np.argmax(margin / np.maximum(1.0, np.abs(tf))))
        if margin[i] > worst_margin:
            worst_margin = float(margin[i])
            witness = {
                "t": float(t_pos[i]),
                "g": g,
                "theta_F": float(spec.theta * F[i]),
                "t_f": float(tf[i]),
            }
    report.entries.append(
        ConditionResult(
            "f4_ambrosetti_rabinowitz",
            verdict,
            witness,
            n,
            "0 < theta F <= t f pointwise for t > 0",
        )
    )

    # f5: F(t, g) >= a t^theta - b for t > 0.
    verdict, witness, n = "pass", {}, 0
    worst_gap = np.inf
    for g in gs:
        F = np.asarray(F_eval(f, t_pos, g), dtype=float)
        bound = spec.a * t_pos**spec.theta - spec.b
        n += t_pos.size
        gap = F - bound
        tol = 1e-9 * np.maximum(1.0, np.abs(bound))
        bad = np.nonzero(gap < -tol)[0]
        if bad.size:
            i = bad[0]
            verdict = "fail"
            witness = {"t": float(t_pos[i]), "g": g, "F": float(F[i]), "bound": float(bound[i])}
            break
        i = int(np.argmin(gap))
        if gap[i] < worst_gap:
            worst_gap = float(gap[i])
            witness = {"t": float(t_pos[i]), "g": g, "F": float(F[i]), "bound": float(bound[i])}
    report.entries.append(
        ConditionResult(
            "f5_coercive_lower_bound",
            verdict,
            witness,
            n,
            f"F >= {spec.a:g} t^{spec.theta:g} - {spec.b:g}",
        )
    )
    return report


def check_V_conditions(spec: ProblemSpec, plan: SamplingPlan | None = None) -> HypothesisReport:
    """Audit the positive floor and the lattice periodicity of V."""
    plan = plan or SamplingPlan()
    V = spec.V
    rng = np.random.default_rng(plan.seed + 23)
    period = np.asarray(V.period[: spec.dim] or (1.0,) * spec.dim, dtype=float)
    if period.size != spec.dim:
        period = np.full(spec.dim, float(period.flat[0]))
    report = HypothesisReport()

    cell = rng.uniform(0.0, 1.0, size=(plan.n_cell_points, spec.dim)) * period
    vals = np.asarray(V.eval(cell), dtype=float)
    i = int(np.argmin(vals))
    vmin = float(vals[i])
    verdict = "pass" if vmin > 0.0 else "fail"
    detail = f"sampled floor {vmin:.17g}, claimed floor {V.floor:.17g}"
    if vmin > 0.0 and vmin < V.floor - 1e-9 * max(1.0, abs(V.floor)):
        detail += " (claimed floor is optimistic)"
    report.entries.append(
        ConditionResult(
            "V1_positive_floor",
            verdict,
            {"x": cell[i], "value": vmin},
            plan.n_cell_points,
            detail,
        )
    )

    n_base = min(256, plan.n_cell_points)
    base = cell[:n_base]
    shifts = rng.integers(-plan.shift_range, plan.shift_range + 1, size=(plan.n_shifts, spec.dim))
    shifts = shifts[np.any(shifts != 0, axis=1)]
    v0 = np.asarray(V.eval(base), dtype=float)
    worst = {"x": base[0], "shift": np.zeros(spec.dim), "residual": 0.0}
    worst_res = 0.0
    for s in shifts:
        vs = np.asarray(V.eval(base + s * period), dtype=float)
        res = np.abs(vs - v0)
        j = int(np.argmax(res))
        if res[j] > worst_res:
            worst_res = float(res[j])
            worst = {"x": base[j], "shift": s * period, "residual": worst_res}
    verdict = "pass" if worst_res <= 1e-9 else "fail"
    report.entries.append(
        ConditionResult(
            "V2_lattice_periodicity",
            verdict,
            worst,
            int(base.shape[0] * shifts.shape[0]),
            f"max |V(x+k*period) - V(x)| = {worst_res:.17g}",
        )
    )
    return report


def recheck_witness(spec: ProblemSpec, result: ConditionResult) -> bool:
    """Re-evaluate a fail witness; True when the violation reproduces."""
    w = result.witness
    if result.condition == "f1_vanishes_for_negative_t":
        return float(spec.f.eval(float(w["t"]), np.asarray(w["g"], dtype=float))) != 0.0
    if result.condition == "f2_superlinear_at_zero":
        t = float(w["t"])
        val = abs(float(spec.f.eval(t, np.asarray(w["g"], dtype=float))))
        return val / t ** (spec.p - 1.0) >= _FLAT_FLOOR
    if result.condition == "f3_subcritical_growth":
        t = float(w["t"])
        val = abs(float(spec.f.eval(t, np.asarray(w["g"], dtype=float))))
        return val / t ** (float(w["exponent"]) - 1.0) >= float(w["earlier_bin_mean"])
    if result.condition == "f4_ambrosetti_rabinowitz":
        t = float(w["t"])
        g = np.asarray(w["g"], dtype=float)
        F = float(F_eval(spec.f, t, g))
        tf = t * float(spec.f.eval(t, g))
        return spec.theta * F <= 0.0 or spec.theta * F > tf + 1e-9 * max(1.0, abs(tf))
    if result.condition == "f5_coercive_lower_bound":
        t = float(w["t"])
        g = np.asarray(w["g"], dtype=float)
        F = float(F_eval(spec.f, t, g))
        bound = spec.a * t**spec.theta - spec.b
        return F < bound - 1e-9 * max(1.0, abs(bound))
    if result.condition == "V1_positive_floor":
        return float(spec.V.eval(np.asarray(w["x"], dtype=float)[None, :])) <= 0.0
    if result.condition == "V2_lattice_periodicity":
        x = np.asarray(w["x"], dtype=float)[None, :]
        s = np.asarray(w["shift"], dtype=float)
        res = abs(float(spec.V.eval(x + s)) - float(spec.V.eval(x)))
        return res > 1e-9
    raise ValueError(f"unknown condition {result.condition!r}")


# -- constants ----------------------------------------------------------


@dataclass
class ConstantsEstimate:
    rho1: float
    rho2: float
    L1: float
    L2: float
    cp: float
    cp_not_guaranteed: bool
    d: float | None = None
    guarantee_holds: bool | None = None

    def to_text(self) -> str:
        lines = [
            f"rho1 = {self.rho1:.17g}",
            f"rho2 = {self.rho2:.17g}",
            f"L1 = {self.L1:.17g}",
            f"L2 = {self.L2:.17g}",
            f"Cp = {self.cp:.17g}",
            f"cp_not_guaranteed = {self.cp_not_guaranteed}",
            f"d = {'' if self.d is None else f'{self.d:.17g}'}",
            f"guarantee_holds = {self.guarantee_holds}",
        ]
        return "\n".join(lines) + "\n"


def estimate_lipschitz(
    spec: ProblemSpec,
    rho1: float,
    rho2: float,
    plan: SamplingPlan | None = None,
) -> tuple[float, float]:
    """Sampled Lipschitz quotients of f on [0, rho1] x (frozen-field ball).

    ``rho2`` bounds the gradient sup-norm, so the frozen-field samples cover
    the ball of radius rho2^(p-1) where |grad u|^(p-2) grad u lives.  The
    quotients use the exponent p-1 from the structural condition; both
    deterministic near-diagonal batteries (separations down to 1e-4) and
    seeded random pairs contribute.
    """
    if not (rho1 > 0.0 and rho2 > 0.0):
        raise ValueError("rho1 and rho2 must be positive")
    plan = plan or SamplingPlan()
    rng = np.random.default_rng(plan.seed + 37)
    f = spec.f
    pm1 = spec.p - 1.0
    g_ball = rho2**pm1

    dirs = [np.eye(spec.dim)[0]]
    for _ in range(max(1, plan.n_directions - 1)):
        v = rng.normal(size=spec.dim)
        dirs.append(v / np.linalg.norm(v))
    g_mags = np.array([0.0, 0.25 * g_ball, 0.5 * g_ball, g_ball])
    g_set = [m * d for m in g_mags for d in dirs]

    # L1 over t-pairs at frozen g.
    L1 = 0.0
    t_base = np.linspace(0.0, rho1, 41)
    deltas = np.array([1e-4, 3e-4, 1e-3, 1e-2, 0.1 * rho1])
    for g in g_set:
        for d in deltas:
            t1 = t_base
            t2 = np.clip(t_base - d, 0.0, rho1)
            keep = t1 != t2
            quot = np.abs(
                np.asarray(f.eval(t1[keep], g), dtype=float)
                - np.asarray(f.eval(t2[keep], g), dtype=float)
            ) / np.abs(t1[keep] - t2[keep]) ** pm1
            if quot.size:
                L1 = max(L1, float(np.max(quot)))
    t1 = rng.uniform(0.0, rho1, size=plan.n_pairs)
    t2 = rng.uniform(0.0, rho1, size=plan.n_pairs)
    keep = np.abs(t1 - t2) > 1e-12
    for g in g_set[: len(dirs) * 2]:
        quot = np.abs(
            np.asarray(f.eval(t1[keep], g), dtype=float)
            - np.asarray(f.eval(t2[keep], g), dtype=float)
        ) / np.abs(t1[keep] - t2[keep]) ** pm1
        L1 = max(L1, float(np.max(quot)))

    # L2 over frozen-field pairs at fixed t.
    L2 = 0.0
    t_set = np.array([rho1, 0.75 * rho1, 0.5 * rho1, 0.25 * rho1])
    mag1 = np.linspace(0.0, g_ball, 41)
    for t in t_set:
        for d in dirs:
            for sep in deltas:
                m2 = np.clip(mag1 + sep * max(g_ball, 1.0), 0.0, g_ball)
                keep = m2 != mag1
                if not np.any(keep):
                    continue
                g1 = mag1[keep, None] * d[None, :]
                g2 = m2[keep, None] * d[None, :]
                diff = np.linalg.norm(g1 - g2, axis=1) ** pm1
                quot = np.abs(
                    np.asarray(f.eval(t, g1), dtype=float)
                    - np.asarray(f.eval(t, g2), dtype=float)
                ) / diff
                L2 = max(L2, float(np.max(quot)))
    xi1 = rng.uniform(-g_ball, g_ball, size=(plan.n_pairs, spec.dim))
    xi2 = rng.uniform(-g_ball, g_ball, size=(plan.n_pairs, spec.dim))
    sep = np.linalg.norm(xi1 - xi2, axis=1)
    keep = sep > 1e-12
    for t in t_set:
        quot = np.abs(
            np.asarray(f.eval(t, xi1[keep]), dtype=float)
            - np.asarray(f.eval(t, xi2[keep]), dtype=float)
        ) / sep[keep] ** pm1
        L2 = max(L2, float(np.max(quot)))
    if L2 < 1e-15:
        L2 = 0.0
    return L1, L2


def cp_constant(p: float, dim: int, n_samples: int = 20000, seed: int = 0) -> tuple[float, bool]:
    """Sampled minimum of the monotonicity quotient of x -> |x|^(p-2) x.

    Returns ``(value, not_guaranteed)``.  For p >= 2 the minimum is attained
    at antipodal pairs; for p < 2 the quotient degenerates to zero near the
    diagonal, so the sampled value is only a record of the sweep and the
    flag is set.
    """
    if not p > 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    rng = np.random.default_rng(seed)

    def quotient(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        nx = np.linalg.norm(x, axis=-1)
        ny = np.linalg.norm(y, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ax = np.where(nx > 0.0, nx ** (p - 2.0), 0.0)
            ay = np.where(ny > 0.0, ny ** (p - 2.0), 0.0)
        diff_pow = ax[..., None] * x - ay[..., None] * y
        d = x - y
        num = np.sum(diff_pow * d, axis=-1)
        den = np.sum(d * d, axis=-1) ** (0.5 * p)
        return num / den

    best = np.inf
    # Antipodal and random batteries; scale invariance makes a bounded box
    # representative.
    xs = rng.uniform(-2.0, 2.0, size=(n_samples, dim))
    ys = rng.uniform(-2.0, 2.0, size=(n_samples, dim))
    sepa = np.linalg.norm(xs - ys, axis=1)
    scale = np.maximum(np.linalg.norm(xs, axis=1), np.linalg.norm(ys, axis=1))
    keep = sepa > 1e-9 * np.maximum(1.0, scale)
    best = min(best, float(np.min(quotient(xs[keep], ys[keep]))))

    unit = rng.normal(size=(256, dim))
    unit /= np.linalg.norm(unit, axis=1)[:, None]
    best = min(best, float(np.min(quotient(unit, -unit))))

    # Near-diagonal battery: detects the p < 2 degeneracy.
    base = rng.normal(size=(512, dim))
    base /= np.linalg.norm(base, axis=1)[:, None]
    for sep in (1e-1, 1e-2, 1e-3, 1e-4):
        off = rng.normal(size=(512, dim))
        off /= np.linalg.norm(off, axis=1)[:, None]
        best = min(best, float(np.min(quotient(base, base + sep * off))))

    return best, p < 2.0


def contraction_factor(est: ConstantsEstimate, p: float) -> float:
    """Fill in and return d = (L2 / (C_p - L1))^(1/(p-1)).

    L2 = 0 degenerates to d = 0: the map no longer depends on the frozen
    field, so the iteration lands on a fixed point right after the first
    solve.  When C_p <= L1 (or C_p itself is not a guaranteed bound) the
    formula gives no control and d is the +inf sentinel.
    """
    if not p > 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    if est.L2 == 0.0:
        est.d = 0.0
        est.guarantee_holds = True
    elif not est.cp_not_guaranteed and est.cp > est.L1:
        est.d = (est.L2 / (est.cp - est.L1)) ** (1.0 / (p - 1.0))
        est.guarantee_holds = bool(est.d < 1.0)
    else:
        est.d = math.inf
        est.guarantee_holds = False
    return est.d
