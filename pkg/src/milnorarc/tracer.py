"""Branch tracing on Milnor sets and estimation of asymptotic nonregular values.

The pipeline slices the Milnor set with spheres of geometrically growing
radius, matches the slice points across radii into branches at infinity,
extrapolates the value of f along each branch, and monitors the decay of
||x|| * nu(Df(x)) predicted for convergent branches.

For n = 2 the sphere is a circle; the restriction of the single equation to
it becomes, under the tangent half-angle substitution, a univariate
polynomial whose coefficients are computed exactly, so all its real roots
are recovered from the companion matrix and refined by bracketed bisection.
A uniform angular scan (config.grid nodes) supplies additional root
candidates as a safety net.  Near-tangent root pairs, which arise for
branches approaching the same escape direction from both sides and can be
separated by ~1e-10 radians, are split by a local critical-point analysis.
For n >= 3 a multistart damped Newton solver is used and results are
explicitly best-effort (branches may be missed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import milnor
from .milnor import MilnorSystem, malgrange_quantity, milnor_equations
from .poly import Polynomial

STATUS_CONVERGENT = "convergent"
STATUS_DIVERGENT = "divergent"
STATUS_LOST = "lost"


class DegenerateMilnorError(RuntimeError):
    """The Milnor system has an identically zero equation for this center."""


@dataclass(frozen=True)
class TraceConfig:
    """Tolerances, thresholds and schedules for the tracing pipeline.

    `tol` is a scale-aware residual tolerance: an equation value counts as
    zero when |eq(x)| < tol * S where S sums |coeff| * B^deg over the terms
    with B = ||a|| + R + 1.  A raw absolute tolerance would be meaningless at
    large radii where polynomial values grow like R^deg.
    """

    seed: int = 0
    tol: float = 1e-8
    merge_dist: float = 1e-9      # absolute point-merging distance
    conv_tol: float = 1e-3
    cluster_tol: float = 1e-3
    div_threshold: float = 1e6
    alpha_min: float = 0.25
    r0: float = 10.0
    radius_factor: float = 2.0
    radius_count: int = 8
    grid: int = 4096
    starts: int = 512
    match_tol: float = 0.5        # max direction drift between consecutive radii
    newton_iters: int = 60

    def radii(self) -> List[float]:
        return [self.r0 * self.radius_factor ** k for k in range(self.radius_count)]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "tol": self.tol,
            "merge_dist": self.merge_dist,
            "conv_tol": self.conv_tol,
            "cluster_tol": self.cluster_tol,
            "div_threshold": self.div_threshold,
            "alpha_min": self.alpha_min,
            "r0": self.r0,
            "radius_factor": self.radius_factor,
            "radius_count": self.radius_count,
            "grid": self.grid,
            "starts": self.starts,
            "match_tol": self.match_tol,
        }


@dataclass
class Sample:
    radius: float
    point: Tuple[float, ...]
    f_value: float
    malgrange: float
    residual: float


@dataclass
class BranchTrace:
    branch_id: int
    samples: List[Sample] = field(default_factory=list)
    status: str = STATUS_LOST

    @property
    def last(self) -> Sample:
        return self.samples[-1]


@dataclass
class LimitValue:
    value: float
    uncertainty: float
    branch_ids: List[int]

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "uncertainty": self.uncertainty,
            "branch_ids": list(self.branch_ids),
        }


@dataclass
class AnalysisReport:
    center: Tuple[Fraction, ...]
    status: str                      # "ok" | "degenerate" | "trivial-degree"
    certified: bool
    limit_values: List[LimitValue]
    divergent_count: int
    bound_cap: int
    bound_respected: bool
    malgrange_monitor: Dict[int, bool]
    seed: int
    radii: List[float]
    config: dict
    note: str = ""
    traces: List[BranchTrace] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "center": [str(c) for c in self.center],
            "status": self.status,
            "certified": self.certified,
            "limit_values": [lv.to_dict() for lv in self.limit_values],
            "divergent_count": self.divergent_count,
            "bound_cap": self.bound_cap,
            "bound_respected": self.bound_respected,
            "malgrange_monitor": {str(k): v for k, v in self.malgrange_monitor.items()},
            "seed": self.seed,
            "radii": self.radii,
            "config": self.config,
            "note": self.note,
            "branches": [
                {
                    "branch_id": t.branch_id,
                    "status": t.status,
                    "samples": len(t.samples),
                    "f_last": t.samples[-1].f_value if t.samples else None,
                }
                for t in self.traces
            ],
        }


@dataclass
class SInfinityReport:
    per_center: List[AnalysisReport]
    intersection: List[LimitValue]
    cluster_tol: float
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "per_center": [r.to_dict() for r in self.per_center],
            "intersection": [lv.to_dict() for lv in self.intersection],
            "cluster_tol": self.cluster_tol,
            "note": self.note,
        }


# ---------------------------------------------------------------------------
# Compiled float evaluation
# ---------------------------------------------------------------------------


class _Compiled:
    """Polynomial lowered to exponent/coefficient arrays for vectorized eval."""

    __slots__ = ("exps", "coeffs", "term_degrees", "abs_coeffs", "num_vars")

    def __init__(self, f: Polynomial):
        items = f.sorted_terms()
        self.num_vars = f.num_vars
        if items:
            self.exps = np.array([e for e, _ in items], dtype=np.int64)
            self.coeffs = np.array([float(c) for _, c in items], dtype=float)
        else:
            self.exps = np.zeros((0, f.num_vars), dtype=np.int64)
            self.coeffs = np.zeros(0, dtype=float)
        self.term_degrees = self.exps.sum(axis=1)
        self.abs_coeffs = np.abs(self.coeffs)

    def eval_many(self, X: np.ndarray) -> np.ndarray:
        """Evaluate at a batch of points, X of shape (m, n)."""
        if self.coeffs.size == 0:
            return np.zeros(X.shape[0])
        return np.prod(X[:, None, :] ** self.exps[None, :, :], axis=2) @ self.coeffs

    def eval_one(self, x: np.ndarray) -> float:
        return float(self.eval_many(np.asarray(x, dtype=float)[None, :])[0])

    def scale(self, bound: float) -> float:
        """Magnitude bound sum |c| * B^deg used for scale-aware residuals."""
        if self.coeffs.size == 0:
            return 1.0
        return float(np.sum(self.abs_coeffs * bound ** self.term_degrees)) + 1.0


def _compile_system(sys: MilnorSystem):
    return [_Compiled(eq) for eq in sys.equations]


def _scaled_residual(compiled: Sequence[_Compiled], x: np.ndarray, bound: float) -> float:
    return max(abs(c.eval_one(x)) / c.scale(bound) for c in compiled)


# ---------------------------------------------------------------------------
# Slice solving
# ---------------------------------------------------------------------------


def _pivot_revalidate(sys: MilnorSystem, x: np.ndarray, bound: float, tol: float) -> bool:
    """Where the pivot partial nearly vanishes, recheck against minors mode."""
    if sys.pivot == milnor.PIVOT_MINORS:
        return True
    f = sys.source[0]
    fi = _Compiled(f.partial(int(sys.pivot)))
    if abs(fi.eval_one(x)) / fi.scale(bound) > math.sqrt(tol):
        return True
    minors = milnor_equations(list(sys.source), sys.center, pivot=milnor.PIVOT_MINORS)
    comp = _compile_system(minors)
    return _scaled_residual(comp, x, bound) < tol


def slice_solve(sys: MilnorSystem, radius: float, config: Optional[TraceConfig] = None) -> List[np.ndarray]:
    """Points of the Milnor set on the sphere ||x - a|| = radius.

    Returns de-duplicated float points; each satisfies every equation to the
    scale-aware tolerance.  An empty list is a valid outcome.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    config = config or TraceConfig()
    if sys.has_zero_equation():
        raise DegenerateMilnorError("Milnor system has an identically zero equation")
    n = sys.num_vars
    a = np.array([float(c) for c in sys.center])
    bound = float(np.linalg.norm(a)) + radius + 1.0
    compiled = _compile_system(sys)

    if n == 2:
        points = _slice_solve_circle(sys, compiled, a, radius, config)
    else:
        points = _slice_solve_newton(sys, compiled, a, radius, config)

    accepted = []
    for x in points:
        if _scaled_residual(compiled, x, bound) >= config.tol:
            continue
        if not _pivot_revalidate(sys, x, bound, config.tol):
            continue
        accepted.append(x)
    return _dedupe(accepted, max(config.merge_dist, 4e-12 * (1.0 + radius)))


def _dedupe(points: List[np.ndarray], dist: float) -> List[np.ndarray]:
    kept: List[np.ndarray] = []
    for x in points:
        if all(np.linalg.norm(x - y) > dist for y in kept):
            kept.append(x)
    return kept


# -- exact univariate polynomial helpers (Fraction coefficient lists) --------


def _upoly_mul(a: List[Fraction], b: List[Fraction]) -> List[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
    return out


def _upoly_pow(a: List[Fraction], n: int) -> List[Fraction]:
    result = [Fraction(1)]
    base = a
    while n:
        if n & 1:
            result = _upoly_mul(result, base)
        base = _upoly_mul(base, base)
        n >>= 1
    return result


def _half_angle_poly(eq: Polynomial, a, radius: float) -> List[Fraction]:
    """Exact coefficients of the circle restriction under tau = tan(theta/2).

    With x = a1 + R(1-tau^2)/(1+tau^2), y = a2 + 2R tau/(1+tau^2), the
    equation times (1+tau^2)^deg is a polynomial in tau.  The radius (a
    dyadic float) and the center are exact, so the coefficients are exact.
    """
    Rq = Fraction(radius)
    a1, a2 = Fraction(a[0]), Fraction(a[1])
    Xp = [a1 + Rq, Fraction(0), a1 - Rq]        # a1(1+tau^2) + R(1-tau^2)
    Yp = [a2, 2 * Rq, a2]                       # a2(1+tau^2) + 2R tau
    W = [Fraction(1), Fraction(0), Fraction(1)]  # 1 + tau^2
    D = int(eq.degree)
    total = [Fraction(0)]
    for exp, coeff in eq.sorted_terms():
        i, j = exp
        piece = _upoly_mul(_upoly_pow(Xp, i), _upoly_pow(Yp, j))
        piece = _upoly_mul(piece, _upoly_pow(W, D - i - j))
        piece = [coeff * c for c in piece]
        if len(piece) > len(total):
            total += [Fraction(0)] * (len(piece) - len(total))
        for k, c in enumerate(piece):
            total[k] += c
    return total


class _CircleFuncs:
    """The equation and its first two derivatives along the circle."""

    def __init__(self, eq: Polynomial, a: np.ndarray, radius: float):
        self.a = a
        self.R = radius
        self.v0 = _Compiled(eq)
        gx, gy = eq.partial(0), eq.partial(1)
        self.gx, self.gy = _Compiled(gx), _Compiled(gy)
        self.hxx = _Compiled(gx.partial(0))
        self.hxy = _Compiled(gx.partial(1))
        self.hyy = _Compiled(gy.partial(1))

    def point(self, theta: float) -> np.ndarray:
        return self.a + self.R * np.array([math.cos(theta), math.sin(theta)])

    def v(self, theta: float) -> float:
        return self.v0.eval_one(self.point(theta))

    def dv(self, theta: float) -> float:
        x = self.point(theta)
        s, c = math.sin(theta), math.cos(theta)
        return self.R * (-s * self.gx.eval_one(x) + c * self.gy.eval_one(x))

    def ddv(self, theta: float) -> float:
        x = self.point(theta)
        s, c = math.sin(theta), math.cos(theta)
        R = self.R
        quad = R * R * (
            s * s * self.hxx.eval_one(x)
            - 2.0 * s * c * self.hxy.eval_one(x)
            + c * c * self.hyy.eval_one(x)
        )
        lin = -R * (c * self.gx.eval_one(x) + s * self.gy.eval_one(x))
        return quad + lin


def _bisect(fn, lo: float, hi: float, flo: float) -> float:
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def _slice_solve_circle(sys: MilnorSystem, compiled, a: np.ndarray, radius: float,
                        config: TraceConfig) -> List[np.ndarray]:
    eq = sys.equations[0]
    fns = _CircleFuncs(eq, a, radius)
    two_pi = 2.0 * math.pi

    # root candidates from the exact half-angle polynomial
    coeffs = _half_angle_poly(eq, sys.center, radius)
    cf = np.array([float(c) for c in coeffs], dtype=float)
    candidates: List[float] = [math.pi]  # tau = infinity is not covered below
    top = np.max(np.abs(cf)) if cf.size else 0.0
    if top > 0.0:
        cf = cf / top
        desc = cf[::-1]
        nz = np.nonzero(np.abs(desc) > 1e-13)[0]
        if nz.size:
            desc = desc[nz[0]:]
        if desc.size > 1:
            for root in np.roots(desc):
                if abs(root.imag) <= 1e-6 * (1.0 + abs(root.real)):
                    candidates.append(2.0 * math.atan(float(root.real)) % two_pi)

    # grid sign changes as an extra candidate source
    grid = np.linspace(0.0, two_pi, config.grid, endpoint=False)
    X = a[None, :] + radius * np.stack([np.cos(grid), np.sin(grid)], axis=1)
    vals = fns.v0.eval_many(X)
    for i in range(config.grid):
        j = (i + 1) % config.grid
        if vals[i] == 0.0 or vals[i] * vals[j] < 0.0:
            candidates.append(float(grid[i]))

    roots: List[float] = []

    def push(theta: float) -> None:
        theta %= two_pi
        if all(min(abs(theta - r), two_pi - abs(theta - r)) > 1e-12 for r in roots):
            roots.append(theta)

    for theta_c in sorted(candidates):
        # transversal root: polish by Newton, then verify with a sign bracket
        theta_n = theta_c
        for _ in range(60):
            val, slope = fns.v(theta_n), fns.dv(theta_n)
            if slope == 0.0:
                break
            step = val / slope
            if abs(step) > 0.1:
                step = math.copysign(0.1, step)
            theta_new = theta_n - step
            if theta_new == theta_n:
                break
            theta_n = theta_new
        bracketed = False
        delta = 1e-14
        while delta <= 1e-4:
            flo, fhi = fns.v(theta_n - delta), fns.v(theta_n + delta)
            if flo == 0.0:
                push(theta_n - delta)
                bracketed = True
                break
            if flo * fhi < 0.0:
                push(_bisect(fns.v, theta_n - delta, theta_n + delta, flo))
                bracketed = True
                break
            delta *= 10.0
        if bracketed:
            continue
        # near-tangent pair: walk to the critical point of v along the circle
        theta_s = theta_c
        ok = False
        for _ in range(80):
            slope, curv = fns.dv(theta_s), fns.ddv(theta_s)
            if curv == 0.0:
                break
            step = slope / curv
            if abs(step) > 0.05:
                step = math.copysign(0.05, step)
            theta_new = theta_s - step
            if abs(theta_new - theta_s) < 1e-15:
                ok = True
                theta_s = theta_new
                break
            theta_s = theta_new
        else:
            ok = True
        if not ok:
            continue
        v_star, curv = fns.v(theta_s), fns.ddv(theta_s)
        if curv == 0.0 or v_star * curv >= 0.0:
            continue  # one-sided tangency or no real pair here
        h = math.sqrt(-2.0 * v_star / curv)
        for sign in (-1.0, 1.0):
            lo, hi = sorted((theta_s, theta_s + sign * 3.0 * h))
            flo, fhi = fns.v(lo), fns.v(hi)
            if flo * fhi < 0.0:
                push(_bisect(fns.v, lo, hi, flo))

    return [fns.point(t) for t in sorted(roots)]


def _slice_solve_newton(sys: MilnorSystem, compiled, a: np.ndarray, radius: float,
                        config: TraceConfig) -> List[np.ndarray]:
    n = a.shape[0]
    rng = np.random.default_rng([config.seed, int(round(radius * 1024)) & 0x7FFFFFFF])
    U = rng.standard_normal((config.starts, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    X = a[None, :] + radius * U

    grads = [[_Compiled(eq.partial(k)) for k in range(n)] for eq in sys.equations]
    scales = np.array([c.scale(float(np.linalg.norm(a)) + radius + 1.0) for c in compiled] + [radius ** 2])

    def residuals(X):
        F = np.stack([c.eval_many(X) for c in compiled], axis=1)
        sphere = np.sum((X - a[None, :]) ** 2, axis=1) - radius ** 2
        return np.concatenate([F, sphere[:, None]], axis=1)

    def jacobians(X):
        m = X.shape[0]
        J = np.zeros((m, len(compiled) + 1, n))
        for r, g in enumerate(grads):
            for k in range(n):
                J[:, r, k] = g[k].eval_many(X)
        J[:, -1, :] = 2.0 * (X - a[None, :])
        return J

    for _ in range(config.newton_iters):
        F = residuals(X)
        J = jacobians(X)
        norm_before = np.linalg.norm(F / scales[None, :], axis=1)
        try:
            step = np.linalg.solve(J, F[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(J[i], F[i], rcond=None)[0] for i in range(X.shape[0])])
        # damped update: halve the step while the scaled residual grows
        alpha = np.ones(X.shape[0])
        Xn = X - step
        for _ in range(6):
            norm_after = np.linalg.norm(residuals(Xn) / scales[None, :], axis=1)
            worse = norm_after > norm_before
            if not np.any(worse):
                break
            alpha = np.where(worse, alpha * 0.5, alpha)
            Xn = X - alpha[:, None] * step
        X = Xn
        if np.max(np.linalg.norm(F / scales[None, :], axis=1)) < 1e-15:
            break

    F = residuals(X)
    ok = np.all(np.abs(F / scales[None, :]) < config.tol, axis=1)
    sphere_ok = np.abs(np.sum((X - a[None, :]) ** 2, axis=1) - radius ** 2) < 1e-10 * radius ** 2 * 10
    keep = ok & sphere_ok & np.all(np.isfinite(X), axis=1)
    return [X[i] for i in range(X.shape[0]) if keep[i]]


# ---------------------------------------------------------------------------
# Branch tracing
# ---------------------------------------------------------------------------


def trace_branches(
    f: Polynomial,
    center: Sequence,
    config: Optional[TraceConfig] = None,
    radii: Optional[Sequence[float]] = None,
) -> List[BranchTrace]:
    """Follow branches at infinity of the Milnor set across growing spheres.

    Points at consecutive radii are matched by nearest escape direction
    (greedy mutual-nearest); unmatched points open or close branches.
    """
    config = config or TraceConfig()
    radii = list(radii) if radii is not None else config.radii()
    if len(radii) < 4:
        raise ValueError("need at least 4 radii")
    if any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")

    sys = milnor_equations([f], center, pivot=milnor.default_pivot(f))
    if sys.has_zero_equation():
        raise DegenerateMilnorError(
            "Milnor system has an identically zero equation; the center is degenerate"
        )
    compiled = _compile_system(sys)
    a = np.array([float(c) for c in sys.center])

    branches: List[BranchTrace] = []
    open_branches: List[Tuple[BranchTrace, np.ndarray]] = []  # (trace, last direction)
    next_id = 0

    for idx, R in enumerate(radii):
        points = slice_solve(sys, R, config)
        dirs = [(x - a) / np.linalg.norm(x - a) for x in points]
        bound = float(np.linalg.norm(a)) + R + 1.0

        matched_old = set()
        matched_new = set()
        if open_branches and points:
            dist = np.array([[float(np.linalg.norm(d_old - d_new)) for d_new in dirs]
                             for (_, d_old) in open_branches])
            while True:
                k = np.unravel_index(np.argmin(dist), dist.shape)
                if dist[k] > config.match_tol:
                    break
                i_old, j_new = int(k[0]), int(k[1])
                matched_old.add(i_old)
                matched_new.add(j_new)
                trace = open_branches[i_old][0]
                trace.samples.append(_make_sample(sys, compiled, points[j_new], R, bound))
                open_branches[i_old] = (trace, dirs[j_new])
                dist[i_old, :] = np.inf
                dist[:, j_new] = np.inf
                if np.all(np.isinf(dist)):
                    break

        # close unmatched branches: lost before the final radius
        still_open = []
        for i_old, (trace, d_old) in enumerate(open_branches):
            if i_old in matched_old:
                still_open.append((trace, d_old))
            else:
                trace.status = STATUS_LOST
        open_branches = still_open

        # open new branches for unmatched points
        for j_new, x in enumerate(points):
            if j_new in matched_new:
                continue
            trace = BranchTrace(branch_id=next_id)
            next_id += 1
            trace.samples.append(_make_sample(sys, compiled, x, R, bound))
            branches.append(trace)
            open_branches.append((trace, dirs[j_new]))

    return branches


def _make_sample(sys: MilnorSystem, compiled, x: np.ndarray, R: float, bound: float) -> Sample:
    f = sys.source[0]
    fx = float(f.evaluate([float(v) for v in x]))
    mal = malgrange_quantity(list(sys.source), x)
    res = _scaled_residual(compiled, x, bound)
    return Sample(radius=R, point=tuple(float(v) for v in x), f_value=fx, malgrange=mal, residual=res)


# ---------------------------------------------------------------------------
# Limit estimation
# ---------------------------------------------------------------------------


def _classify(trace: BranchTrace, config: TraceConfig, final_radius: float, factor: float):
    """Set trace.status; return (t0, uncertainty) for convergent branches."""
    samples = trace.samples
    if len(samples) < 4 or samples[-1].radius < final_radius * 0.999:
        trace.status = STATUS_LOST
        return None
    fs = np.array([s.f_value for s in samples])
    half = samples[len(samples) // 2:]
    if len(half) < 3:
        half = samples[-3:]
    hf = np.array([s.f_value for s in half])
    hr = np.array([s.radius for s in half])

    absf = np.abs(fs)
    if absf[-1] > config.div_threshold and absf[-1] > absf[-2] > absf[-3]:
        trace.status = STATUS_DIVERGENT
        return None

    diffs = np.diff(hf)
    scale = max(1.0, float(absf[-1]))
    if np.max(np.abs(diffs)) <= 1e-13 * scale:
        trace.status = STATUS_CONVERGENT
        return float(hf[-1]), 1e-12 * scale

    ratios = []
    for d1, d2 in zip(diffs, diffs[1:]):
        if abs(d1) > 1e-300:
            r = d2 / d1
            if 0.0 < r < 0.999:
                ratios.append(r)
    if not ratios:
        if absf[-1] > config.div_threshold:
            trace.status = STATUS_DIVERGENT
        else:
            trace.status = STATUS_LOST
        return None
    r = float(np.median(ratios))
    alpha = -math.log(r) / math.log(factor)

    # least-squares fit of f ~ t0 + c R^(-alpha) with the decay rate fixed
    A = np.stack([np.ones_like(hr), hr ** (-alpha)], axis=1)
    coef, *_ = np.linalg.lstsq(A, hf, rcond=None)
    t0, c = float(coef[0]), float(coef[1])
    rms = float(np.sqrt(np.mean((A @ coef - hf) ** 2)))

    if alpha > config.alpha_min and abs(hf[-1] - t0) < config.conv_tol:
        trace.status = STATUS_CONVERGENT
        return t0, abs(hf[-1] - t0) + rms
    if absf[-1] > config.div_threshold:
        trace.status = STATUS_DIVERGENT
    else:
        trace.status = STATUS_LOST
    return None


def estimate_limits(traces: List[BranchTrace], config: Optional[TraceConfig] = None) -> Tuple[List[LimitValue], int]:
    """Classify branches and cluster the convergent limit estimates.

    Returns (limit value clusters, divergent branch count); statuses are set
    on the traces in place.
    """
    config = config or TraceConfig()
    if not traces:
        return [], 0
    final_radius = max(t.samples[-1].radius for t in traces if t.samples)
    factor = config.radius_factor
    estimates: List[Tuple[float, float, int]] = []
    divergent = 0
    for trace in traces:
        out = _classify(trace, config, final_radius, factor)
        if trace.status == STATUS_DIVERGENT:
            divergent += 1
        if out is not None:
            estimates.append((out[0], out[1], trace.branch_id))
    estimates.sort()
    clusters: List[LimitValue] = []
    for value, unc, bid in estimates:
        if clusters and abs(value - clusters[-1].value) <= config.cluster_tol:
            prev = clusters[-1]
            ids = prev.branch_ids + [bid]
            merged = float(np.mean([value] + [prev.value] * len(prev.branch_ids)))
            clusters[-1] = LimitValue(merged, max(prev.uncertainty, unc, abs(value - merged)), ids)
        else:
            clusters.append(LimitValue(value, unc, [bid]))
    return clusters, divergent


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _bound_cap(f: Polynomial) -> int:
    d = f.degree
    if d == float("-inf") or d < 2:
        return 0
    return int(d) ** (f.num_vars - 1) - 1


def s_a_estimate(f: Polynomial, center: Sequence, config: Optional[TraceConfig] = None) -> AnalysisReport:
    """Estimate the asymptotic nonregular values for one center."""
    config = config or TraceConfig()
    a = tuple(Fraction(c) for c in center)
    base = dict(
        center=a,
        certified=(f.num_vars == 2),
        seed=config.seed,
        radii=config.radii(),
        config=config.to_dict(),
    )
    if f.degree == float("-inf") or f.degree < 2:
        return AnalysisReport(
            status="trivial-degree",
            limit_values=[],
            divergent_count=0,
            bound_cap=0,
            bound_respected=True,
            malgrange_monitor={},
            note="degree < 2: no asymptotic nonregular values to estimate",
            **base,
        )
    try:
        traces = trace_branches(f, a, config)
    except DegenerateMilnorError as exc:
        return AnalysisReport(
            status="degenerate",
            limit_values=[],
            divergent_count=0,
            bound_cap=_bound_cap(f),
            bound_respected=True,
            malgrange_monitor={},
            note=str(exc),
            **base,
        )
    limit_values, divergent = estimate_limits(traces, config)
    monitor: Dict[int, bool] = {}
    for trace in traces:
        if trace.status != STATUS_CONVERGENT:
            continue
        first, last = trace.samples[0].malgrange, trace.samples[-1].malgrange
        monitor[trace.branch_id] = bool(first > 0.0 and last < 0.1 * first)
    cap = _bound_cap(f)
    return AnalysisReport(
        status="ok",
        limit_values=limit_values,
        divergent_count=divergent,
        bound_cap=cap,
        bound_respected=(len(limit_values) <= cap),
        malgrange_monitor=monitor,
        traces=traces,
        **base,
    )


def s_infinity_estimate(
    f: Polynomial,
    centers: Sequence[Sequence],
    config: Optional[TraceConfig] = None,
) -> SInfinityReport:
    """Intersect per-center limit-value estimates across several centers."""
    config = config or TraceConfig()
    if len(centers) < 2:
        raise ValueError("need at least 2 centers")
    reports = [s_a_estimate(f, c, config) for c in centers]
    usable = [r for r in reports if r.status == "ok"]
    note = ""
    if len(usable) < len(reports):
        note = f"{len(reports) - len(usable)} center(s) excluded from the intersection (degenerate or trivial)"
    intersection: List[LimitValue] = []
    if usable:
        for lv in usable[0].limit_values:
            hits = [lv]
            for other in usable[1:]:
                match = [o for o in other.limit_values if abs(o.value - lv.value) <= config.cluster_tol]
                if not match:
                    hits = None
                    break
                hits.append(min(match, key=lambda o: abs(o.value - lv.value)))
            if hits is not None:
                value = float(np.mean([h.value for h in hits]))
                unc = max(h.uncertainty for h in hits)
                ids = sorted({bid for h in hits for bid in h.branch_ids})
                intersection.append(LimitValue(value, unc, ids))
    return SInfinityReport(per_center=reports, intersection=intersection,
                           cluster_tol=config.cluster_tol, note=note)
