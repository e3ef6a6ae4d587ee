"""The bounded arc space, asymptotic membership conditions and arc search.

An arc xi(t) = sum a_k t^k with exponents in the window
[-(d-1)*d^(n-1), d^(n-1)] is an asymptotic arc for f when, after rescaling
the parameter so the positive-exponent coefficients lie on the unit sphere,

  (b) f(xi(t)) has no positive power of t (its constant term is the limit b0),
  (c) every partial derivative of f composed with xi has only negative powers,
  (d) every product x_j * df/dx_i composed with xi has only negative powers.

These are vanishing conditions on finitely many Laurent coefficients and are
decided exactly over Q.  The sphere normalization itself generally requires
an irrational scale, so the membership check works on the un-normalized arc
(the vanishing conditions are scale invariant) and reports the scale as a
float.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .poly import LaurentScalar, Polynomial, RationalArc, compose_arc


class WindowViolationError(ValueError):
    """An arc exponent lies outside the admissible window."""

    def __init__(self, exponent: int, window: "ArcWindow"):
        super().__init__(
            f"arc exponent {exponent} outside window ({window.k_min}, {window.k_max})"
        )
        self.exponent = exponent
        self.window = window


@dataclass(frozen=True)
class ArcWindow:
    """Admissible exponent range for arcs attached to degree-d maps of n variables."""

    n: int
    d: int
    k_min: int
    k_max: int


def arc_window(n: int, d: int) -> ArcWindow:
    """Exponent window [-(d-1)*d^(n-1), d^(n-1)]."""
    if n < 2 or d < 2:
        raise ValueError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
    top = d ** (n - 1)
    return ArcWindow(n=n, d=d, k_min=-(d - 1) * top, k_max=top)


def dims(n: int, d: int) -> Tuple[int, int]:
    """Coefficient-space dimensions: the bounded arc space versus the larger
    arc variety it replaces; both exact integers."""
    if n < 2 or d < 2:
        raise ValueError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
    dim_arc = n * (1 + d ** n)
    dim_av = n * (2 + d * (d + 1) ** n * (d ** n + 2) ** (n - 1))
    return dim_arc, dim_av


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------


@dataclass
class ArcMembershipReport:
    normalized: bool
    escapes: bool
    cond_b: bool
    cond_c: bool
    cond_d: bool
    witnesses_b: List[Tuple[int, Fraction]]
    witnesses_c: List[Tuple[int, Fraction]]
    witnesses_d: List[Tuple[int, Fraction]]
    b0: Optional[Fraction]
    lambda_estimate: Optional[float]

    @property
    def is_member(self) -> bool:
        return self.escapes and self.cond_b and self.cond_c and self.cond_d

    def to_dict(self) -> dict:
        return {
            "normalized": self.normalized,
            "escapes": self.escapes,
            "cond_b": self.cond_b,
            "cond_c": self.cond_c,
            "cond_d": self.cond_d,
            "witnesses_b": [[k, str(c)] for k, c in self.witnesses_b],
            "witnesses_c": [[k, str(c)] for k, c in self.witnesses_c],
            "witnesses_d": [[k, str(c)] for k, c in self.witnesses_d],
            "b0": None if self.b0 is None else str(self.b0),
            "b0_float": None if self.b0 is None else float(self.b0),
            "lambda_estimate": self.lambda_estimate,
            "is_member": self.is_member,
        }


def _positive_sphere_sum(xi: RationalArc) -> Fraction:
    total = Fraction(0)
    for k, vec in xi.coeffs.items():
        if k > 0:
            total += sum(v * v for v in vec)
    return total


def _lambda_estimate(xi: RationalArc) -> Optional[float]:
    """Scale lam > 0 with sum_{k>0} |a_k|^2 lam^(2k) = 1; None if no escape."""
    powers = {}
    for k, vec in xi.coeffs.items():
        if k > 0:
            powers[k] = powers.get(k, 0.0) + float(sum(v * v for v in vec))
    if not powers:
        return None

    def g(lam: float) -> float:
        return sum(s * lam ** (2 * k) for k, s in powers.items())

    hi = 1.0
    while g(hi) < 1.0:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_membership(f: Polynomial, xi: RationalArc, enforce_window: bool = True) -> ArcMembershipReport:
    """Exact membership report for the asymptotic conditions (b)-(d)."""
    if f.num_vars != xi.num_vars:
        raise ValueError("num_vars mismatch between polynomial and arc")
    d = f.degree
    if d == float("-inf") or d < 2:
        raise ValueError("polynomial degree must be at least 2")
    window = arc_window(f.num_vars, int(d))
    if enforce_window:
        for k in xi.support():
            if not window.k_min <= k <= window.k_max:
                raise WindowViolationError(k, window)

    F = compose_arc(f, xi)
    witnesses_b = [(k, F.coefficient(k)) for k in F.support() if k >= 1]
    cond_b = not witnesses_b
    b0 = F.coefficient(0) if cond_b else None

    witnesses_c: List[Tuple[int, Fraction]] = []
    witnesses_d: List[Tuple[int, Fraction]] = []
    components = xi.components()
    for i in range(f.num_vars):
        g = compose_arc(f.partial(i), xi)
        witnesses_c.extend((k, g.coefficient(k)) for k in g.support() if k >= 0)
        for j in range(f.num_vars):
            h = components[j] * g
            witnesses_d.extend((k, h.coefficient(k)) for k in h.support() if k >= 0)

    return ArcMembershipReport(
        normalized=(_positive_sphere_sum(xi) == 1),
        escapes=xi.escapes_to_infinity(),
        cond_b=cond_b,
        cond_c=not witnesses_c,
        cond_d=not witnesses_d,
        witnesses_b=witnesses_b,
        witnesses_c=sorted(set(witnesses_c)),
        witnesses_d=sorted(set(witnesses_d)),
        b0=b0,
        lambda_estimate=_lambda_estimate(xi),
    )


def truncate(xi: RationalArc, window: ArcWindow) -> RationalArc:
    """Drop coefficients below the window's left bound; keep everything else."""
    coeffs = {k: vec for k, vec in xi.coeffs.items() if k >= window.k_min}
    hi = max([window.k_max] + list(coeffs)) if coeffs else window.k_max
    return RationalArc(xi.num_vars, coeffs, (window.k_min, hi))


# ---------------------------------------------------------------------------
# Symbolic coefficient constraints
# ---------------------------------------------------------------------------


class _LaurentOverRing:
    """Laurent polynomial in t whose coefficients are Polynomials in the
    unknown arc coefficients.  Internal helper for emit_constraints."""

    __slots__ = ("terms", "num_unknowns")

    def __init__(self, num_unknowns: int, terms: Optional[Dict[int, Polynomial]] = None):
        self.num_unknowns = num_unknowns
        clean: Dict[int, Polynomial] = {}
        if terms:
            for k, p in terms.items():
                if not p.is_zero():
                    clean[int(k)] = p
        self.terms = clean

    def coefficient(self, k: int) -> Polynomial:
        return self.terms.get(k, Polynomial.zero(self.num_unknowns))

    def support(self) -> List[int]:
        return sorted(self.terms)

    def _coerce(self, other):
        if isinstance(other, _LaurentOverRing):
            return other
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return _LaurentOverRing(self.num_unknowns)
            return _LaurentOverRing(
                self.num_unknowns, {0: Polynomial.constant(self.num_unknowns, other)}
            )
        if isinstance(other, Polynomial):
            return _LaurentOverRing(self.num_unknowns, {0: other})
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for k, p in other.terms.items():
            out[k] = out[k] + p if k in out else p
        return _LaurentOverRing(self.num_unknowns, out)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return _LaurentOverRing(self.num_unknowns, {k: p * other for k, p in self.terms.items()})
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out: Dict[int, Polynomial] = {}
        for ka, pa in self.terms.items():
            for kb, pb in other.terms.items():
                prod = pa * pb
                key = ka + kb
                out[key] = out[key] + prod if key in out else prod
        return _LaurentOverRing(self.num_unknowns, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = self._coerce(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result


def unknown_name(k: int, j: int) -> str:
    """Coefficient symbol for exponent k, component j (1-based); negative
    exponents spell their absolute value with an m prefix."""
    tag = f"m{-k}" if k < 0 else str(k)
    return f"a_{tag}_{j}"


@dataclass
class ConstraintSystem:
    """Vanishing equations on the unknown arc coefficients, plus the sphere."""

    num_vars: int
    window: ArcWindow
    unknowns: List[str]
    equations: List[Tuple[str, Polynomial]]   # (label, polynomial in the unknowns)
    sphere: Polynomial

    @property
    def num_unknowns(self) -> int:
        return len(self.unknowns)

    @property
    def num_equations(self) -> int:
        return len(self.equations)

    def export_text(self) -> str:
        """One equation per line in the polynomial grammar; sphere last."""
        lines = [poly.to_text(self.unknowns) for _, poly in self.equations]
        lines.append(self.sphere.to_text(self.unknowns))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "num_unknowns": self.num_unknowns,
            "num_equations": self.num_equations,
            "window": [self.window.k_min, self.window.k_max],
            "unknowns": list(self.unknowns),
            "equations": [
                {"label": label, "poly": poly.to_text(self.unknowns)}
                for label, poly in self.equations
            ],
            "sphere": self.sphere.to_text(self.unknowns),
        }


def _generic_arc(n: int, window: ArcWindow) -> Tuple[List[str], List[_LaurentOverRing], Dict[Tuple[int, int], int]]:
    names: List[str] = []
    index: Dict[Tuple[int, int], int] = {}
    for k in range(window.k_min, window.k_max + 1):
        for j in range(n):
            index[(k, j)] = len(names)
            names.append(unknown_name(k, j + 1))
    N = len(names)
    comps = []
    for j in range(n):
        terms = {
            k: Polynomial.variable(N, index[(k, j)])
            for k in range(window.k_min, window.k_max + 1)
        }
        comps.append(_LaurentOverRing(N, terms))
    return names, comps, index


def emit_constraints(f: Polynomial) -> ConstraintSystem:
    """Symbolic composition of f and its derivative products with a
    generic-coefficient arc; one equation per forbidden power of t."""
    d = f.degree
    if d == float("-inf") or d < 2:
        raise ValueError("polynomial degree must be at least 2")
    n = f.num_vars
    window = arc_window(n, int(d))
    names, comps, index = _generic_arc(n, window)
    N = len(names)

    equations: List[Tuple[str, Polynomial]] = []

    Fc = f.evaluate_in(comps)
    if isinstance(Fc, (int, Fraction)):
        Fc = _LaurentOverRing(N)._coerce(Fc)
    for m in Fc.support():
        if m >= 1:
            equations.append((f"b:t^{m}", Fc.coefficient(m)))

    for i in range(n):
        g = f.partial(i).evaluate_in(comps)
        if isinstance(g, (int, Fraction)):
            g = _LaurentOverRing(N)._coerce(g)
        for m in g.support():
            if m >= 0:
                equations.append((f"c:{i + 1}:t^{m}", g.coefficient(m)))
        for j in range(n):
            h = comps[j] * g
            for m in h.support():
                if m >= 0:
                    equations.append((f"d:{i + 1},{j + 1}:t^{m}", h.coefficient(m)))

    sphere = Polynomial.constant(N, -1)
    for k in range(1, window.k_max + 1):
        for j in range(n):
            v = Polynomial.variable(N, index[(k, j)])
            sphere = sphere + v * v

    return ConstraintSystem(
        num_vars=n, window=window, unknowns=names, equations=equations, sphere=sphere
    )


# ---------------------------------------------------------------------------
# Numerical arc search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArcSearchConfig:
    seed: int = 0
    starts: int = 32
    tol: float = 1e-8        # acceptance threshold on the sum of squared violations
    max_nfev: int = 400
    dedupe_dist: float = 1e-6

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "starts": self.starts,
            "tol": self.tol,
            "max_nfev": self.max_nfev,
            "dedupe_dist": self.dedupe_dist,
        }


@dataclass
class ArcCandidate:
    coeffs: Dict[int, Tuple[float, ...]]
    b0_estimate: float
    residual: float
    start_index: int

    def to_dict(self) -> dict:
        return {
            "coeffs": {str(k): list(v) for k, v in sorted(self.coeffs.items())},
            "b0_estimate": self.b0_estimate,
            "residual": self.residual,
            "start_index": self.start_index,
        }


class _CompiledResiduals:
    """All constraint equations flattened to term arrays for fast evaluation."""

    def __init__(self, polys: Sequence[Polynomial], num_unknowns: int):
        exps, coeffs, eq_idx = [], [], []
        for e, poly in enumerate(polys):
            for exp, c in poly.sorted_terms():
                exps.append(exp)
                coeffs.append(float(c))
                eq_idx.append(e)
            if poly.is_zero():
                pass
        self.num_eqs = len(polys)
        self.N = num_unknowns
        self.E = np.array(exps, dtype=np.int64) if exps else np.zeros((0, num_unknowns), np.int64)
        self.c = np.array(coeffs, dtype=float)
        self.eq_idx = np.array(eq_idx, dtype=np.int64)
        # gradient terms: one row per (term, variable with positive exponent)
        g_exps, g_coeffs, g_eq, g_var = [], [], [], []
        for t in range(self.E.shape[0]):
            for v in range(num_unknowns):
                e = self.E[t, v]
                if e > 0:
                    row = self.E[t].copy()
                    row[v] -= 1
                    g_exps.append(row)
                    g_coeffs.append(self.c[t] * e)
                    g_eq.append(self.eq_idx[t])
                    g_var.append(v)
        self.GE = np.array(g_exps, dtype=np.int64) if g_exps else np.zeros((0, num_unknowns), np.int64)
        self.Gc = np.array(g_coeffs, dtype=float)
        self.Geq = np.array(g_eq, dtype=np.int64)
        self.Gvar = np.array(g_var, dtype=np.int64)

    def fun(self, u: np.ndarray) -> np.ndarray:
        F = np.zeros(self.num_eqs)
        if self.c.size:
            tv = np.prod(u[None, :] ** self.E, axis=1) * self.c
            np.add.at(F, self.eq_idx, tv)
        return F

    def jac(self, u: np.ndarray) -> np.ndarray:
        J = np.zeros((self.num_eqs, self.N))
        if self.Gc.size:
            tv = np.prod(u[None, :] ** self.GE, axis=1) * self.Gc
            np.add.at(J, (self.Geq, self.Gvar), tv)
        return J


def search_arcs(f: Polynomial, config: Optional[ArcSearchConfig] = None) -> List[ArcCandidate]:
    """Multistart least-squares minimization of the constraint violations.

    Approximate and deliberately incomplete: finding a candidate proves
    nothing about exhausting the asymptotic arc set, and an empty result does
    not certify emptiness.  Deterministic given the seed.
    """
    from scipy.optimize import least_squares

    config = config or ArcSearchConfig()
    cs = emit_constraints(f)
    N = cs.num_unknowns
    window = cs.window
    polys = [poly for _, poly in cs.equations] + [cs.sphere]
    compiled = _CompiledResiduals(polys, N)

    # constant coefficient of f(xi(t)) as a polynomial in the unknowns
    names, comps, index = _generic_arc(f.num_vars, window)
    Fc = f.evaluate_in(comps)
    if isinstance(Fc, (int, Fraction)):
        b0_poly = Polynomial.constant(N, Fc)
    else:
        b0_poly = Fc.coefficient(0)
    b0_compiled = _CompiledResiduals([b0_poly], N)

    rng = np.random.default_rng(config.seed)
    starts = rng.standard_normal((config.starts, N)) * 0.5
    # normalize the positive-exponent block toward the sphere for a sane start
    pos_idx = [index[(k, j)] for k in range(1, window.k_max + 1) for j in range(f.num_vars)]
    pos_idx = np.array(pos_idx, dtype=np.int64)
    for s in starts:
        norm = np.linalg.norm(s[pos_idx])
        if norm > 1e-9:
            s[pos_idx] /= norm

    candidates: List[ArcCandidate] = []
    kept_points: List[np.ndarray] = []
    for si in range(config.starts):
        res = least_squares(
            compiled.fun,
            starts[si],
            jac=compiled.jac,
            method="trf",
            max_nfev=config.max_nfev,
            xtol=1e-14,
            ftol=1e-14,
            gtol=1e-14,
        )
        u = res.x
        residual = float(np.sum(compiled.fun(u) ** 2))
        if residual >= config.tol:
            continue
        if any(np.linalg.norm(u - p) < config.dedupe_dist for p in kept_points):
            continue
        kept_points.append(u)
        coeffs: Dict[int, Tuple[float, ...]] = {}
        for k in range(window.k_min, window.k_max + 1):
            vec = tuple(float(u[index[(k, j)]]) for j in range(f.num_vars))
            if any(abs(v) > 1e-12 for v in vec):
                coeffs[k] = vec
        b0_est = float(b0_compiled.fun(u)[0])
        candidates.append(ArcCandidate(coeffs=coeffs, b0_estimate=b0_est,
                                       residual=residual, start_index=si))
    return candidates
