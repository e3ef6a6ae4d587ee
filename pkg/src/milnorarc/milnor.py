"""Milnor set equations, the Rabier distance-to-singularity and center selection.

For a single polynomial f and a center a, the Milnor set is the locus where
grad f is parallel to x - a.  In the pivot chart (valid where one chosen
partial derivative does not vanish) it is cut out by the n-1 equations

    m_j = (df/dx_i) * (x_j - a_j) - (df/dx_j) * (x_i - a_i),   j != i.

For maps with several components the general description uses the maximal
minors of the Jacobian of (f, rho_a).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .poly import Polynomial, Rational

PIVOT_MINORS = "minors"


class DegenerateCenterError(RuntimeError):
    """No candidate center passed the genericity screen."""

    def __init__(self, message: str, diagnostics: List[str]):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class MilnorSystem:
    """Defining equations of the Milnor set for a chosen center.

    `pivot` is the 0-based pivot variable index in single-polynomial mode, or
    the string "minors" for the general maximal-minor description.
    """

    source: Tuple[Polynomial, ...]
    center: Tuple[Fraction, ...]
    pivot: Union[int, str]
    equations: Tuple[Polynomial, ...]

    @property
    def num_vars(self) -> int:
        return self.source[0].num_vars

    def has_zero_equation(self) -> bool:
        return any(eq.is_zero() for eq in self.equations)

    def to_dict(self, var_names: Optional[Sequence[str]] = None) -> dict:
        return {
            "center": [str(c) for c in self.center],
            "pivot": self.pivot if isinstance(self.pivot, str) else int(self.pivot),
            "equations": [eq.to_text(var_names) for eq in self.equations],
            "num_vars": self.num_vars,
        }


def default_pivot(f: Polynomial) -> int:
    """Pivot variable: the one whose partial derivative has maximal degree.

    Ties break to the lowest index.  The tracer re-validates points where the
    pivot partial vanishes against the minors description.
    """
    degrees = []
    for i in range(f.num_vars):
        d = f.partial(i).degree
        degrees.append(d if d != float("-inf") else -1)
    return int(max(range(f.num_vars), key=lambda i: (degrees[i], -i)))


def _shift_terms(num_vars: int, index: int, a_i: Fraction) -> Polynomial:
    # x_index - a_index
    return Polynomial.variable(num_vars, index) - Polynomial.constant(num_vars, a_i)


def _det(matrix: List[List[Polynomial]]) -> Polynomial:
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    nv = matrix[0][0].num_vars
    total = Polynomial.zero(nv)
    for col in range(n):
        entry = matrix[0][col]
        if entry.is_zero():
            continue
        minor = [[row[c] for c in range(n) if c != col] for row in matrix[1:]]
        term = entry * _det(minor)
        total = total + term if col % 2 == 0 else total - term
    return total


def milnor_equations(
    source: Sequence[Polynomial],
    center: Sequence[Rational],
    pivot: Union[int, str, None] = None,
) -> MilnorSystem:
    """Build the Milnor system for the given center.

    With `pivot` an integer (0-based, requires a single polynomial) the n-1
    pivot-chart equations m_j are produced.  With `pivot` None or "minors"
    all (p+1)x(p+1) minors of the stacked matrix [Df(x); x - a] are used.
    """
    fs = list(source)
    if not fs:
        raise ValueError("need at least one polynomial")
    n = fs[0].num_vars
    p = len(fs)
    if any(f.num_vars != n for f in fs):
        raise ValueError("all polynomials must share num_vars")
    if p >= n:
        raise ValueError(f"need p < n, got p={p}, n={n}")
    a = tuple(Fraction(c) for c in center)
    if len(a) != n:
        raise ValueError(f"center has length {len(a)}, expected {n}")

    if pivot is None or pivot == PIVOT_MINORS:
        rows = [f.gradient() for f in fs]
        rows.append([_shift_terms(n, j, a[j]) for j in range(n)])
        equations = []
        for cols in itertools.combinations(range(n), p + 1):
            minor = [[row[c] for c in cols] for row in rows]
            equations.append(_det(minor))
        return MilnorSystem(tuple(fs), a, PIVOT_MINORS, tuple(equations))

    i = int(pivot)
    if p != 1:
        raise ValueError("pivot mode requires a single polynomial")
    if not 0 <= i < n:
        raise IndexError(f"pivot index {i} out of range for {n} variables")
    f = fs[0]
    f_i = f.partial(i)
    x_i = _shift_terms(n, i, a[i])
    equations = []
    for j in range(n):
        if j == i:
            continue
        m_j = f_i * _shift_terms(n, j, a[j]) - f.partial(j) * x_i
        equations.append(m_j)
    return MilnorSystem(tuple(fs), a, i, tuple(equations))


def rabier_nu(J) -> float:
    """Smallest singular value of the Jacobian matrix J (p x n, p <= n).

    Computed from the eigenvalues of J J^T; for p = 1 this is the Euclidean
    norm of the single row.
    """
    J = np.atleast_2d(np.asarray(J, dtype=float))
    if not np.all(np.isfinite(J)):
        raise ValueError("non-finite entries in Jacobian")
    p, n = J.shape
    if p > n:
        raise ValueError(f"need p <= n, got shape {J.shape}")
    if p == 1:
        return float(np.linalg.norm(J[0]))
    w = np.linalg.eigvalsh(J @ J.T)
    return float(np.sqrt(max(w[0], 0.0)))


def jacobian_at(source: Sequence[Polynomial], x: Sequence[float]) -> np.ndarray:
    """Float Jacobian matrix of the map at x (rows are gradients)."""
    fs = [source] if isinstance(source, Polynomial) else list(source)
    point = [float(v) for v in x]
    return np.array([[float(f.partial(i).evaluate(point)) for i in range(f.num_vars)] for f in fs])


def malgrange_quantity(source, x: Sequence[float]) -> float:
    """The product ||x|| * nu(Df(x)) monitored along branches at infinity."""
    point = np.asarray([float(v) for v in x], dtype=float)
    if not np.all(np.isfinite(point)):
        raise ValueError("non-finite point")
    J = jacobian_at(source, point)
    return float(np.linalg.norm(point)) * rabier_nu(J)


def _screen_center(f: Polynomial, a: Tuple[Fraction, ...], radii=(10.0, 40.0)) -> Tuple[bool, str]:
    """Heuristic genericity screen: sampled Milnor points must have a rank
    n-1 Jacobian of the pivot-chart equations.  Not a certificate."""
    from . import tracer  # local import; tracer depends on this module

    i = default_pivot(f)
    sys = milnor_equations([f], a, pivot=i)
    if sys.has_zero_equation():
        return False, "identically zero pivot-chart equation"
    n = f.num_vars
    grad = f.gradient()
    cfg = tracer.TraceConfig(seed=0, grid=1024, starts=64)
    for R in radii:
        try:
            points = tracer.slice_solve(sys, R, cfg)
        except Exception as exc:  # solver trouble counts as screen failure
            return False, f"slice solve failed at R={R}: {exc}"
        for x in points[:16]:
            gnorm = float(np.linalg.norm([float(g.evaluate(list(x))) for g in grad]))
            if gnorm < 1e-9 * (1.0 + R):
                continue  # near Sing f, excluded from the screen
            Jm = np.array(
                [[float(eq.partial(k).evaluate(list(x))) for k in range(n)] for eq in sys.equations]
            )
            sv = np.linalg.svd(Jm, compute_uv=False)
            if sv[-1] < 1e-8 * (sv[0] + 1.0):
                return False, f"rank-deficient Milnor Jacobian at R={R}"
    return True, "ok"


def pick_generic_center(
    f: Polynomial,
    seed: int,
    retries: int = 16,
) -> Tuple[Fraction, ...]:
    """Draw a small-height rational center passing the genericity screen.

    Deterministic in `seed`.  Entries have numerator in [-100, 100] and
    denominator in [1, 100].  Raises DegenerateCenterError if every retry
    fails; the caller may then supply a center manually.
    """
    if f.num_vars < 2:
        raise ValueError("need at least two variables")
    rng = random.Random(seed)
    diagnostics = []
    for attempt in range(retries):
        a = tuple(Fraction(rng.randint(-100, 100), rng.randint(1, 100)) for _ in range(f.num_vars))
        ok, reason = _screen_center(f, a)
        if ok:
            return a
        diagnostics.append(f"attempt {attempt}: a={tuple(str(c) for c in a)}: {reason}")
    raise DegenerateCenterError(
        f"no generic center found in {retries} attempts (seed {seed})", diagnostics
    )
