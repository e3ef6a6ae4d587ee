"""Exact sparse multivariate polynomials over Q, Laurent scalars and rational arcs.

A polynomial is a finite map from exponent tuples to nonzero Fraction
coefficients; the zero polynomial is the empty map.  All arithmetic in this
module is exact: no floats enter unless the caller evaluates at a float point.

Terms are ordered by graded lexicographic order on the exponent tuple (total
degree first, then the tuple itself), which fixes printing and iteration
order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

Exponent = Tuple[int, ...]
Rational = Union[int, Fraction]

#: Degree of the zero polynomial.
NEG_INFINITY = float("-inf")


class ParseError(ValueError):
    """Raised on malformed polynomial text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _grlex_key(exp: Exponent) -> Tuple[int, Exponent]:
    return (sum(exp), exp)


class Polynomial:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms: Optional[Mapping[Exponent, Rational]] = None):
        if num_vars < 1:
            raise ValueError("num_vars must be positive")
        clean: Dict[Exponent, Fraction] = {}
        if terms:
            for exp, coeff in terms.items():
                exp = tuple(exp)
                if len(exp) != num_vars:
                    raise ValueError(f"exponent {exp} has length {len(exp)}, expected {num_vars}")
                if any(e < 0 for e in exp):
                    raise ValueError(f"negative exponent in {exp}")
                c = Fraction(coeff)
                if c != 0:
                    clean[exp] = c
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):  # immutable after construction
        raise AttributeError("Polynomial is immutable")

    # ----- constructors -------------------------------------------------

    @classmethod
    def zero(cls, num_vars: int) -> "Polynomial":
        return cls(num_vars)

    @classmethod
    def constant(cls, num_vars: int, value: Rational) -> "Polynomial":
        return cls(num_vars, {(0,) * num_vars: Fraction(value)})

    @classmethod
    def variable(cls, num_vars: int, index: int) -> "Polynomial":
        if not 0 <= index < num_vars:
            raise IndexError(f"variable index {index} out of range for {num_vars} variables")
        exp = [0] * num_vars
        exp[index] = 1
        return cls(num_vars, {tuple(exp): Fraction(1)})

    # ----- basic queries ------------------------------------------------

    @property
    def degree(self) -> Union[int, float]:
        """Total degree; NEG_INFINITY for the zero polynomial."""
        if not self.terms:
            return NEG_INFINITY
        return max(sum(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self) -> List[Tuple[Exponent, Fraction]]:
        """Terms in ascending graded lexicographic order."""
        return [(e, self.terms[e]) for e in sorted(self.terms, key=_grlex_key)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    __hash__ = None

    def __repr__(self) -> str:
        return f"Polynomial({self.num_vars}, {self.to_text()!r})"

    # ----- arithmetic ---------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.num_vars != self.num_vars:
                raise ValueError("num_vars mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.num_vars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for exp, c in other.terms.items():
            out[exp] = out.get(exp, Fraction(0)) + c
        return Polynomial(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return Polynomial(self.num_vars, {e: c * v for e, v in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: Dict[Exponent, Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                exp = tuple(x + y for x, y in zip(ea, eb))
                out[exp] = out.get(exp, Fraction(0)) + ca * cb
        return Polynomial(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial.constant(self.num_vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # ----- calculus and evaluation -------------------------------------

    def partial(self, index: int) -> "Polynomial":
        """Exact partial derivative with respect to variable `index` (0-based)."""
        if not 0 <= index < self.num_vars:
            raise IndexError(f"variable index {index} out of range")
        out: Dict[Exponent, Fraction] = {}
        for exp, c in self.terms.items():
            e = exp[index]
            if e == 0:
                continue
            new = list(exp)
            new[index] = e - 1
            out[tuple(new)] = c * e
        return Polynomial(self.num_vars, out)

    def gradient(self) -> List["Polynomial"]:
        return [self.partial(i) for i in range(self.num_vars)]

    def evaluate(self, point: Sequence) -> Union[Fraction, float]:
        """Evaluate at a point; exact when all entries are int/Fraction.

        Uses Horner's scheme variable by variable in the fixed variable order,
        so float results are bit-for-bit reproducible.
        """
        if len(point) != self.num_vars:
            raise ValueError(f"point has length {len(point)}, expected {self.num_vars}")
        exact = all(isinstance(v, (int, Fraction)) for v in point)
        if exact:
            values = [Fraction(v) for v in point]
        else:
            values = [float(v) for v in point]
        result = self.evaluate_in(values)
        if isinstance(result, (int, Fraction)):
            return Fraction(result) if exact else float(result)
        return result

    def evaluate_in(self, values: Sequence):
        """Evaluate with arbitrary ring elements substituted for the variables.

        The elements must support addition, multiplication (including by
        Fraction scalars) and nonnegative integer powers.  Used for exact
        composition with Laurent arcs and polynomial substitution.
        """
        if len(values) != self.num_vars:
            raise ValueError("wrong number of substitution values")
        if not self.terms:
            return Fraction(0)
        items = list(self.terms.items())
        return _horner(items, 0, values, self.num_vars)

    def substitute(self, replacements: Sequence["Polynomial"]) -> "Polynomial":
        """Compose with polynomial arguments: f(g_1, ..., g_n)."""
        if not replacements:
            raise ValueError("need at least one replacement")
        nv = replacements[0].num_vars
        result = self.evaluate_in(list(replacements))
        if isinstance(result, (int, Fraction)):
            return Polynomial.constant(nv, result)
        return result

    # ----- printing -----------------------------------------------------

    def to_text(self, var_names: Optional[Sequence[str]] = None) -> str:
        """Render in the input grammar, terms in ascending graded lex order."""
        if var_names is None:
            var_names = default_var_names(self.num_vars)
        if len(var_names) != self.num_vars:
            raise ValueError("wrong number of variable names")
        if not self.terms:
            return "0"
        pieces: List[str] = []
        for exp, coeff in self.sorted_terms():
            factors = []
            for name, e in zip(var_names, exp):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(coeff)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            if not pieces:
                pieces.append(body if coeff > 0 else f"-{body}")
            else:
                pieces.append(f"{'+' if coeff > 0 else '-'} {body}")
        return " ".join(pieces)

    def __str__(self) -> str:
        return self.to_text()


def default_var_names(num_vars: int) -> List[str]:
    if num_vars <= 3:
        return ["x", "y", "z"][:num_vars]
    return [f"x{i + 1}" for i in range(num_vars)]


def _horner(items, var: int, values, num_vars: int):
    """Generic Horner evaluation over exponent-tuple term lists."""
    if var == num_vars:
        total = Fraction(0)
        for _, c in items:
            total += c
        return total
    groups: Dict[int, list] = {}
    for exp, c in items:
        groups.setdefault(exp[var], []).append((exp, c))
    exps = sorted(groups, reverse=True)
    x = values[var]
    acc = None
    prev = 0
    for e in exps:
        sub = _horner(groups[e], var + 1, values, num_vars)
        if acc is None:
            acc = sub
        else:
            acc = acc * (x ** (prev - e)) + sub
        prev = e
    if prev:
        acc = acc * (x ** prev)
    return acc


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_WHITESPACE = " \t\r\n"
_OPS = "+-*/^()"


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _WHITESPACE:
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("NUM", text[i:j], i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("NAME", text[i:j], i))
            i = j
        elif ch in _OPS:
            tokens.append(("OP", ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("END", "", n))
    return tokens


class _Parser:
    """Recursive-descent parser for the polynomial grammar.

    expr   := ('+'|'-')? term (('+'|'-') term)*
    term   := factor ('*' factor)*           (implicit '*' after a number)
    factor := rational | var | '(' expr ')' | factor '^' uint
    """

    def __init__(self, text: str, var_names: Sequence[str]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.var_index = {name: i for i, name in enumerate(var_names)}
        self.num_vars = len(var_names)
        if self.num_vars == 0:
            raise ValueError("var_names must be non-empty")

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> Polynomial:
        poly = self.parse_expr()
        kind, value, pos = self.peek()
        if kind != "END":
            raise ParseError(f"unexpected token {value!r}", pos)
        return poly

    def parse_expr(self) -> Polynomial:
        sign = 1
        kind, value, _ = self.peek()
        if kind == "OP" and value in "+-":
            self.next()
            sign = -1 if value == "-" else 1
        poly = self.parse_term() * sign
        while True:
            kind, value, _ = self.peek()
            if kind == "OP" and value in "+-":
                self.next()
                term = self.parse_term()
                poly = poly + term if value == "+" else poly - term
            else:
                break
        return poly

    def parse_term(self) -> Polynomial:
        poly, was_number = self.parse_factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "OP" and value == "*":
                self.next()
                nxt, was_number = self.parse_factor()
                poly = poly * nxt
            elif was_number and kind == "NAME":
                # implicit multiplication between a number and a variable
                nxt, was_number = self.parse_factor()
                poly = poly * nxt
            else:
                break
        return poly

    def parse_factor(self) -> Tuple[Polynomial, bool]:
        kind, value, pos = self.next()
        was_number = False
        if kind == "NUM":
            num = int(value)
            den = 1
            k2, v2, _ = self.peek()
            if k2 == "OP" and v2 == "/":
                self.next()
                k3, v3, p3 = self.next()
                if k3 != "NUM":
                    raise ParseError("expected denominator after '/'", p3)
                den = int(v3)
                if den == 0:
                    raise ParseError("zero denominator", p3)
            poly = Polynomial.constant(self.num_vars, Fraction(num, den))
            was_number = True
        elif kind == "NAME":
            if value not in self.var_index:
                raise ParseError(f"unknown variable {value!r}", pos)
            poly = Polynomial.variable(self.num_vars, self.var_index[value])
        elif kind == "OP" and value == "(":
            poly = self.parse_expr()
            k2, v2, p2 = self.next()
            if not (k2 == "OP" and v2 == ")"):
                raise ParseError("expected ')'", p2)
        else:
            raise ParseError(f"unexpected token {value!r}", pos)
        # postfix powers: factor '^' uint, possibly repeated
        while True:
            kind, value, _ = self.peek()
            if kind == "OP" and value == "^":
                self.next()
                k2, v2, p2 = self.next()
                if k2 != "NUM":
                    raise ParseError("exponent must be a nonnegative integer", p2)
                poly = poly ** int(v2)
                was_number = False
            else:
                break
        return poly, was_number


def parse(text: str, var_names: Sequence[str]) -> Polynomial:
    """Parse polynomial text over the given ordered variable names."""
    return _Parser(text, var_names).parse()


# ---------------------------------------------------------------------------
# Laurent scalars
# ---------------------------------------------------------------------------


class LaurentScalar:
    """Finite Laurent polynomial in one variable t with Fraction coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[int, Rational]] = None):
        clean: Dict[int, Fraction] = {}
        if terms:
            for k, c in terms.items():
                c = Fraction(c)
                if c != 0:
                    clean[int(k)] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("LaurentScalar is immutable")

    @classmethod
    def term(cls, coeff: Rational, power: int) -> "LaurentScalar":
        return cls({power: coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, power: int) -> Fraction:
        return self.terms.get(power, Fraction(0))

    def support(self) -> List[int]:
        return sorted(self.terms)

    @property
    def min_exp(self) -> Optional[int]:
        return min(self.terms) if self.terms else None

    @property
    def max_exp(self) -> Optional[int]:
        return max(self.terms) if self.terms else None

    def _coerce(self, other) -> Optional["LaurentScalar"]:
        if isinstance(other, LaurentScalar):
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentScalar({0: other})
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return LaurentScalar(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentScalar({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                return LaurentScalar()
            return LaurentScalar({k: c * v for k, v in self.terms.items()})
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out: Dict[int, Fraction] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                out[ka + kb] = out.get(ka + kb, Fraction(0)) + ca * cb
        return LaurentScalar(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a Laurent scalar")
        result = LaurentScalar({0: 1})
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self) -> "LaurentScalar":
        """d/dt of the Laurent polynomial."""
        return LaurentScalar({k - 1: k * c for k, c in self.terms.items() if k != 0})

    def evaluate(self, t: float) -> float:
        return float(sum(float(c) * float(t) ** k for k, c in sorted(self.terms.items())))

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            c = self.terms[k]
            if k == 0:
                parts.append(f"{c}")
            else:
                parts.append(f"{c}*t^{k}" if k != 1 else f"{c}*t")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"LaurentScalar({dict(sorted(self.terms.items()))})"


# ---------------------------------------------------------------------------
# Rational arcs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalArc:
    """Vector-valued Laurent polynomial xi(t) with a bounded exponent window.

    `coeffs` maps exponent k to the coefficient vector a_k; zero vectors are
    dropped at construction.  The declared window records the (k_min, k_max)
    range the arc is meant to live in; by default it is the support hull.
    """

    num_vars: int
    coeffs: Dict[int, Tuple[Fraction, ...]] = field(default_factory=dict)
    declared_window: Tuple[int, int] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("num_vars must be positive")
        clean: Dict[int, Tuple[Fraction, ...]] = {}
        for k, vec in self.coeffs.items():
            vec = tuple(Fraction(v) for v in vec)
            if len(vec) != self.num_vars:
                raise ValueError(f"coefficient vector at t^{k} has length {len(vec)}")
            if any(v != 0 for v in vec):
                clean[int(k)] = vec
        object.__setattr__(self, "coeffs", clean)
        window = self.declared_window
        if window is None:
            if clean:
                window = (min(clean), max(clean))
            else:
                window = (0, 0)
        window = (int(window[0]), int(window[1]))
        for k in clean:
            if not window[0] <= k <= window[1]:
                raise ValueError(f"exponent {k} outside declared window {window}")
        object.__setattr__(self, "declared_window", window)

    def component(self, index: int) -> LaurentScalar:
        """The scalar Laurent polynomial xi_index(t)."""
        if not 0 <= index < self.num_vars:
            raise IndexError("component index out of range")
        return LaurentScalar({k: vec[index] for k, vec in self.coeffs.items() if vec[index] != 0})

    def components(self) -> List[LaurentScalar]:
        return [self.component(i) for i in range(self.num_vars)]

    def support(self) -> List[int]:
        return sorted(self.coeffs)

    def escapes_to_infinity(self) -> bool:
        """True iff some coefficient vector with positive exponent is nonzero."""
        return any(k > 0 for k in self.coeffs)

    def reparametrize(self, lam: Rational) -> "RationalArc":
        """The arc t -> xi(lam * t); coefficients scale by lam^k."""
        lam = Fraction(lam)
        if lam == 0:
            raise ValueError("reparametrization scale must be nonzero")
        out = {k: tuple(v * lam ** k for v in vec) for k, vec in self.coeffs.items()}
        return RationalArc(self.num_vars, out, self.declared_window)

    def evaluate(self, t: float) -> List[float]:
        return [c.evaluate(t) for c in self.components()]


def compose_arc(f: Polynomial, xi: RationalArc) -> LaurentScalar:
    """Exact Laurent expansion of f(xi(t))."""
    if f.num_vars != xi.num_vars:
        raise ValueError(f"polynomial has {f.num_vars} variables, arc has {xi.num_vars}")
    result = f.evaluate_in(xi.components())
    if isinstance(result, (int, Fraction)):
        return LaurentScalar({0: result})
    return result
