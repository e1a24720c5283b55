"""Formal power series in coupling symbols with exact coefficients.

A series is a finite sum of monomials in symbols indexed by canonical graph
keys, truncated by total vertex count.  Coefficients live in a commutative
ring supplied by the caller: univariate polynomials in N here, bivariate
polynomials in N and t for the effective-action module.  No floating point
appears anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import permutations

from .graphs import (
    ColoredGraph,
    GraphError,
    automorphism_count,
    canonical_form,
    decode_key,
    disjoint_union,
    enumerate_graphs,
    key_p,
    key_vertex_count,
)


class NPolynomial:
    """Polynomial in the size symbol N with exact rational coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            for exp, value in coeffs.items():
                value = Fraction(value)
                if value:
                    c[int(exp)] = value
        self._c = c

    @classmethod
    def const(cls, value) -> "NPolynomial":
        return cls({0: Fraction(value)})

    @classmethod
    def n_power(cls, exp: int, value=1) -> "NPolynomial":
        return cls({exp: Fraction(value)})

    def coefficients(self) -> dict[int, Fraction]:
        return dict(self._c)

    def coefficient(self, exp: int) -> Fraction:
        return self._c.get(exp, Fraction(0))

    @property
    def degree(self) -> int:
        return max(self._c, default=-1)

    def __bool__(self) -> bool:
        return bool(self._c)

    def _coerce(self, other):
        if isinstance(other, NPolynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return NPolynomial.const(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self._c)
        for exp, value in other._c.items():
            out[exp] = out.get(exp, Fraction(0)) + value
        return NPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return NPolynomial({e: -v for e, v in self._c.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return NPolynomial({e: v * other for e, v in self._c.items()})
        if not isinstance(other, NPolynomial):
            return NotImplemented
        out: dict[int, Fraction] = {}
        for e1, v1 in self._c.items():
            for e2, v2 in other._c.items():
                exp = e1 + e2
                out[exp] = out.get(exp, Fraction(0)) + v1 * v2
        return NPolynomial(out)

    __rmul__ = __mul__

    def shifted(self, exp: int) -> "NPolynomial":
        """Multiply by N^exp."""
        return NPolynomial({e + exp: v for e, v in self._c.items()})

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def evaluate(self, n: int) -> Fraction:
        return sum((v * n**e for e, v in self._c.items()), Fraction(0))

    def __repr__(self):
        if not self._c:
            return "0"
        parts = []
        for exp in sorted(self._c, reverse=True):
            value = self._c[exp]
            if exp == 0:
                parts.append(str(value))
            elif exp == 1:
                parts.append(f"{value}*N" if value != 1 else "N")
            else:
                parts.append(f"{value}*N^{exp}" if value != 1 else f"N^{exp}")
        return " + ".join(parts)

    def to_json(self) -> list:
        return [
            {"N_exp": e, "num": str(v.numerator), "den": str(v.denominator)}
            for e, v in sorted(self._c.items())
        ]

    @classmethod
    def from_json(cls, data) -> "NPolynomial":
        return cls({
            int(item["N_exp"]): Fraction(int(item["num"]), int(item["den"]))
            for item in data
        })


ONE = NPolynomial.const(1)


# ---------------------------------------------------------------------------
# Monomials: sorted tuples of (graph key, power).

def monomial(counts) -> tuple:
    items = []
    for key, power in sorted(dict(counts).items()):
        if power < 0:
            raise ValueError("negative power in monomial")
        if power:
            items.append((key, int(power)))
    return tuple(items)


def monomial_from_keys(keys) -> tuple:
    counts: dict[bytes, int] = {}
    for key in keys:
        counts[key] = counts.get(key, 0) + 1
    return monomial(counts)


def monomial_order(m: tuple) -> int:
    return sum(key_vertex_count(key) * power for key, power in m)


def monomial_mul(a: tuple, b: tuple) -> tuple:
    counts = dict(a)
    for key, power in b:
        counts[key] = counts.get(key, 0) + power
    return monomial(counts)


def monomial_keys(m: tuple) -> list[bytes]:
    out = []
    for key, power in m:
        out.extend([key] * power)
    return out


class CouplingSeries:
    """Truncated series over graph-coupling symbols; V_max bounds vertex order."""

    __slots__ = ("D", "v_max", "terms")

    def __init__(self, D: int, v_max: int, terms=None):
        self.D = D
        self.v_max = v_max
        self.terms = {}
        if terms:
            for m, coeff in terms.items():
                if coeff and monomial_order(m) <= v_max:
                    self.terms[m] = coeff

    @classmethod
    def constant(cls, D: int, v_max: int, value) -> "CouplingSeries":
        return cls(D, v_max, {(): value})

    def copy(self) -> "CouplingSeries":
        return CouplingSeries(self.D, self.v_max, self.terms)

    def coefficient(self, m: tuple):
        return self.terms.get(m, 0)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "CouplingSeries"):
        if self.D != other.D:
            raise GraphError(f"color counts differ: {self.D} vs {other.D}")

    def __add__(self, other: "CouplingSeries") -> "CouplingSeries":
        self._check(other)
        out = dict(self.terms)
        for m, coeff in other.terms.items():
            out[m] = out[m] + coeff if m in out else coeff
        return CouplingSeries(self.D, min(self.v_max, other.v_max), out)

    def __sub__(self, other: "CouplingSeries") -> "CouplingSeries":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "CouplingSeries":
        return CouplingSeries(
            self.D, self.v_max,
            {m: coeff * factor for m, coeff in self.terms.items()})

    def __mul__(self, other: "CouplingSeries") -> "CouplingSeries":
        self._check(other)
        v_max = min(self.v_max, other.v_max)
        out: dict = {}
        for m1, c1 in self.terms.items():
            o1 = monomial_order(m1)
            for m2, c2 in other.terms.items():
                if o1 + monomial_order(m2) > v_max:
                    continue
                m = monomial_mul(m1, m2)
                prod = c1 * c2
                out[m] = out[m] + prod if m in out else prod
        return CouplingSeries(self.D, v_max, out)

    def differentiate(self, key: bytes) -> "CouplingSeries":
        """Formal partial derivative with respect to the coupling of key."""
        out: dict = {}
        for m, coeff in self.terms.items():
            counts = dict(m)
            power = counts.get(key)
            if not power:
                continue
            counts[key] = power - 1
            out[monomial(counts)] = coeff * power
        return CouplingSeries(self.D, self.v_max, out)

    def multiply_coupling(self, key: bytes) -> "CouplingSeries":
        """Multiply by the coupling symbol of key (truncating)."""
        unit = ((key, 1),)
        out: dict = {}
        for m, coeff in self.terms.items():
            m2 = monomial_mul(m, unit)
            if monomial_order(m2) <= self.v_max:
                out[m2] = coeff
        return CouplingSeries(self.D, self.v_max, out)

    def restricted_to_order(self, max_order: int) -> "CouplingSeries":
        return CouplingSeries(self.D, self.v_max, {
            m: coeff for m, coeff in self.terms.items()
            if monomial_order(m) <= max_order})

    def max_order(self) -> int:
        return max((monomial_order(m) for m in self.terms), default=-1)

    def __eq__(self, other):
        if not isinstance(other, CouplingSeries):
            return NotImplemented
        keys = set(self.terms) | set(other.terms)
        for m in keys:
            a = self.terms.get(m)
            b = other.terms.get(m)
            if a is None or b is None:
                if (a or b):
                    return False
            elif a != b:
                return False
        return True

    def __repr__(self):
        return f"CouplingSeries(D={self.D}, v_max={self.v_max}, {len(self.terms)} terms)"

    def to_json(self) -> list:
        rows = []
        for m in sorted(self.terms):
            coeff = self.terms[m]
            rows.append({
                "monomial": [
                    {"graph": key.hex(), "power": power} for key, power in m
                ],
                "coeff": coeff.to_json(),
            })
        return rows

    @classmethod
    def from_json(cls, D: int, v_max: int, data) -> "CouplingSeries":
        terms = {}
        for row in data:
            m = monomial({
                bytes.fromhex(item["graph"]): int(item["power"])
                for item in row["monomial"]})
            terms[m] = NPolynomial.from_json(row["coeff"])
        return cls(D, v_max, terms)


# ---------------------------------------------------------------------------
# Moments as polynomials in N.

@lru_cache(maxsize=None)
def _moment_polynomial_cached(keys: tuple[bytes, ...]) -> NPolynomial:
    if not keys:
        return ONE
    g = decode_key(keys[0])
    for key in keys[1:]:
        g = disjoint_union(g, decode_key(key))
    coeffs: dict[int, Fraction] = {}
    for phi in permutations(range(g.p)):
        faces = 0
        for c in range(g.D):
            perm = [g.sigma[c][phi[b]] for b in range(g.p)]
            seen = [False] * g.p
            for start in range(g.p):
                if seen[start]:
                    continue
                faces += 1
                x = start
                while not seen[x]:
                    seen[x] = True
                    x = perm[x]
        coeffs[faces] = coeffs.get(faces, Fraction(0)) + 1
    return NPolynomial(coeffs)


def moment_polynomial(graphs) -> NPolynomial:
    """Gaussian moment of a multiset of graphs as an exact polynomial in N.

    Accepts canonical keys or graphs; vertexless loops shift by N^loops.
    Evaluation at a concrete N reproduces the brute-force oracle.
    """
    keys = []
    loops = 0
    for item in graphs:
        if isinstance(item, ColoredGraph):
            loops += item.loop_count
            keys.append(canonical_form(item))
        else:
            keys.append(bytes(item))
    poly = _moment_polynomial_cached(tuple(sorted(keys)))
    return poly.shifted(loops) if loops else poly


def coupling_keys(D: int, v_max: int, include_dipole: bool = False) -> tuple[bytes, ...]:
    """Connected classes that carry couplings at truncation v_max.

    The two-vertex graph backs the Gaussian weight and is excluded unless
    explicitly requested (the constraint module re-admits it as a formal
    variable).
    """
    min_p = 1 if include_dipole else 2
    return tuple(
        key for key in enumerate_graphs(D, max(v_max // 2, 1), connected_only=True)
        if key_p(key) >= min_p)


def _multisets_bounded(keys: tuple[bytes, ...], budget: int):
    """All multisets over keys with total vertex order <= budget."""

    def rec(index: int, remaining: int):
        if index == len(keys):
            yield ()
            return
        key = keys[index]
        size = key_vertex_count(key)
        max_power = remaining // size
        for rest in rec(index + 1, remaining):
            yield rest
        for power in range(1, max_power + 1):
            for rest in rec(index + 1, remaining - power * size):
                yield ((key, power),) + rest

    for combo in rec(0, budget):
        yield monomial(dict(combo))


def partition_series(D: int, v_max: int, include_dipole: bool = False) -> CouplingSeries:
    """Gaussian expectation of exp of the coupled action, to total order v_max.

    The coefficient of a coupling monomial is the moment polynomial of the
    corresponding multiset divided by the product of automorphism counts
    and multiplicity factorials (exact rationals).
    """
    if v_max < 2 or v_max % 2:
        raise GraphError(f"truncation must be even and >= 2, got {v_max}")
    keys = coupling_keys(D, v_max, include_dipole)
    terms: dict = {}
    for m in _multisets_bounded(keys, v_max):
        scale = Fraction(1)
        for key, power in m:
            c_gamma = automorphism_count(decode_key(key))
            scale /= Fraction(c_gamma) ** power
            for j in range(1, power + 1):
                scale /= j
        poly = moment_polynomial(monomial_keys(m)) * scale
        if poly:
            terms[m] = poly
    return CouplingSeries(D, v_max, terms)


def log_series(series: CouplingSeries, power_bound: int | None = None) -> CouplingSeries:
    """log of a series with unit constant term, via the Taylor expansion.

    With a strict unit constant term the expansion stops on its own once
    powers exceed the truncation; callers whose coefficient ring hides
    positive-degree pieces inside the constant monomial (the flow module's
    t-grading) must pass an explicit power bound.
    """
    u = series - CouplingSeries.constant(series.D, series.v_max, _unit_like(series))
    if power_bound is None:
        if u.coefficient(()):
            raise GraphError("constant term of the series must equal 1")
        power_bound = max(series.v_max // 2, 1)
    out = CouplingSeries(series.D, series.v_max, {})
    power = u
    for k in range(1, power_bound + 1):
        out = out + power.scaled(Fraction((-1) ** (k + 1), k))
        if power.is_zero():
            break
        if k < power_bound:
            power = power * u
    return out


def exp_series(series: CouplingSeries, power_bound: int | None = None) -> CouplingSeries:
    """exp of a series with zero constant term (inverse of log_series)."""
    if power_bound is None:
        if series.coefficient(()):
            raise GraphError("constant term of the series must equal 0")
        power_bound = max(series.v_max // 2, 1)
    out = CouplingSeries.constant(series.D, series.v_max, _unit_like(series))
    power = series
    factorial = 1
    for k in range(1, power_bound + 1):
        factorial *= k
        out = out + power.scaled(Fraction(1, factorial))
        if power.is_zero():
            break
        if k < power_bound:
            power = power * series
    return out


def _unit_like(series: CouplingSeries):
    """A multiplicative unit compatible with the series' coefficient ring."""
    for coeff in series.terms.values():
        if isinstance(coeff, NPolynomial):
            return ONE
        if hasattr(coeff, "unit"):
            return coeff.unit()
        break
    return ONE


def differentiate(series: CouplingSeries, key: bytes) -> CouplingSeries:
    return series.differentiate(key)
