"""Commutative Hopf algebra on marked connected colored graphs.

Generators are pairs (connected graph, marked vertex), stored orbit-
canonically.  The coproduct splits a generator over families of pairwise
disjoint connected subgraphs that avoid the mark and expose exactly one
external leg per color.  Such a subgraph has majority color on one side
(one more white than black or vice versa) and all legs attached to the
majority side; the left tensor factor closes it with one added vertex of
the minority color (which becomes the mark), the right factor shrinks it
to a single majority-color vertex.

Two structural exclusions keep the bialgebra graded and the antipode
recursion finite:

* the family consisting of the full complement of the mark is never
  admissible (its closure would rebuild the whole generator on the left);
* single-vertex subgraphs are excluded by default.  They satisfy the leg
  condition, but admitting them breaks coassociativity (kept switchable
  for the record; see the tests).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .graphs import (
    ColoredGraph,
    GraphError,
    black_vertex_orbits,
    canonical_form_with_maps,
    decode_key,
    enumerate_graphs,
    invert,
    is_connected,
    key_p,
    white_vertex_orbits,
)


@dataclass(frozen=True, order=True)
class Generator:
    """Connected canonical graph with a marked vertex (orbit representative)."""

    key: bytes
    black_marked: bool
    vertex: int

    @property
    def graph(self) -> ColoredGraph:
        return decode_key(self.key)

    @property
    def p(self) -> int:
        return key_p(self.key)

    def label(self) -> str:
        side = "b" if self.black_marked else "w"
        return f"{self.key.hex()}:{side}{self.vertex}"


def generator(g: ColoredGraph, black_marked: bool, vertex: int) -> Generator:
    if not is_connected(g):
        raise GraphError("generators require a connected graph")
    if not 0 <= vertex < g.p:
        raise GraphError(f"vertex {vertex} out of range 0..{g.p - 1}")
    key, pi, tau = canonical_form_with_maps(g)
    canonical = decode_key(key)
    mapped = tau[vertex] if black_marked else pi[vertex]
    orbits = black_vertex_orbits(canonical) if black_marked \
        else white_vertex_orbits(canonical)
    for orbit in orbits:
        if mapped in orbit:
            mapped = orbit[0]
            break
    return Generator(key, black_marked, mapped)


def generators_up_to(D: int, p_max: int) -> list[Generator]:
    """Every generator with at most p_max white vertices, both mark colors."""
    out = []
    for key in enumerate_graphs(D, p_max, connected_only=True):
        g = decode_key(key)
        for orbit in white_vertex_orbits(g):
            out.append(Generator(key, False, orbit[0]))
        for orbit in black_vertex_orbits(g):
            out.append(Generator(key, True, orbit[0]))
    return out


# ---------------------------------------------------------------------------
# Algebra elements

def monomial_of(*gens: Generator) -> tuple:
    counts: dict[Generator, int] = {}
    for gen in gens:
        counts[gen] = counts.get(gen, 0) + 1
    return tuple(sorted(counts.items()))


def _monomial_mul(a: tuple, b: tuple) -> tuple:
    counts = dict(a)
    for gen, power in b:
        counts[gen] = counts.get(gen, 0) + power
    return tuple(sorted(counts.items()))


class HopfElement:
    """Integer-linear combination of commutative monomials in generators."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for m, coeff in terms.items():
                if coeff:
                    self.terms[m] = coeff

    @classmethod
    def unit(cls) -> "HopfElement":
        return cls({(): 1})

    @classmethod
    def of(cls, gen: Generator) -> "HopfElement":
        return cls({((gen, 1),): 1})

    def __add__(self, other: "HopfElement") -> "HopfElement":
        out = dict(self.terms)
        for m, coeff in other.terms.items():
            out[m] = out.get(m, 0) + coeff
        return HopfElement(out)

    def __sub__(self, other: "HopfElement") -> "HopfElement":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "HopfElement":
        return HopfElement({m: coeff * factor for m, coeff in self.terms.items()})

    def __mul__(self, other: "HopfElement") -> "HopfElement":
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _monomial_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return HopfElement(out)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, HopfElement):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for m, coeff in sorted(self.terms.items(), key=lambda kv: repr(kv[0])):
            label = "*".join(
                gen.label() + (f"^{power}" if power > 1 else "")
                for gen, power in m) or "1"
            bits.append(f"{coeff}·{label}")
        return " + ".join(bits)


class TensorSquareElement:
    """Linear combination of monomial pairs, the coproduct's value space."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for pair, coeff in terms.items():
                if coeff:
                    self.terms[pair] = coeff

    def __add__(self, other: "TensorSquareElement") -> "TensorSquareElement":
        out = dict(self.terms)
        for pair, coeff in other.terms.items():
            out[pair] = out.get(pair, 0) + coeff
        return TensorSquareElement(out)

    def __sub__(self, other: "TensorSquareElement") -> "TensorSquareElement":
        return self + other.scaled(-1)

    def scaled(self, factor) -> "TensorSquareElement":
        return TensorSquareElement(
            {pair: coeff * factor for pair, coeff in self.terms.items()})

    def __mul__(self, other: "TensorSquareElement") -> "TensorSquareElement":
        out: dict = {}
        for (l1, r1), c1 in self.terms.items():
            for (l2, r2), c2 in other.terms.items():
                pair = (_monomial_mul(l1, l2), _monomial_mul(r1, r2))
                out[pair] = out.get(pair, 0) + c1 * c2
        return TensorSquareElement(out)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, TensorSquareElement):
            return NotImplemented
        return self.terms == other.terms


# ---------------------------------------------------------------------------
# Admissible subgraphs

def _leg_profile(g: ColoredGraph, whites: frozenset, blacks: frozenset):
    """Per color: number of external legs of the vertex subset."""
    legs = []
    for c in range(g.D):
        internal = sum(1 for w in whites if g.sigma[c][w] in blacks)
        legs.append((len(whites) - internal) + (len(blacks) - internal))
    return legs


def _subset_connected(g: ColoredGraph, whites: frozenset, blacks: frozenset) -> bool:
    vertices = [("w", w) for w in whites] + [("b", b) for b in blacks]
    if not vertices:
        return False
    seen = {vertices[0]}
    stack = [vertices[0]]
    inv = [invert(g.sigma[c]) for c in range(g.D)]
    while stack:
        kind, x = stack.pop()
        for c in range(g.D):
            if kind == "w":
                nb = ("b", g.sigma[c][x])
                if nb[1] in blacks and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
            else:
                nb = ("w", inv[c][x])
                if nb[1] in whites and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
    return len(seen) == len(vertices)


@lru_cache(maxsize=None)
def _admissible_subgraphs(key: bytes, black_marked: bool, vertex: int,
                          allow_single: bool):
    g = decode_key(key)
    vertices = [("w", w) for w in range(g.p)] + [("b", b) for b in range(g.p)]
    marked = ("b" if black_marked else "w", vertex)
    vertices.remove(marked)
    out = []
    min_size = 1 if allow_single else 3
    for size in range(min_size, len(vertices) + 1, 2):
        if size == len(vertices):
            # the full complement closes back up to the generator itself;
            # admitting it would put a full-size factor left of the tensor
            # sign and the antipode recursion would never bottom out
            continue
        for subset in combinations(vertices, size):
            whites = frozenset(x for kind, x in subset if kind == "w")
            blacks = frozenset(x for kind, x in subset if kind == "b")
            if abs(len(whites) - len(blacks)) != 1:
                continue
            if any(count != 1 for count in _leg_profile(g, whites, blacks)):
                continue
            if not _subset_connected(g, whites, blacks):
                continue
            out.append((whites, blacks))
    return tuple(out)


def _families(subgraphs):
    """Nonempty sets of pairwise vertex-disjoint subgraphs."""

    def disjoint(a, b):
        return not (a[0] & b[0]) and not (a[1] & b[1])

    def rec(start, chosen):
        if chosen:
            yield tuple(chosen)
        for i in range(start, len(subgraphs)):
            cand = subgraphs[i]
            if all(disjoint(cand, other) for other in chosen):
                chosen.append(cand)
                yield from rec(i + 1, chosen)
                chosen.pop()

    yield from rec(0, [])


def _close_subgraph(g: ColoredGraph, whites: frozenset, blacks: frozenset):
    """Attach one opposite-color vertex to the legs; returns a Generator."""
    wlist = sorted(whites)
    blist = sorted(blacks)
    wmap = {w: i for i, w in enumerate(wlist)}
    bmap = {b: i for i, b in enumerate(blist)}
    inv = [invert(g.sigma[c]) for c in range(g.D)]
    if len(wlist) == len(blist) + 1:
        added = len(blist)  # new black absorbing one leg per color
        rows = []
        for c in range(g.D):
            row = [0] * len(wlist)
            for w in wlist:
                b = g.sigma[c][w]
                row[wmap[w]] = bmap[b] if b in blacks else added
            rows.append(tuple(row))
        closed = ColoredGraph(g.D, len(wlist), tuple(rows))
        return generator(closed, True, added)
    if len(blist) == len(wlist) + 1:
        added = len(wlist)  # new white
        rows = []
        for c in range(g.D):
            row = [0] * (len(wlist) + 1)
            for w in wlist:
                row[wmap[w]] = bmap[g.sigma[c][w]]
            external = [b for b in blist if inv[c][b] not in whites]
            assert len(external) == 1
            row[added] = bmap[external[0]]
            rows.append(tuple(row))
        closed = ColoredGraph(g.D, len(blist), tuple(rows))
        return generator(closed, False, added)
    raise AssertionError("subgraph sides must differ by one")


def _shrink_family(g: ColoredGraph, family, black_marked: bool, vertex: int):
    """Shrink every family member to one majority-color vertex; keep the mark."""
    in_white = {}
    in_black = {}
    for index, (whites, blacks) in enumerate(family):
        for w in whites:
            in_white[w] = index
        for b in blacks:
            in_black[b] = index
    white_majority = [len(w) > len(b) for w, b in family]

    new_whites = [("v", w) for w in range(g.p) if w not in in_white]
    new_blacks = [("v", b) for b in range(g.p) if b not in in_black]
    for index, majority in enumerate(white_majority):
        (new_whites if majority else new_blacks).append(("s", index))
    wmap = {item: i for i, item in enumerate(new_whites)}
    bmap = {item: i for i, item in enumerate(new_blacks)}

    def black_target(b: int):
        if b in in_black:
            index = in_black[b]
            assert not white_majority[index]
            return bmap[("s", index)]
        return bmap[("v", b)]

    rows = []
    for c in range(g.D):
        row = [0] * len(new_whites)
        for item, i in wmap.items():
            kind, value = item
            if kind == "v":
                row[i] = black_target(g.sigma[c][value])
            else:
                whites, blacks = family[value]
                external = [w for w in whites if g.sigma[c][w] not in blacks]
                assert len(external) == 1
                row[i] = black_target(g.sigma[c][external[0]])
        rows.append(tuple(row))
    reduced = ColoredGraph(g.D, len(new_whites), tuple(rows))
    if black_marked:
        new_vertex = bmap[("v", vertex)]
    else:
        new_vertex = wmap[("v", vertex)]
    return generator(reduced, black_marked, new_vertex)


# ---------------------------------------------------------------------------
# Hopf structure maps

@lru_cache(maxsize=None)
def _coproduct_cached(gen: Generator, allow_single: bool) -> TensorSquareElement:
    g = gen.graph
    mono = monomial_of(gen)
    terms = {(mono, ()): 1, ((), mono): 1}
    subs = _admissible_subgraphs(gen.key, gen.black_marked, gen.vertex,
                                 allow_single)
    for family in _families(list(subs)):
        left = [_close_subgraph(g, whites, blacks) for whites, blacks in family]
        assert all(factor.p < gen.p for factor in left)
        right = _shrink_family(g, family, gen.black_marked, gen.vertex)
        pair = (monomial_of(*left), monomial_of(right))
        terms[pair] = terms.get(pair, 0) + 1
    return TensorSquareElement(terms)


def coproduct(gen: Generator, allow_single_vertex: bool = False) -> TensorSquareElement:
    return _coproduct_cached(gen, allow_single_vertex)


def coproduct_monomial(m: tuple, allow_single_vertex: bool = False) -> TensorSquareElement:
    out = TensorSquareElement({((), ()): 1})
    for gen, power in m:
        delta = coproduct(gen, allow_single_vertex)
        for _ in range(power):
            out = out * delta
    return out


def coproduct_element(elt: HopfElement, allow_single_vertex: bool = False) -> TensorSquareElement:
    out = TensorSquareElement()
    for m, coeff in elt.terms.items():
        out = out + coproduct_monomial(m, allow_single_vertex).scaled(coeff)
    return out


def counit(elt: HopfElement):
    """1 on the unit monomial, 0 on everything else, extended linearly."""
    return elt.terms.get((), 0)


@lru_cache(maxsize=None)
def _antipode_cached(gen: Generator, allow_single: bool) -> HopfElement:
    out = HopfElement.of(gen).scaled(-1)
    mono = monomial_of(gen)
    delta = _coproduct_cached(gen, allow_single)
    for (left, right), coeff in delta.terms.items():
        if (left, right) in ((mono, ()), ((), mono)):
            continue
        s_left = antipode_monomial(left, allow_single)
        out = out - (s_left * HopfElement({right: 1})).scaled(coeff)
    return out


def antipode(gen: Generator, allow_single_vertex: bool = False) -> HopfElement:
    return _antipode_cached(gen, allow_single_vertex)


def antipode_monomial(m: tuple, allow_single: bool = False) -> HopfElement:
    out = HopfElement.unit()
    for gen, power in m:
        s_gen = _antipode_cached(gen, allow_single)
        for _ in range(power):
            out = out * s_gen
    return out


def antipode_element(elt: HopfElement, allow_single_vertex: bool = False) -> HopfElement:
    out = HopfElement()
    for m, coeff in elt.terms.items():
        out = out + antipode_monomial(m, allow_single_vertex).scaled(coeff)
    return out


# ---------------------------------------------------------------------------
# Characters

class Character:
    """Multiplicative rational functional, determined by generator values."""

    def __init__(self, on_generator, name: str = "char"):
        self._fn = on_generator
        self._memo: dict[Generator, Fraction] = {}
        self.name = name

    @classmethod
    def from_values(cls, values: dict, default=None, name: str = "char") -> "Character":
        def fn(gen: Generator) -> Fraction:
            if gen in values:
                return Fraction(values[gen])
            if default is not None:
                return Fraction(default)
            raise KeyError(f"character {name} has no value on {gen.label()}")
        return cls(fn, name)

    @classmethod
    def counit(cls) -> "Character":
        return cls(lambda gen: Fraction(0), "counit")

    def on_generator(self, gen: Generator) -> Fraction:
        if gen not in self._memo:
            self._memo[gen] = Fraction(self._fn(gen))
        return self._memo[gen]

    def on_monomial(self, m: tuple) -> Fraction:
        value = Fraction(1)
        for gen, power in m:
            value *= self.on_generator(gen) ** power
        return value

    def on_element(self, elt: HopfElement) -> Fraction:
        return sum(
            (Fraction(coeff) * self.on_monomial(m)
             for m, coeff in elt.terms.items()),
            Fraction(0))


def convolve(a: Character, b: Character,
             allow_single_vertex: bool = False) -> Character:
    """Convolution (a ⊗ b)∘Δ; characters form a group under this product."""

    def fn(gen: Generator) -> Fraction:
        total = Fraction(0)
        for (left, right), coeff in coproduct(gen, allow_single_vertex).terms.items():
            total += coeff * a.on_monomial(left) * b.on_monomial(right)
        return total

    return Character(fn, f"({a.name}*{b.name})")


def character_inverse(a: Character,
                      allow_single_vertex: bool = False) -> Character:
    """Convolution inverse a∘S."""

    def fn(gen: Generator) -> Fraction:
        return a.on_element(antipode(gen, allow_single_vertex))

    return Character(fn, f"{a.name}^-1")


# ---------------------------------------------------------------------------
# Infinitesimal characters

class InfinitesimalCharacter:
    """Derivation-like functional: vanishes on the unit and on products."""

    def __init__(self, on_generator, name: str = "delta"):
        self._fn = on_generator
        self._memo: dict[Generator, Fraction] = {}
        self.name = name

    @classmethod
    def delta(cls, gen: Generator, value=1) -> "InfinitesimalCharacter":
        def fn(candidate: Generator) -> Fraction:
            return Fraction(value) if candidate == gen else Fraction(0)
        return cls(fn, f"delta[{gen.label()}]")

    def on_generator(self, gen: Generator) -> Fraction:
        if gen not in self._memo:
            self._memo[gen] = Fraction(self._fn(gen))
        return self._memo[gen]

    def on_monomial(self, m: tuple) -> Fraction:
        if len(m) == 1 and m[0][1] == 1:
            return self.on_generator(m[0][0])
        return Fraction(0)


def infinitesimal_bracket(da: InfinitesimalCharacter, db: InfinitesimalCharacter,
                          allow_single_vertex: bool = False) -> InfinitesimalCharacter:
    """(da ⊗ db - db ⊗ da)∘Δ restricted to generators."""

    def fn(gen: Generator) -> Fraction:
        total = Fraction(0)
        for (left, right), coeff in coproduct(gen, allow_single_vertex).terms.items():
            total += coeff * (da.on_monomial(left) * db.on_monomial(right)
                              - db.on_monomial(left) * da.on_monomial(right))
        return total

    return InfinitesimalCharacter(fn, f"[{da.name},{db.name}]")


# ---------------------------------------------------------------------------
# Side-by-side bracket report (no assertion: the two Lie structures are
# indexed the same way but the literature gives no precise dictionary)

def bracket_comparison_report(D: int, p_max: int, v_max: int) -> dict:
    from .constraints import all_constraint_operators, lie_bracket

    ops = all_constraint_operators(D, p_max)
    report = {"D": D, "p_max": p_max, "pairs": []}
    gens = [Generator(op.base_key, True, op.marked_black) for op in ops]
    targets = generators_up_to(D, min(2 * p_max - 1, v_max // 2))
    black_targets = [gen for gen in targets if gen.black_marked]
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            expansion = lie_bracket(ops[i], ops[j], v_max)
            bracket = infinitesimal_bracket(
                InfinitesimalCharacter.delta(gens[i]),
                InfinitesimalCharacter.delta(gens[j]))
            hopf_values = {
                gen.label(): str(bracket.on_generator(gen))
                for gen in black_targets
                if bracket.on_generator(gen)
            }
            report["pairs"].append({
                "left": gens[i].label(),
                "right": gens[j].label(),
                "constraint_bracket": {
                    f"{key}:b{mark}": repr(poly)
                    for (key, mark), poly in expansion.combination.items()
                } if expansion.exact else "not expanded",
                "character_bracket": hopf_values,
            })
    return report
