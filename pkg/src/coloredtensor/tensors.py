"""Exact tensor evaluation and brute-force Gaussian-moment oracles.

Everything here enumerates explicitly: trace invariants sum over one index
per edge, moments sum over all white/black pairings with the weight
N^(number of faces), and an independent second path expands the Gaussian
integral entry by entry.  These functions are the ground truth against
which the symbolic modules are validated, so they deliberately avoid the
canonicalization, series, and operator machinery.

Faces of a pairing phi (a bijection blacks -> whites) are the cycles of
sigma[c]∘phi for each color c; the opposite orientation gives the inverse
permutation and hence the same count.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

from .graphs import ColoredGraph, GraphError, disjoint_union, empty_graph, invert


@dataclass(frozen=True)
class DenseTensor:
    """Rank-D tensor with index range 1..N per slot and exact entries."""

    N: int
    D: int
    entries: tuple  # flat, index (i_1,...,i_D) 0-based at position sum(i_k * N^k)

    @classmethod
    def from_function(cls, N: int, D: int, fn) -> "DenseTensor":
        values = tuple(fn(idx) for idx in product(range(N), repeat=D))
        return cls(N, D, values)

    @classmethod
    def filled(cls, N: int, D: int, value) -> "DenseTensor":
        return cls(N, D, (value,) * N**D)

    @classmethod
    def zeros(cls, N: int, D: int) -> "DenseTensor":
        return cls.filled(N, D, 0)

    def __getitem__(self, idx: tuple) -> object:
        flat = 0
        for i in idx:
            flat = flat * self.N + i
        return self.entries[flat]

    def scaled(self, s) -> "DenseTensor":
        return DenseTensor(self.N, self.D, tuple(s * v for v in self.entries))


def _union(graphs) -> ColoredGraph:
    graphs = list(graphs)
    if not graphs:
        raise GraphError("empty multiset has no color count")
    out = graphs[0]
    for g in graphs[1:]:
        out = disjoint_union(out, g)
    return out


def trace_invariant(g: ColoredGraph, M: DenseTensor, Mbar: DenseTensor):
    """The invariant of g on explicit tensors: whites carry M, blacks Mbar.

    Each edge carries one summation index; slot c of a black vertex reads
    the index of its color-c edge.  Vertexless loops contribute N each.
    """
    if not (g.D == M.D == Mbar.D):
        raise GraphError(
            f"rank mismatch: graph D={g.D}, tensors D={M.D}, {Mbar.D}")
    if M.N != Mbar.N:
        raise GraphError(f"index ranges differ: {M.N} vs {Mbar.N}")
    N = M.N
    inv = [invert(g.sigma[c]) for c in range(g.D)]
    total = 0
    for assignment in product(range(N), repeat=g.D * g.p):
        # edge (w, c) gets assignment[w * D + c]
        term = 1
        for w in range(g.p):
            term *= M[tuple(assignment[w * g.D + c] for c in range(g.D))]
            if term == 0:
                break
        else:
            for b in range(g.p):
                term *= Mbar[tuple(
                    assignment[inv[c][b] * g.D + c] for c in range(g.D))]
                if term == 0:
                    break
        if term != 0:
            total += term
    return total * N**g.loop_count


def _cycle_count_of(perm: list[int]) -> int:
    seen = [False] * len(perm)
    count = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        count += 1
        x = start
        while not seen[x]:
            seen[x] = True
            x = perm[x]
    return count


def gaussian_moment_bruteforce(graphs, N: int) -> int:
    """<product of trace invariants> under covariance <M M̄> = prod of deltas.

    Sums N^faces over all P! pairings of the union's whites with its
    blacks.  Balance of white and black counts is structural here.  The
    empty multiset gives 1.
    """
    graphs = list(graphs)
    if not graphs:
        return 1
    g = _union(graphs)
    if g.p == 0:
        return N**g.loop_count
    total = 0
    for phi in permutations(range(g.p)):  # phi[b] = paired white
        faces = 0
        for c in range(g.D):
            faces += _cycle_count_of([g.sigma[c][phi[b]] for b in range(g.p)])
        total += N**faces
    return total * N**g.loop_count


def explicit_index_moment(graphs, N: int) -> int:
    """Same moment by expanding the Gaussian integral entry by entry.

    Enumerates every edge-index assignment, then applies Wick's theorem to
    the resulting monomial of concrete entries (a sum of delta products
    over pairings).  Independent of all face counting; small inputs only.
    """
    graphs = list(graphs)
    if not graphs:
        return 1
    g = _union(graphs)
    if g.p == 0:
        return N**g.loop_count
    inv = [invert(g.sigma[c]) for c in range(g.D)]
    pairings = list(permutations(range(g.p)))
    total = 0
    for assignment in product(range(N), repeat=g.D * g.p):
        whites = [tuple(assignment[w * g.D + c] for c in range(g.D))
                  for w in range(g.p)]
        blacks = [tuple(assignment[inv[c][b] * g.D + c] for c in range(g.D))
                  for b in range(g.p)]
        for phi in pairings:
            if all(whites[phi[b]] == blacks[b] for b in range(g.p)):
                total += 1
    return total * N**g.loop_count


# ---------------------------------------------------------------------------
# Change-of-variables residual oracle.
#
# Polynomials in tensor entries are dicts mapping
# (sorted tuple of M index-tuples, sorted tuple of M̄ index-tuples) -> int.

def _poly_add(poly: dict, monomial, coeff: int) -> None:
    new = poly.get(monomial, 0) + coeff
    if new:
        poly[monomial] = new
    elif monomial in poly:
        del poly[monomial]


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (ma, mba), ca in a.items():
        for (mb, mbb), cb in b.items():
            monomial = (tuple(sorted(ma + mb)), tuple(sorted(mba + mbb)))
            _poly_add(out, monomial, ca * cb)
    return out


def _poly_dM(poly: dict, entry) -> dict:
    """Formal derivative with respect to the M entry with the given indices."""
    out: dict = {}
    for (mpart, mbar), coeff in poly.items():
        count = mpart.count(entry)
        if not count:
            continue
        reduced = list(mpart)
        reduced.remove(entry)
        _poly_add(out, (tuple(reduced), mbar), coeff * count)
    return out


def _trace_poly(g: ColoredGraph, N: int) -> dict:
    """Trace invariant of g as a polynomial in concrete entries."""
    inv = [invert(g.sigma[c]) for c in range(g.D)]
    poly: dict = {}
    scale = N**g.loop_count
    for assignment in product(range(N), repeat=g.D * g.p):
        whites = tuple(sorted(
            tuple(assignment[w * g.D + c] for c in range(g.D))
            for w in range(g.p)))
        blacks = tuple(sorted(
            tuple(assignment[inv[c][b] * g.D + c] for c in range(g.D))
            for b in range(g.p)))
        _poly_add(poly, (whites, blacks), scale)
    return poly


def _delta_m(g0: ColoredGraph, vbar0: int, N: int) -> dict:
    """The variation tensor: g0's invariant with the entry at vbar0 removed.

    Maps each free index tuple a to the polynomial multiplying M̄_a.
    """
    inv = [invert(g0.sigma[c]) for c in range(g0.D)]
    out: dict = {}
    for assignment in product(range(N), repeat=g0.D * g0.p):
        whites = tuple(sorted(
            tuple(assignment[w * g0.D + c] for c in range(g0.D))
            for w in range(g0.p)))
        blacks = tuple(sorted(
            tuple(assignment[inv[c][b] * g0.D + c] for c in range(g0.D))
            for b in range(g0.p) if b != vbar0))
        a = tuple(assignment[inv[c][vbar0] * g0.D + c] for c in range(g0.D))
        out.setdefault(a, {})
        _poly_add(out[a], (whites, blacks), 1)
    return out


def _expectation(poly: dict, N: int) -> int:
    """Gaussian expectation of an entry polynomial by explicit Wick pairing."""
    total = 0
    for (mpart, mbar), coeff in poly.items():
        if len(mpart) != len(mbar):
            continue
        n = len(mpart)
        matchings = 0
        for phi in permutations(range(n)):
            if all(mpart[phi[i]] == mbar[i] for i in range(n)):
                matchings += 1
        total += coeff * matchings
    return total


def sd_constraint_terms(g0: ColoredGraph, vbar0: int, insertions, N: int):
    """Jacobian, variation, and weight terms of the change-of-variables identity.

    Shifting M by the variation tensor of (g0, vbar0) inside the Gaussian
    integral with trace insertions yields, after integration by parts,

        E[(sum_a d(dM_a)/dM_a) F] + E[sum_a dM_a dF/dM_a] - E[Tr_g0 F] = 0

    with F the product of insertion invariants.  Returns the three terms
    (jacobian, variation, weight); their signed sum is the residual.
    """
    if not 0 <= vbar0 < g0.p:
        raise GraphError(f"black vertex {vbar0} out of range 0..{g0.p - 1}")
    insertions = list(insertions)
    if insertions:
        f_poly = _trace_poly(_union(insertions), N)
    else:
        f_poly = {((), ()): 1}
    delta = _delta_m(g0, vbar0, N)

    jac_poly: dict = {}
    for a, poly in delta.items():
        for monomial, coeff in _poly_dM(poly, a).items():
            _poly_add(jac_poly, monomial, coeff)
    jacobian = _expectation(_poly_mul(jac_poly, f_poly), N)

    variation = 0
    for a, poly in delta.items():
        df = _poly_dM(f_poly, a)
        if df:
            variation += _expectation(_poly_mul(poly, df), N)

    weight = _expectation(_poly_mul(_trace_poly(g0, N), f_poly), N)
    return jacobian, variation, weight


def sd_residual_numeric(g0: ColoredGraph, vbar0: int, insertions, N: int) -> int:
    """Residual of the change-of-variables identity; 0 when the books balance."""
    jacobian, variation, weight = sd_constraint_terms(g0, vbar0, insertions, N)
    return jacobian + variation - weight
