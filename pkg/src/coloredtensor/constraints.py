"""Constraint operators on the coupling series and their Lie brackets.

The invariance of the partition integral under the infinitesimal shift of
the white tensor by the opened invariant of a marked graph (base graph g0,
marked black vertex vbar0) produces one differential operator per marked
graph.  Acting on the partition series it has three pieces:

* a contraction piece: for each white v of g0, the components of the
  contraction g0/vbar0 v turn into a product of coupling derivatives, each
  component weighted by its relabeling count, each vertexless loop by N;
* an insertion piece: for every connected graph G and white v in G, the
  coupling of G times the derivative with respect to the glued-contracted
  class (g0 G)/vbar0 v, weighted by the ratio of relabeling counts;
* a weight piece subtracting the derivative with respect to g0 itself.

The bookkeeping keeps the Gaussian-weight (two-vertex) coupling as a
formal series variable so that products of derivatives are always defined;
the tensor-level integration-by-parts oracle in ``tensors`` pins every
normalization.  Applied to the partition series (with that variable kept)
the operator vanishes identically; applied to its log it does not, which
is the content of the moments-versus-cumulants distinction, kept
reproducible behind the ``form`` flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .graphs import (
    ColoredGraph,
    GraphError,
    automorphism_count,
    black_vertex_orbits,
    canonical_form,
    canonical_form_with_maps,
    component_key_multiset,
    connected_components,
    decode_key,
    dipole,
    enumerate_graphs,
    key_p,
)
from .series import (
    CouplingSeries,
    NPolynomial,
    ONE,
    coupling_keys,
    log_series,
    partition_series,
)
from .surgery import contract, glue_and_contract


@dataclass(frozen=True)
class OperatorTerm:
    """coeff(N) * lambda_lam * prod of d/d lambda_k over derivs."""

    coeff: NPolynomial
    lam: bytes | None
    derivs: tuple[bytes, ...]

    def apply(self, series: CouplingSeries) -> CouplingSeries:
        out = series
        for key in self.derivs:
            out = out.differentiate(key)
        if self.lam is not None:
            out = out.multiply_coupling(self.lam)
        return out.scaled(self.coeff)


@dataclass(frozen=True)
class ConstraintOperator:
    """Constraint indexed by a connected base graph and a marked black orbit."""

    D: int
    base_key: bytes
    marked_black: int

    @property
    def base_graph(self) -> ColoredGraph:
        return decode_key(self.base_key)

    @property
    def p0(self) -> int:
        return key_p(self.base_key)

    @property
    def identity(self) -> tuple[str, int]:
        return (self.base_key.hex(), self.marked_black)

    def order_shift(self) -> int:
        """Worst vertex-order lookahead of any term (the weight piece)."""
        return 2 * self.p0

    def contraction_terms(self) -> tuple[OperatorTerm, ...]:
        return _contraction_terms(self)

    def insertion_terms(self, v_max: int) -> tuple[OperatorTerm, ...]:
        return _insertion_terms(self, v_max)

    def weight_term(self) -> OperatorTerm:
        c0 = automorphism_count(self.base_graph)
        return OperatorTerm(ONE * (-c0), None, (self.base_key,))

    def apply_parts(self, series: CouplingSeries):
        """(contraction piece, insertion piece, weight piece) on the series."""
        zero = CouplingSeries(series.D, series.v_max, {})
        jac = zero
        for term in self.contraction_terms():
            jac = jac + term.apply(series)
        ins = zero
        for term in self.insertion_terms(series.v_max):
            ins = ins + term.apply(series)
        return jac, ins, self.weight_term().apply(series)

    def apply(self, series: CouplingSeries) -> CouplingSeries:
        jac, ins, weight = self.apply_parts(series)
        return jac + ins + weight


def constraint_operator(g0: ColoredGraph | bytes, vbar0: int) -> ConstraintOperator:
    """Build the operator for (g0, vbar0), normalized to the marked orbit."""
    if isinstance(g0, bytes):
        g0 = decode_key(g0)
    if not is_connected_base(g0):
        raise GraphError("constraint base graph must be connected")
    if not 0 <= vbar0 < g0.p:
        raise GraphError(f"black vertex {vbar0} out of range 0..{g0.p - 1}")
    key, _, tau = canonical_form_with_maps(g0)
    marked = tau[vbar0]
    for orbit in black_vertex_orbits(decode_key(key)):
        if marked in orbit:
            marked = orbit[0]
            break
    return ConstraintOperator(g0.D, key, marked)


def is_connected_base(g: ColoredGraph) -> bool:
    pieces, loops = connected_components(g)
    return len(pieces) == 1 and loops == 0


@lru_cache(maxsize=None)
def _contraction_terms(op: ConstraintOperator) -> tuple[OperatorTerm, ...]:
    g0 = op.base_graph
    collected: dict[tuple[bytes, ...], NPolynomial] = {}
    for v in range(g0.p):
        result = contract(g0, v, op.marked_black)
        pieces, _ = connected_components(result.graph.with_loops(0))
        keys = tuple(sorted(canonical_form(piece) for piece in pieces))
        weight = ONE
        for piece in pieces:
            weight = weight * automorphism_count(piece)
        weight = weight.shifted(result.new_loops)
        collected[keys] = collected.get(keys, NPolynomial()) + weight
    return tuple(
        OperatorTerm(coeff, None, keys)
        for keys, coeff in sorted(collected.items())
    )


@lru_cache(maxsize=None)
def _insertion_terms(op: ConstraintOperator, v_max: int) -> tuple[OperatorTerm, ...]:
    g0 = op.base_graph
    p_insert_max = v_max // 2 - op.p0 + 1
    if p_insert_max < 1:
        return ()
    terms: dict[tuple[bytes, tuple[bytes, ...]], Fraction] = {}
    for gkey in coupling_keys(op.D, 2 * p_insert_max, include_dipole=True):
        g = decode_key(gkey)
        scale = Fraction(1, automorphism_count(g))
        for v in range(g.p):
            glued = glue_and_contract(g0, op.marked_black, g, v)
            keys = component_key_multiset(glued)
            weight = scale
            for key in keys:
                weight *= automorphism_count(decode_key(key))
            item = (gkey, keys)
            terms[item] = terms.get(item, Fraction(0)) + weight
    return tuple(
        OperatorTerm(ONE * coeff, lam, keys)
        for (lam, keys), coeff in sorted(terms.items())
    )


def constraint_action(op: ConstraintOperator, series: CouplingSeries) -> CouplingSeries:
    """Apply the full operator (all three pieces) to a coupling series."""
    if series.D != op.D:
        raise GraphError(f"color counts differ: {series.D} vs {op.D}")
    return op.apply(series)


@lru_cache(maxsize=None)
def _partition_with_weight_variable(D: int, v_max: int) -> CouplingSeries:
    return partition_series(D, v_max, include_dipole=True)


def verify_constraint(g0, vbar0: int, D: int, v_max: int, form: str = "Z") -> CouplingSeries:
    """Residual of the constraint on the order-v_max partition series.

    The residual is restricted to the vertex orders the truncation
    determines exactly (v_max minus the operator's lookahead) and is the
    zero series there when the books balance.  form="W" applies the same
    operator to the log of the series instead; products of derivatives
    then see cumulants rather than moments, and the residual survives.
    """
    if isinstance(g0, ColoredGraph):
        op = constraint_operator(g0, vbar0)
    else:
        op = constraint_operator(decode_key(g0), vbar0)
    if op.D != D:
        raise GraphError(f"color counts differ: {op.D} vs {D}")
    target = _partition_with_weight_variable(D, v_max)
    if form == "W":
        target = log_series(target)
    elif form != "Z":
        raise GraphError(f"form must be 'Z' or 'W', got {form!r}")
    residual = constraint_action(op, target)
    window = v_max - op.order_shift()
    return residual.restricted_to_order(max(window, -1))


def all_constraint_operators(D: int, p_max: int) -> list[ConstraintOperator]:
    """One operator per connected class and marked-black-vertex orbit."""
    ops = []
    for key in enumerate_graphs(D, p_max, connected_only=True):
        g = decode_key(key)
        for orbit in black_vertex_orbits(g):
            ops.append(ConstraintOperator(D, key, orbit[0]))
    return ops


# ---------------------------------------------------------------------------
# Lie brackets

@dataclass(frozen=True)
class BracketExpansion:
    """[a, b] expanded over constraint operators, plus closure evidence."""

    combination: dict
    exact: bool
    underdetermined: bool
    residual_monomials: tuple

    def is_closed(self) -> bool:
        return self.exact


def _basis_monomials(D: int, v_max: int) -> list[tuple]:
    from .series import _multisets_bounded

    keys = coupling_keys(D, v_max, include_dipole=True)
    return sorted(_multisets_bounded(keys, v_max))


def commutator_action(a: ConstraintOperator, b: ConstraintOperator,
                      series: CouplingSeries) -> CouplingSeries:
    return a.apply(b.apply(series)) - b.apply(a.apply(series))


def lie_bracket(a: ConstraintOperator, b: ConstraintOperator, v_max: int,
                candidates: list[ConstraintOperator] | None = None,
                degree_bound: int | None = None) -> BracketExpansion:
    """Expand [a, b] over constraint operators by matching actions.

    Applies both orderings to every coupling monomial of order <= v_max and
    solves, with exact rational linear algebra, for polynomial-in-N
    coefficients on a candidate operator family (every marked connected
    class up to the combined size by default).  An inconsistent system is
    returned as non-closure evidence, never silenced.
    """
    if a.D != b.D:
        raise GraphError(f"color counts differ: {a.D} vs {b.D}")
    if candidates is None:
        candidates = all_constraint_operators(a.D, min(a.p0 + b.p0 - 1, v_max // 2))
    basis = _basis_monomials(a.D, v_max)
    rhs_values = {}
    cand_values = [dict() for _ in candidates]
    max_degree = 0
    for m in basis:
        unit = CouplingSeries(a.D, v_max, {m: ONE})
        r = commutator_action(a, b, unit)
        for mu, coeff in r.terms.items():
            rhs_values[(m, mu)] = coeff
            max_degree = max(max_degree, coeff.degree)
        for values, op in zip(cand_values, candidates):
            image = op.apply(unit)
            for mu, coeff in image.terms.items():
                values[(m, mu)] = coeff
                max_degree = max(max_degree, coeff.degree)
    if degree_bound is None:
        for bound in (0, max_degree + 1):
            expansion = _solve_expansion(
                candidates, cand_values, rhs_values, bound)
            if expansion.exact:
                return expansion
        return expansion
    return _solve_expansion(candidates, cand_values, rhs_values, degree_bound)


def _solve_expansion(candidates, cand_values, rhs_values, degree_bound):
    # Unknowns: coefficient of N^d on candidate i.
    unknowns = [(i, d) for i in range(len(candidates))
                for d in range(degree_bound + 1)]
    slots = set(rhs_values)
    for values in cand_values:
        slots.update(values)
    rows = []
    rhs = []
    slot_list = sorted(slots, key=repr)
    for slot in slot_list:
        target = rhs_values.get(slot, NPolynomial())
        powers = set(target.coefficients())
        per_candidate = []
        for values in cand_values:
            poly = values.get(slot, NPolynomial())
            per_candidate.append(poly)
            for e in poly.coefficients():
                powers.update(range(e, e + degree_bound + 1))
        for e in sorted(powers):
            row = []
            for i, _ in enumerate(candidates):
                poly = per_candidate[i]
                for d in range(degree_bound + 1):
                    row.append(poly.coefficient(e - d))
            rows.append(row)
            rhs.append(target.coefficient(e))
    solution, exact, underdetermined = _solve_exact(rows, rhs, len(unknowns))
    if not exact:
        bad = tuple(slot for slot in slot_list if rhs_values.get(slot))
        return BracketExpansion({}, False, underdetermined, bad)
    combination = {}
    for (i, d), value in zip(unknowns, solution):
        if value:
            op = candidates[i]
            poly = combination.get(op.identity, NPolynomial())
            combination[op.identity] = poly + NPolynomial({d: value})
    return BracketExpansion(combination, True, underdetermined, ())


def _solve_exact(rows, rhs, n_unknowns):
    """Gaussian elimination over the rationals; flags inconsistency."""
    matrix = [list(row) + [value] for row, value in zip(rows, rhs)]
    pivots = []
    rank_col = {}
    r = 0
    for col in range(n_unknowns):
        pivot = None
        for i in range(r, len(matrix)):
            if matrix[i][col]:
                pivot = i
                break
        if pivot is None:
            continue
        matrix[r], matrix[pivot] = matrix[pivot], matrix[r]
        head = matrix[r][col]
        matrix[r] = [x / head for x in matrix[r]]
        for i in range(len(matrix)):
            if i != r and matrix[i][col]:
                factor = matrix[i][col]
                matrix[i] = [x - factor * y for x, y in zip(matrix[i], matrix[r])]
        rank_col[r] = col
        pivots.append(col)
        r += 1
    for i in range(r, len(matrix)):
        if matrix[i][n_unknowns]:
            return None, False, False
    solution = [Fraction(0)] * n_unknowns
    for row_index, col in rank_col.items():
        solution[col] = matrix[row_index][n_unknowns]
    underdetermined = len(pivots) < n_unknowns
    return solution, True, underdetermined


def necklace_operator(length: int) -> ConstraintOperator:
    """D=2 constraint for the closed chain with the given white count."""
    shift = tuple((w + 1) % length for w in range(length))
    g = ColoredGraph(2, length, (tuple(range(length)), shift))
    return constraint_operator(g, 0)


def dipole_operator(D: int) -> ConstraintOperator:
    return constraint_operator(dipole(D), 0)
