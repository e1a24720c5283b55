from fractions import Fraction

import pytest

from coloredtensor.graphs import (
    GraphError,
    automorphism_count,
    black_vertex_orbits,
    canonical_form,
    decode_key,
    dipole,
    enumerate_graphs,
    key_p,
    new_graph,
)
from coloredtensor.constraints import (
    all_constraint_operators,
    commutator_action,
    constraint_action,
    constraint_operator,
    dipole_operator,
    lie_bracket,
    necklace_operator,
    verify_constraint,
)
from coloredtensor.series import (
    CouplingSeries,
    NPolynomial,
    ONE,
    coupling_keys,
    monomial_keys,
    moment_polynomial,
    partition_series,
)
from coloredtensor.tensors import sd_constraint_terms


# ---------------------------------------------------------------------------
# Operator structure

def test_dipole_contraction_piece_is_pure_size_factor():
    for D in (2, 3):
        op = dipole_operator(D)
        unit = CouplingSeries.constant(D, 4, ONE)
        jac, ins, weight = op.apply_parts(unit)
        assert jac.coefficient(()) == NPolynomial.n_power(D)
        assert ins.is_zero()
        # the translation-trace oracle fixes the same value numerically
        for n in (1, 2, 3):
            jacobian, _, _ = sd_constraint_terms(dipole(D), 0, [], n)
            assert jac.coefficient(()).evaluate(n) == jacobian


def test_dipole_insertion_piece_counts_vertices():
    op = dipole_operator(3)
    terms = op.insertion_terms(6)
    by_lam = {term.lam: term for term in terms}
    for key in coupling_keys(3, 6, include_dipole=True):
        term = by_lam[key]
        assert term.derivs == (key,)
        assert term.coeff == ONE * key_p(key)


def test_weight_piece_is_scaled_derivative():
    g = decode_key(coupling_keys(3, 4)[0])
    op = constraint_operator(g, 0)
    term = op.weight_term()
    assert term.derivs == (op.base_key,)
    assert term.coeff == ONE * (-automorphism_count(g))


def test_operator_requires_connected_base():
    two = new_graph(3, 2, [[1, 2], [1, 2], [1, 2]])
    with pytest.raises(GraphError):
        constraint_operator(two, 0)


def test_operator_independent_of_orbit_member():
    for key in enumerate_graphs(3, 3, connected_only=True):
        g = decode_key(key)
        for orbit in black_vertex_orbits(g):
            ops = {constraint_operator(g, vbar) for vbar in orbit}
            assert len(ops) == 1


# ---------------------------------------------------------------------------
# Residuals

def test_dipole_residual_vanishes():
    assert verify_constraint(dipole(3), 0, 3, 4).is_zero()
    assert verify_constraint(dipole(2), 0, 2, 6).is_zero()


def test_quartic_residuals_vanish():
    for op in all_constraint_operators(3, 2):
        if op.p0 == 2:
            residual = verify_constraint(op.base_key, op.marked_black, 3, 6)
            assert residual.is_zero()


def test_splitting_contraction_residual_vanishes():
    # this base graph contracts to two disjoint Gaussian-weight graphs,
    # exercising the genuinely second-order derivative piece
    g = new_graph(3, 3, [[1, 2, 3], [2, 3, 1], [2, 3, 1]])
    found = False
    for v in range(3):
        from coloredtensor.surgery import contract
        from coloredtensor.graphs import connected_components
        pieces, _ = connected_components(contract(g, v, 2).graph.with_loops(0))
        found = found or len(pieces) == 2
    assert found
    assert verify_constraint(g, 2, 3, 6).is_zero()


def test_log_form_residual_survives():
    # applying the same operator to the log of the series mixes cumulants
    # where moments belong; the residual must witness the difference
    res = verify_constraint(dipole(3), 0, 3, 6, form="W")
    assert not res.is_zero()


def test_window_restriction():
    res = verify_constraint(dipole(3), 0, 3, 6)
    assert res.v_max == 6
    assert res.is_zero()
    with pytest.raises(GraphError):
        verify_constraint(dipole(3), 0, 3, 6, form="Q")


# ---------------------------------------------------------------------------
# Agreement with the tensor-level oracle, term by term

def test_parts_match_oracle_with_insertions():
    z4 = partition_series(3, 8, include_dipole=True)
    quartic = decode_key(next(
        k for k in coupling_keys(3, 8) if key_p(k) == 2))
    qkey = canonical_form(quartic)
    cases = [
        (dipole(3), 0, quartic, qkey),
        (quartic, 0, dipole(3), canonical_form(dipole(3))),
        (quartic, 1, quartic, qkey),
    ]
    for g0, vbar, ins_graph, ins_key in cases:
        op = constraint_operator(g0, vbar)
        jac, ins, weight = op.apply_parts(z4)
        scale = Fraction(1, automorphism_count(ins_graph))
        for n in (1, 2):
            jacobian, variation, mass = sd_constraint_terms(
                g0, vbar, [ins_graph], n)
            assert jac.coefficient(((ins_key, 1),)).evaluate(n) == jacobian * scale
            assert ins.coefficient(((ins_key, 1),)).evaluate(n) == variation * scale
            assert weight.coefficient(((ins_key, 1),)).evaluate(n) == -mass * scale


def test_derivatives_of_series_reproduce_moments():
    # prod C * prod d/dlambda applied to the series brings down the moment
    # of the multiset, including repeated Gaussian-weight factors
    z = partition_series(3, 8, include_dipole=True)
    dip = canonical_form(dipole(3))
    quartic = next(k for k in coupling_keys(3, 8) if key_p(k) == 2)
    for multiset in ([dip], [dip, dip], [dip, quartic], [quartic]):
        derived = z
        scale = ONE
        for key in multiset:
            derived = derived.differentiate(key)
            scale = scale * automorphism_count(decode_key(key))
        got = derived.coefficient(()) * scale
        assert got == moment_polynomial(multiset)


# ---------------------------------------------------------------------------
# Lie brackets

def test_bracket_with_self_is_empty():
    op = necklace_operator(2)
    expansion = lie_bracket(op, op, 8)
    assert expansion.exact
    assert expansion.combination == {}


def test_bracket_antisymmetry():
    a, b = necklace_operator(2), necklace_operator(3)
    ab = lie_bracket(a, b, 8)
    ba = lie_bracket(b, a, 8)
    assert ab.exact and ba.exact
    assert set(ab.combination) == set(ba.combination)
    for key, poly in ab.combination.items():
        assert ba.combination[key] == -1 * poly


def test_necklace_bracket_relation_golden():
    # computed once and locked: [L_m, L_n] = (m - n) L_{m+n-1} in
    # necklace-length labels (the nonnegative Witt half)
    cases = {(2, 1): (1, 2), (3, 1): (2, 3), (3, 2): (1, 4)}
    for (m, n), (coeff, target) in cases.items():
        vmax = 2 * (m + n - 1) + 2
        expansion = lie_bracket(
            necklace_operator(m), necklace_operator(n), vmax)
        assert expansion.exact, (m, n)
        expected = {necklace_operator(target).identity: ONE * coeff}
        assert expansion.combination == expected, (m, n)


def test_jacobi_identity_small_operators():
    ops = all_constraint_operators(3, 2)
    a, b, c = ops[0], ops[1], ops[3]
    z = partition_series(3, 6, include_dipole=True)
    basis = [CouplingSeries(3, 6, {m: ONE}) for m in list(z.terms)[:8]]
    for unit in basis:
        total = None
        for x, y, w in ((a, b, c), (b, c, a), (c, a, b)):
            part = commutator_action(x, y, w.apply(unit)) - \
                w.apply(commutator_action(x, y, unit))
            total = part if total is None else total + part
        assert total.is_zero()


def test_bracket_reports_non_closure():
    # an expansion family that cannot express the bracket must be reported,
    # not silently accepted
    expansion = lie_bracket(
        necklace_operator(2), necklace_operator(1), 8,
        candidates=[necklace_operator(3)])
    assert not expansion.exact
    assert expansion.residual_monomials
