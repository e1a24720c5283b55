from fractions import Fraction

import pytest

from coloredtensor.graphs import (
    GraphError,
    automorphism_count,
    canonical_form,
    decode_key,
    dipole,
    enumerate_graphs,
)
from coloredtensor.series import (
    CouplingSeries,
    NPolynomial,
    ONE,
    coupling_keys,
    exp_series,
    log_series,
    moment_polynomial,
    monomial,
    monomial_order,
    partition_series,
)
from coloredtensor.tensors import explicit_index_moment, gaussian_moment_bruteforce


# ---------------------------------------------------------------------------
# NPolynomial

def test_npolynomial_arithmetic():
    n3 = NPolynomial.n_power(3)
    p = n3 + 2 * NPolynomial.n_power(1) - 1
    assert p.evaluate(2) == 8 + 4 - 1
    assert (p * p).evaluate(3) == p.evaluate(3) ** 2
    assert p - p == NPolynomial()
    assert not (p - p)
    assert p.shifted(2).evaluate(2) == 4 * p.evaluate(2)


def test_npolynomial_json_roundtrip():
    p = NPolynomial({0: Fraction(1, 3), 4: Fraction(-2)})
    assert NPolynomial.from_json(p.to_json()) == p


def test_npolynomial_repr():
    assert repr(NPolynomial.n_power(3) + 1) == "N^3 + 1"


# ---------------------------------------------------------------------------
# Moment polynomials

def test_dipole_moment_polynomial(dipole3):
    assert moment_polynomial([dipole3]) == NPolynomial.n_power(3)


def test_two_dipole_moment_polynomial(dipole3):
    expected = NPolynomial.n_power(6) + NPolynomial.n_power(3)
    assert moment_polynomial([dipole3, dipole3]) == expected


def test_empty_moment_polynomial():
    assert moment_polynomial([]) == ONE


def test_moment_polynomial_evaluation_homomorphism():
    # Evaluating the symbolic moment at concrete N reproduces both oracles.
    for D in (2, 3):
        singles = [decode_key(k) for k in enumerate_graphs(D, 3)]
        multisets = [[g] for g in singles]
        small = [g for g in singles if g.p <= 2]
        multisets += [[a, b] for a in small for b in small if a.p + b.p <= 4]
        for graphs in multisets:
            poly = moment_polynomial(graphs)
            for n in (1, 2, 3):
                value = poly.evaluate(n)
                assert value == gaussian_moment_bruteforce(graphs, n)
            if sum(g.p for g in graphs) <= 3:
                for n in (1, 2):
                    assert poly.evaluate(n) == explicit_index_moment(graphs, n)


def test_moment_polynomial_with_loops(dipole3):
    assert moment_polynomial([dipole3.with_loops(2)]) == NPolynomial.n_power(5)


# ---------------------------------------------------------------------------
# Partition series

def test_partition_series_trivial_at_order_two():
    z = partition_series(3, 2)
    assert z == CouplingSeries.constant(3, 2, ONE)


def test_partition_series_unit_constant():
    z = partition_series(3, 4)
    assert z.coefficient(()) == ONE


def test_partition_series_linear_coefficients():
    z = partition_series(3, 4)
    for key in coupling_keys(3, 4):
        g = decode_key(key)
        expected = moment_polynomial([g]) * Fraction(1, automorphism_count(g))
        assert z.coefficient(((key, 1),)) == expected


def test_partition_series_with_dipole_variable():
    z = partition_series(3, 4, include_dipole=True)
    dip = canonical_form(dipole(3))
    assert z.coefficient(((dip, 1),)) == NPolynomial.n_power(3)
    # square term: <Tr^2> / (C^2 2!)
    expected = (NPolynomial.n_power(6) + NPolynomial.n_power(3)) * Fraction(1, 2)
    assert z.coefficient(((dip, 2),)) == expected


def test_derivative_of_partition_series():
    z = partition_series(3, 4)
    for key in coupling_keys(3, 4):
        g = decode_key(key)
        derivative = z.differentiate(key)
        expected = moment_polynomial([g]) * Fraction(1, automorphism_count(g))
        assert derivative.coefficient(()) == expected


def test_differentiate_basics():
    key = canonical_form(dipole(3))
    s = CouplingSeries(3, 6, {((key, 1),): ONE})
    assert s.differentiate(key).coefficient(()) == ONE
    s2 = CouplingSeries(3, 6, {((key, 2),): ONE})
    assert s2.differentiate(key).coefficient(((key, 1),)) == 2 * ONE


# ---------------------------------------------------------------------------
# log / exp

def test_log_of_unit_is_zero():
    z = CouplingSeries.constant(3, 4, ONE)
    assert log_series(z).is_zero()


def test_log_leading_term():
    key = canonical_form(decode_key(coupling_keys(3, 4)[0]))
    c = NPolynomial.n_power(2) + 3
    z = CouplingSeries(3, 4, {(): ONE, ((key, 1),): c})
    w = log_series(z)
    assert w.coefficient(((key, 1),)) == c


def test_log_requires_unit_constant():
    z = CouplingSeries.constant(3, 4, ONE * 2)
    with pytest.raises(GraphError):
        log_series(z)


def test_exp_log_roundtrip():
    for include in (False, True):
        z = partition_series(3, 6, include_dipole=include)
        w = log_series(z)
        assert exp_series(w) == z


def test_log_coefficients_are_cumulants():
    # The log keeps only connected data: its monomial coefficients are joint
    # cumulants of the trace invariants, checked by inclusion-exclusion.
    z = partition_series(3, 6, include_dipole=True)
    w = log_series(z)
    keys = coupling_keys(3, 6, include_dipole=True)
    for key in keys:
        g = decode_key(key)
        if 4 * g.p > 6:
            continue
        c = Fraction(1, automorphism_count(g))
        m1 = moment_polynomial([g])
        m2 = moment_polynomial([g, g])
        cumulant = (m2 - m1 * m1) * (c * c * Fraction(1, 2))
        assert w.coefficient(((key, 2),)) == cumulant
    dip = keys[0]
    g = decode_key(dip)
    assert g.p == 1
    # third cumulant of the Gaussian-weight invariant
    m1 = moment_polynomial([g])
    m2 = moment_polynomial([g, g])
    m3 = moment_polynomial([g, g, g])
    cumulant3 = (m3 - 3 * m2 * m1 + 2 * m1 * m1 * m1) * Fraction(1, 6)
    assert w.coefficient(((dip, 3),)) == cumulant3


def test_mixed_cumulant_by_inclusion_exclusion():
    z = partition_series(3, 6, include_dipole=True)
    w = log_series(z)
    keys = coupling_keys(3, 6, include_dipole=True)
    dip = keys[0]
    quartic = next(k for k in keys if decode_key(k).p == 2)
    a, b = decode_key(dip), decode_key(quartic)
    scale = Fraction(1, automorphism_count(a) * automorphism_count(b))
    cumulant = (moment_polynomial([a, b])
                - moment_polynomial([a]) * moment_polynomial([b])) * scale
    assert w.coefficient(monomial({dip: 1, quartic: 1})) == cumulant


# ---------------------------------------------------------------------------
# Series plumbing

def test_series_json_roundtrip():
    z = partition_series(3, 4)
    data = z.to_json()
    back = CouplingSeries.from_json(3, 4, data)
    assert back == z


def test_monomial_order_uses_vertex_count():
    key = coupling_keys(3, 4)[0]
    assert monomial_order(((key, 2),)) == 8


def test_truncation_drops_high_orders():
    key = coupling_keys(3, 4)[0]
    s = CouplingSeries(3, 4, {((key, 1),): ONE})
    assert (s * s).is_zero()
