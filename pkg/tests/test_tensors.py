import random
from fractions import Fraction
from itertools import permutations

import pytest

from coloredtensor.graphs import (
    decode_key,
    dipole,
    disjoint_union,
    empty_graph,
    enumerate_graphs,
    invert,
    new_graph,
    random_graph,
)
from coloredtensor.tensors import (
    DenseTensor,
    explicit_index_moment,
    gaussian_moment_bruteforce,
    sd_constraint_terms,
    sd_residual_numeric,
    trace_invariant,
)


def random_tensor(N, D, rng):
    return DenseTensor.from_function(N, D, lambda idx: rng.randint(-2, 2))


# ---------------------------------------------------------------------------
# Trace invariants

def test_dipole_all_ones(dipole3):
    ones = DenseTensor.filled(2, 3, 1)
    assert trace_invariant(dipole3, ones, ones) == 8


def test_sextic_all_ones(sextic_graph):
    ones = DenseTensor.filled(2, 3, 1)
    assert trace_invariant(sextic_graph, ones, ones) == 512


def test_zero_tensor(sextic_graph):
    zero = DenseTensor.zeros(2, 3)
    ones = DenseTensor.filled(2, 3, 1)
    assert trace_invariant(sextic_graph, zero, ones) == 0


def test_sextic_matches_direct_index_loop(sextic_graph):
    # Re-derive the sextic invariant straight from its index pattern.
    rng = random.Random(23)
    N = 2
    M = random_tensor(N, 3, rng)
    Mbar = random_tensor(N, 3, rng)
    direct = 0
    for i1 in range(N):
        for i2 in range(N):
            for i3 in range(N):
                for j1 in range(N):
                    for j2 in range(N):
                        for j3 in range(N):
                            for k1 in range(N):
                                for k2 in range(N):
                                    for k3 in range(N):
                                        direct += (
                                            Mbar[(i1, i2, i3)] * Mbar[(j1, j2, j3)]
                                            * Mbar[(k1, k2, k3)] * M[(i1, k2, j3)]
                                            * M[(j1, i2, k3)] * M[(k1, j2, i3)]
                                        )
    assert trace_invariant(sextic_graph, M, Mbar) == direct


def test_multilinearity(sextic_graph):
    rng = random.Random(29)
    M = random_tensor(2, 3, rng)
    Mbar = random_tensor(2, 3, rng)
    base = trace_invariant(sextic_graph, M, Mbar)
    s = Fraction(3, 2)
    assert trace_invariant(sextic_graph, M.scaled(s), Mbar) == s**3 * base


def test_disjoint_union_multiplies(dipole3, sextic_graph):
    rng = random.Random(31)
    M = random_tensor(2, 3, rng)
    Mbar = random_tensor(2, 3, rng)
    union = disjoint_union(dipole3, sextic_graph).with_loops(2)
    assert trace_invariant(union, M, Mbar) == (
        4 * trace_invariant(dipole3, M, Mbar)
        * trace_invariant(sextic_graph, M, Mbar))


def test_rank_mismatch(dipole3):
    with pytest.raises(Exception):
        trace_invariant(dipole3, DenseTensor.filled(2, 2, 1), DenseTensor.filled(2, 3, 1))


# ---------------------------------------------------------------------------
# Brute-force moments

def test_dipole_moment(dipole3):
    for N in (1, 2, 3):
        assert gaussian_moment_bruteforce([dipole3], N) == N**3


def test_two_dipole_moment(dipole3):
    for N in (1, 2, 3):
        assert gaussian_moment_bruteforce([dipole3, dipole3], N) == N**6 + N**3
    assert explicit_index_moment([dipole3, dipole3], 2) == 72


def test_empty_moment():
    assert gaussian_moment_bruteforce([], 5) == 1
    assert explicit_index_moment([], 5) == 1


def test_loops_scale_moment(dipole3):
    g = dipole3.with_loops(2)
    assert gaussian_moment_bruteforce([g], 3) == 3**3 * 3**2


def test_moment_at_n1_counts_pairings():
    rng = random.Random(37)
    for _ in range(10):
        graphs = [random_graph(3, rng.randint(1, 2), rng)
                  for _ in range(rng.randint(1, 2))]
        P = sum(g.p for g in graphs)
        fact = 1
        for j in range(2, P + 1):
            fact *= j
        assert gaussian_moment_bruteforce(graphs, 1) == fact


def test_face_count_orientation_free():
    # Faces via white->black pairings must match the black->white convention.
    rng = random.Random(41)
    for _ in range(10):
        g = random_graph(3, 3, rng)
        N = 2
        total = 0
        for phi in permutations(range(g.p)):  # phi[w] = paired black
            faces = 0
            for c in range(g.D):
                perm = [phi[invert(g.sigma[c])[b]] for b in range(g.p)]
                seen = [False] * g.p
                for start in range(g.p):
                    if seen[start]:
                        continue
                    faces += 1
                    x = start
                    while not seen[x]:
                        seen[x] = True
                        x = perm[x]
            total += N**faces
        assert total == gaussian_moment_bruteforce([g], N)


def test_bruteforce_agrees_with_explicit_index():
    for D in (1, 2, 3):
        singles = [decode_key(k) for k in enumerate_graphs(D, 3)]
        multisets = [[g] for g in singles]
        pairs = [g for g in singles if g.p <= 2]
        multisets += [[a, b] for a in pairs for b in pairs if a.p + b.p <= 3]
        for graphs in multisets:
            for N in (1, 2):
                assert gaussian_moment_bruteforce(graphs, N) == \
                    explicit_index_moment(graphs, N)


# ---------------------------------------------------------------------------
# Change-of-variables residual oracle

def test_dipole_jacobian_is_translation_trace(dipole3):
    for N in (1, 2, 3):
        jacobian, variation, weight = sd_constraint_terms(dipole3, 0, [], N)
        assert jacobian == N**3
        assert variation == 0
        assert weight == N**3
        assert jacobian + variation - weight == 0


def test_dipole_with_dipole_insertion(dipole3):
    assert sd_residual_numeric(dipole3, 0, [dipole3], 2) == 0


def test_sextic_residual_at_n1(sextic_graph):
    for vbar in range(3):
        assert sd_residual_numeric(sextic_graph, vbar, [], 1) == 0


def test_residual_vanishes_on_small_instances():
    quartics = [decode_key(k) for k in enumerate_graphs(3, 2, connected_only=True)
                if decode_key(k).p == 2]
    d = dipole(3)
    for N in (1, 2):
        for g in quartics:
            for vbar in range(g.p):
                assert sd_residual_numeric(g, vbar, [], N) == 0
        assert sd_residual_numeric(d, 0, [quartics[0]], N) == 0
        assert sd_residual_numeric(quartics[1], 1, [d], N) == 0


def test_residual_matrix_model():
    from conftest import necklace
    for N in (1, 2, 3):
        assert sd_residual_numeric(necklace(2), 0, [], N) == 0
        assert sd_residual_numeric(necklace(2), 1, [necklace(1)], N) == 0
