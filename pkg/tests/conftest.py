import pytest

from coloredtensor.graphs import ColoredGraph, new_graph


@pytest.fixture
def dipole3() -> ColoredGraph:
    return new_graph(3, 1, [[1], [1], [1]])


@pytest.fixture
def sextic_graph() -> ColoredGraph:
    """The 6-vertex D=3 graph whose invariant contracts three index triples cyclically."""
    return new_graph(3, 3, [[1, 2, 3], [3, 1, 2], [2, 3, 1]])


def necklace(p: int) -> ColoredGraph:
    """Closed D=2 chain with p white vertices: identity plus a cyclic shift."""
    shift = tuple((w + 1) % p for w in range(p))
    return ColoredGraph(2, p, (tuple(range(p)), shift))
