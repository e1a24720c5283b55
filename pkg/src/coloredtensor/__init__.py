"""Exact combinatorics of colored tensor models.

Closed bipartite D-colored graphs, their trace invariants and Gaussian
moments, graph contraction and edge cuts, the constraint operators they
generate, a Connes-Kreimer-style Hopf algebra of marked graphs, and a
Wilsonian-style flow on effective couplings.  All verification paths use
exact integer/rational arithmetic.
"""

__version__ = "0.1.0"

from .graphs import (
    ColoredGraph,
    GraphError,
    automorphism_count,
    canonical_form,
    canonical_graph,
    connected_components,
    decode_key,
    dipole,
    disjoint_union,
    empty_graph,
    enumerate_graphs,
    graph_from_json,
    graph_to_json,
    is_connected,
    key_hex,
    new_graph,
)
from .surgery import ContractionResult, contract, edge_cut, enumerate_cuts, glue_and_contract
from .tensors import (
    DenseTensor,
    explicit_index_moment,
    gaussian_moment_bruteforce,
    sd_constraint_terms,
    sd_residual_numeric,
    trace_invariant,
)
from .series import (
    CouplingSeries,
    NPolynomial,
    differentiate,
    exp_series,
    log_series,
    moment_polynomial,
    partition_series,
)
