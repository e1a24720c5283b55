"""Graph surgery: pair contraction, glue-then-contract, and edge cuts.

Contraction removes one white and one black vertex and reattaches the freed
half-edges color by color; edges shared by the removed pair close into
vertexless loops (worth a factor N each).  An edge cut severs up to D edges
of pairwise distinct colors and heals the wound with a fresh white/black
pair joined along the uncut colors.  Cutting and then contracting the fresh
pair restores the original graph with D-k loops; that round trip fixes the
rewiring orientation used here.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .graphs import ColoredGraph, GraphError, disjoint_union, invert


@dataclass(frozen=True)
class ContractionResult:
    graph: ColoredGraph
    new_loops: int


def contract(g: ColoredGraph, v: int, vbar: int) -> ContractionResult:
    """Contract white v with black vbar; returns the surviving graph.

    For each color c: if the pair shares the color-c edge it becomes a
    vertexless loop, otherwise the white neighbor of vbar is rewired to the
    black neighbor of v.  Loops accumulate on the result's loop count.
    """
    if not 0 <= v < g.p:
        raise GraphError(f"white vertex {v} out of range 0..{g.p - 1}")
    if not 0 <= vbar < g.p:
        raise GraphError(f"black vertex {vbar} out of range 0..{g.p - 1}")
    new_loops = 0
    rows = []
    for c in range(g.D):
        sc = list(g.sigma[c])
        if sc[v] == vbar:
            new_loops += 1
        else:
            w_in = invert(g.sigma[c])[vbar]
            sc[w_in] = sc[v]
        rows.append(sc)
    wkeep = [w for w in range(g.p) if w != v]
    bkeep = [b for b in range(g.p) if b != vbar]
    bmap = {b: i for i, b in enumerate(bkeep)}
    sigma = tuple(
        tuple(bmap[rows[c][w]] for w in wkeep) for c in range(g.D)
    )
    graph = ColoredGraph(g.D, g.p - 1, sigma, g.loop_count + new_loops)
    return ContractionResult(graph, new_loops)


def glue_and_contract(g0: ColoredGraph, vbar0: int, g: ColoredGraph, v: int) -> ColoredGraph:
    """Disjoint union g0 ⊔ g contracted at (vbar0 in g0, v in g).

    The two vertices sit in different pieces of the union, so no loops can
    appear and the result has g0.p + g.p - 1 white vertices.
    """
    if g0.D != g.D:
        raise GraphError(f"color counts differ: {g0.D} vs {g.D}")
    if not 0 <= vbar0 < g0.p:
        raise GraphError(f"black vertex {vbar0} out of range 0..{g0.p - 1}")
    if not 0 <= v < g.p:
        raise GraphError(f"white vertex {v} out of range 0..{g.p - 1}")
    union = disjoint_union(g0, g)
    result = contract(union, g0.p + v, vbar0)
    assert result.new_loops == 0
    return result.graph


def enumerate_cuts(g: ColoredGraph, k: int) -> list[tuple[tuple[int, int], ...]]:
    """All sets of k edges with pairwise distinct colors, in a fixed order.

    Edges are identified as (white vertex, color); a cut is returned as a
    tuple sorted by color.
    """
    if not 0 <= k <= g.D:
        raise GraphError(f"cut size must be in 0..{g.D}, got {k}")
    cuts = []
    for colors in combinations(range(g.D), k):
        for whites in product(range(g.p), repeat=k):
            cuts.append(tuple((w, c) for w, c in zip(whites, colors)))
    return cuts


def edge_cut(g: ColoredGraph, edges) -> ColoredGraph:
    """Cut the given edges (distinct colors) and close with a new vertex pair.

    The new white w' and black b' take index p in the enlarged graph.  Each
    cut edge (w, c) is rewired as w -> b' and w' -> old target; every uncut
    color joins w' directly to b'.  With k = 0 this is the disjoint union
    with a dipole.
    """
    edges = tuple(edges)
    colors = [c for _, c in edges]
    if len(set(colors)) != len(colors):
        raise GraphError("cut edges must have pairwise distinct colors")
    cut_by_color = {}
    for w, c in edges:
        if not 0 <= c < g.D:
            raise GraphError(f"color {c} out of range 0..{g.D - 1}")
        if not 0 <= w < g.p:
            raise GraphError(f"white vertex {w} out of range 0..{g.p - 1}")
        cut_by_color[c] = w
    new = g.p  # index of both w' and b'
    rows = []
    for c in range(g.D):
        row = list(g.sigma[c]) + [0]
        if c in cut_by_color:
            w = cut_by_color[c]
            row[new] = row[w]
            row[w] = new
        else:
            row[new] = new
        rows.append(tuple(row))
    return ColoredGraph(g.D, g.p + 1, tuple(rows), g.loop_count)
