"""Bipartite D-colored closed graphs encoded as permutation tuples.

A graph has p white and p black vertices.  For each color c the edge set of
that color is a perfect matching between whites and blacks, stored as a
permutation ``sigma[c]`` with ``sigma[c][w]`` the black vertex joined to
white ``w``.  Proper coloring and bipartiteness are therefore structural.
Vertexless loops (closed edges produced by contraction) are carried as an
integer count, never as edges.

Vertex indices are 0-based throughout the library; the JSON wire format is
1-based.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

# Engineering caps: canonicalization is an exact search over vertex
# relabelings, enumeration scans all permutation tuples.
MAX_CANONICAL_P = 8
MAX_ENUMERATE_P = 5

KEY_MAGIC = 0x54  # leading byte of every canonical key ("T")


class GraphError(ValueError):
    """Raised for malformed graphs or out-of-range vertices."""


def compose(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    """Permutation product a∘b, i.e. (a∘b)(x) = a(b(x))."""
    return tuple(a[x] for x in b)


def invert(a: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(a)
    for i, x in enumerate(a):
        inv[x] = i
    return tuple(inv)


def cycle_count(a: tuple[int, ...]) -> int:
    seen = [False] * len(a)
    count = 0
    for start in range(len(a)):
        if seen[start]:
            continue
        count += 1
        x = start
        while not seen[x]:
            seen[x] = True
            x = a[x]
    return count


@dataclass(frozen=True)
class ColoredGraph:
    """Immutable bipartite D-colored graph (possibly with vertexless loops)."""

    D: int
    p: int
    sigma: tuple[tuple[int, ...], ...]
    loop_count: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "sigma", tuple(tuple(row) for row in self.sigma))
        if self.D < 1:
            raise GraphError(f"color count must be >= 1, got {self.D}")
        if self.p < 0:
            raise GraphError(f"vertex count must be >= 0, got {self.p}")
        if self.loop_count < 0:
            raise GraphError("loop count must be >= 0")
        if len(self.sigma) != self.D:
            raise GraphError(
                f"expected {self.D} color maps, got {len(self.sigma)}")
        for c, row in enumerate(self.sigma):
            if len(row) != self.p:
                raise GraphError(
                    f"color {c + 1}: expected {self.p} entries, got {len(row)}")
            for value in row:
                if not 0 <= value < self.p:
                    raise GraphError(
                        f"color {c + 1}: image {value + 1} out of range 1..{self.p}")
            if len(set(row)) != self.p:
                raise GraphError(f"color {c + 1}: map is not a bijection")

    @property
    def is_empty(self) -> bool:
        return self.p == 0 and self.loop_count == 0

    def with_loops(self, loops: int) -> "ColoredGraph":
        return ColoredGraph(self.D, self.p, self.sigma, loops)

    def neighbors_of_white(self, w: int) -> tuple[int, ...]:
        return tuple(self.sigma[c][w] for c in range(self.D))

    def neighbors_of_black(self, b: int) -> tuple[int, ...]:
        return tuple(invert(self.sigma[c])[b] for c in range(self.D))


def new_graph(D: int, p: int, sigma, loops: int = 0) -> ColoredGraph:
    """Build a validated graph from 1-based one-line notation.

    ``sigma`` is a list of D rows, row c listing sigma[c](w) for
    w = 1..p with values in 1..p (the JSON wire convention).
    """
    if len(sigma) != D:
        raise GraphError(f"expected {D} color maps, got {len(sigma)}")
    rows = []
    for c, row in enumerate(sigma):
        if len(row) != p:
            raise GraphError(
                f"color {c + 1}: expected {p} entries, got {len(row)}")
        for value in row:
            if not 1 <= value <= p:
                raise GraphError(
                    f"color {c + 1}: image {value} out of range 1..{p}")
        rows.append(tuple(v - 1 for v in row))
    return ColoredGraph(D, p, tuple(rows), loops)


def empty_graph(D: int, loops: int = 0) -> ColoredGraph:
    return ColoredGraph(D, 0, tuple(() for _ in range(D)), loops)


def dipole(D: int) -> ColoredGraph:
    """The unique two-vertex graph; its invariant defines the Gaussian weight."""
    return ColoredGraph(D, 1, tuple(((0,),) * D))


def relabel(g: ColoredGraph, pi: tuple[int, ...], tau: tuple[int, ...]) -> ColoredGraph:
    """Apply white relabeling pi and black relabeling tau: sigma -> tau∘sigma∘pi⁻¹."""
    ipi = invert(pi)
    rows = tuple(compose(tau, compose(sc, ipi)) for sc in g.sigma)
    return ColoredGraph(g.D, g.p, rows, g.loop_count)


def disjoint_union(a: ColoredGraph, b: ColoredGraph) -> ColoredGraph:
    if a.D != b.D:
        raise GraphError(f"color counts differ: {a.D} vs {b.D}")
    rows = tuple(
        tuple(a.sigma[c]) + tuple(x + a.p for x in b.sigma[c])
        for c in range(a.D)
    )
    return ColoredGraph(a.D, a.p + b.p, rows, a.loop_count + b.loop_count)


# ---------------------------------------------------------------------------
# Canonical form

def _encode(D: int, p: int, rows: tuple[tuple[int, ...], ...]) -> bytes:
    out = bytearray((KEY_MAGIC, D, p))
    for row in rows:
        out.extend(row)
    return bytes(out)


@lru_cache(maxsize=None)
def canonical_form(g: ColoredGraph) -> bytes:
    """Canonical key of the isomorphism class of g (loop count excluded).

    Two graphs get equal keys iff some pair of vertex relabelings (pi on
    whites, tau on blacks) maps one onto the other.  The key is the
    lexicographic minimum of the concatenated one-line rows over all
    relabelings.  Because tau is free, the minimum always has the color-1
    row equal to the identity, so the search only ranges over pi with tau
    forced to pi∘sigma[0]⁻¹; this equals the full exhaustive minimum.
    """
    if g.p > MAX_CANONICAL_P:
        raise GraphError(
            f"canonicalization supports p <= {MAX_CANONICAL_P}, got {g.p}")
    p = g.p
    if p == 0:
        return _encode(g.D, 0, ())
    identity = tuple(range(p))
    inv0 = invert(g.sigma[0])
    best = None
    for pi in permutations(range(p)):
        tau = compose(pi, inv0)
        ipi = invert(pi)
        tail = tuple(compose(tau, compose(sc, ipi)) for sc in g.sigma[1:])
        if best is None or tail < best:
            best = tail
    return _encode(g.D, p, (identity,) + best)


def canonical_form_with_maps(g: ColoredGraph):
    """Canonical key plus one relabeling pair (pi, tau) achieving it.

    Distinct minimizing pairs differ by an automorphism of the canonical
    graph, so anything defined up to vertex orbits is independent of the
    pair returned.
    """
    if g.p > MAX_CANONICAL_P:
        raise GraphError(
            f"canonicalization supports p <= {MAX_CANONICAL_P}, got {g.p}")
    p = g.p
    if p == 0:
        return _encode(g.D, 0, ()), (), ()
    identity = tuple(range(p))
    inv0 = invert(g.sigma[0])
    best = None
    best_maps = None
    for pi in permutations(range(p)):
        tau = compose(pi, inv0)
        ipi = invert(pi)
        tail = tuple(compose(tau, compose(sc, ipi)) for sc in g.sigma[1:])
        if best is None or tail < best:
            best = tail
            best_maps = (pi, tau)
    return _encode(g.D, p, (identity,) + best), best_maps[0], best_maps[1]


def decode_key(key: bytes) -> ColoredGraph:
    """Reconstruct the canonical representative encoded in a key."""
    if len(key) < 3 or key[0] != KEY_MAGIC:
        raise GraphError("not a canonical graph key")
    D, p = key[1], key[2]
    if len(key) != 3 + D * p:
        raise GraphError("truncated graph key")
    rows = tuple(
        tuple(key[3 + c * p: 3 + (c + 1) * p]) for c in range(D)
    )
    return ColoredGraph(D, p, rows)


def canonical_graph(g: ColoredGraph) -> ColoredGraph:
    return decode_key(canonical_form(g)).with_loops(g.loop_count)


def key_hex(key: bytes) -> str:
    return key.hex()


def key_from_hex(text: str) -> bytes:
    key = bytes.fromhex(text)
    decode_key(key)
    return key


def key_p(key: bytes) -> int:
    """Number of white vertices of the class encoded by key."""
    return key[2]


def key_vertex_count(key: bytes) -> int:
    return 2 * key[2]


# ---------------------------------------------------------------------------
# Automorphisms

def automorphisms(g: ColoredGraph):
    """Yield all pairs (pi, tau) with tau∘sigma[c]∘pi⁻¹ = sigma[c] for all c.

    tau is forced by the color-1 row, so the search is over pi only.
    """
    p = g.p
    if p == 0:
        yield ((), ())
        return
    inv0 = invert(g.sigma[0])
    for pi in permutations(range(p)):
        tau = compose(g.sigma[0], compose(pi, inv0))
        ok = True
        for sc in g.sigma[1:]:
            for w in range(p):
                if tau[sc[w]] != sc[pi[w]]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            yield (pi, tau)


@lru_cache(maxsize=None)
def automorphism_count(g: ColoredGraph) -> int:
    return sum(1 for _ in automorphisms(g))


@lru_cache(maxsize=None)
def black_vertex_orbits(g: ColoredGraph) -> tuple[tuple[int, ...], ...]:
    """Orbits of black vertices under the automorphism group, sorted."""
    autos = list(automorphisms(g))
    seen = set()
    orbits = []
    for b in range(g.p):
        if b in seen:
            continue
        orbit = sorted({tau[b] for _, tau in autos})
        seen.update(orbit)
        orbits.append(tuple(orbit))
    return tuple(orbits)


@lru_cache(maxsize=None)
def white_vertex_orbits(g: ColoredGraph) -> tuple[tuple[int, ...], ...]:
    autos = list(automorphisms(g))
    seen = set()
    orbits = []
    for w in range(g.p):
        if w in seen:
            continue
        orbit = sorted({pi[w] for pi, _ in autos})
        seen.update(orbit)
        orbits.append(tuple(orbit))
    return tuple(orbits)


# ---------------------------------------------------------------------------
# Connectivity

def _component_vertex_sets(g: ColoredGraph) -> list[tuple[list[int], list[int]]]:
    """Partition vertices of the underlying multigraph; whites/blacks sorted."""
    parent = list(range(2 * g.p))  # whites 0..p-1, blacks p..2p-1

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in range(g.D):
        for w in range(g.p):
            a, b = find(w), find(g.p + g.sigma[c][w])
            if a != b:
                parent[a] = b
    groups: dict[int, tuple[list[int], list[int]]] = {}
    for w in range(g.p):
        groups.setdefault(find(w), ([], []))[0].append(w)
    for b in range(g.p):
        groups.setdefault(find(g.p + b), ([], []))[1].append(b)
    return sorted(groups.values())


def connected_components(g: ColoredGraph) -> tuple[list[ColoredGraph], int]:
    """Split g into connected pieces, each re-indexed to its own graph.

    Returns (components, loops): vertexless loops are reported as the
    separate count, never attached to a component.  Components are sorted
    by (vertex count, canonical key) so the output is deterministic.
    """
    pieces = []
    for whites, blacks in _component_vertex_sets(g):
        wmap = {w: i for i, w in enumerate(whites)}
        bmap = {b: i for i, b in enumerate(blacks)}
        rows = tuple(
            tuple(bmap[g.sigma[c][w]] for w in whites) for c in range(g.D)
        )
        pieces.append(ColoredGraph(g.D, len(whites), rows))
    pieces.sort(key=lambda comp: (comp.p, canonical_form(comp)))
    return pieces, g.loop_count


def is_connected(g: ColoredGraph) -> bool:
    """True for graphs in one piece (the empty graph counts as connected)."""
    if g.p == 0:
        return g.loop_count == 0
    return len(_component_vertex_sets(g)) == 1 and g.loop_count == 0


def component_key_multiset(g: ColoredGraph) -> tuple[bytes, ...]:
    """Sorted canonical keys of the connected components."""
    pieces, _ = connected_components(g)
    return tuple(sorted(canonical_form(piece) for piece in pieces))


# ---------------------------------------------------------------------------
# Enumeration

@lru_cache(maxsize=None)
def enumerate_graphs(D: int, p_max: int, connected_only: bool = False) -> tuple[bytes, ...]:
    """All isomorphism classes with 1 <= p <= p_max, sorted by (p, key).

    Every class has a representative with identity color-1 row, so the scan
    ranges over the remaining D-1 rows only and dedups by canonical key.
    """
    if D < 1:
        raise GraphError(f"color count must be >= 1, got {D}")
    if not 1 <= p_max <= MAX_ENUMERATE_P:
        raise GraphError(
            f"enumeration supports 1 <= p_max <= {MAX_ENUMERATE_P}, got {p_max}")
    keys: set[bytes] = set()
    for p in range(1, p_max + 1):
        identity = tuple(range(p))
        perms = list(permutations(range(p)))
        stack = [(identity,)]
        for _ in range(D - 1):
            stack = [rows + (extra,) for rows in stack for extra in perms]
        for rows in stack:
            g = ColoredGraph(D, p, rows)
            if connected_only and not is_connected(g):
                continue
            keys.add(canonical_form(g))
    return tuple(sorted(keys, key=lambda k: (key_p(k), k)))


def random_graph(D: int, p: int, rng: random.Random) -> ColoredGraph:
    rows = []
    for _ in range(D):
        row = list(range(p))
        rng.shuffle(row)
        rows.append(tuple(row))
    return ColoredGraph(D, p, tuple(rows))


# ---------------------------------------------------------------------------
# JSON wire format (1-based vertex indices)

def graph_to_json(g: ColoredGraph) -> dict:
    return {
        "D": g.D,
        "p": g.p,
        "sigma": [[v + 1 for v in row] for row in g.sigma],
        "loops": g.loop_count,
    }


def graph_from_json(obj) -> ColoredGraph:
    if not isinstance(obj, dict):
        raise GraphError("graph object must be a JSON mapping")
    try:
        D = int(obj["D"])
        p = int(obj["p"])
        sigma = obj["sigma"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"bad graph object: {exc}") from exc
    loops = int(obj.get("loops", 0))
    return new_graph(D, p, sigma, loops)
