"""Data model for spanning subgraphs of the blow-up of the cycle C_k.

A graph here always has k >= 3 parts V_1, ..., V_k with n vertices each,
and edges only between consecutive parts V_i, V_{i+1} (cyclically).  The
central objects are transversal C_k-cycles (one vertex per part, joined
cyclically) and tilings by vertex-disjoint transversal cycles; a tiling of
size n is a transversal C_k-factor.

Conventions, used consistently across the package:

* parts are 1-indexed, vertex indices inside a part are 0-based;
* adjacency is stored as k dense boolean matrices, one per consecutive
  pair, so that the hot loops (cycle enumeration, degree counting) are
  row intersections / row sums of boolean arrays;
* a transversal cycle is a plain tuple of k indices whose position p
  (0-based) is the vertex index in part p+1;
* graphs are immutable once built.  Search code that deletes vertices
  does so with explicit alive masks, never by rebuilding graphs.
"""

from __future__ import annotations

import json
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

JSON_FORMAT = "ckblowup/1"

Cycle = tuple  # tuple of k vertex indices, position p <-> part p+1


class PreconditionError(ValueError):
    """A documented operation precondition does not hold."""


class VertexRef(NamedTuple):
    part: int  # 1-based
    index: int  # 0-based


class DegreeProfile(NamedTuple):
    deltas: tuple  # delta_i = min degree of the bipartite pair (V_i, V_{i+1})
    delta_star: int  # min over i of delta_i


def part_after(k: int, i: int) -> int:
    """Cyclic successor of part i (1-indexed)."""
    return i % k + 1


def part_before(k: int, i: int) -> int:
    """Cyclic predecessor of part i (1-indexed)."""
    return (i - 2) % k + 1


class BlowupGraph:
    """Immutable spanning subgraph of C_k[n].

    ``pair_matrix(i)[u, w]`` is True iff vertex u of V_i is adjacent to
    vertex w of V_{i+1}.
    """

    __slots__ = ("k", "n", "_adj")

    def __init__(self, k: int, n: int, adjacency: Sequence[np.ndarray]):
        if k < 3:
            raise PreconditionError(f"k must be >= 3, got {k}")
        if n < 1:
            raise PreconditionError(f"n must be >= 1, got {n}")
        if len(adjacency) != k:
            raise PreconditionError(f"need {k} pair matrices, got {len(adjacency)}")
        mats = []
        for m in adjacency:
            a = np.array(m, dtype=bool, copy=True)
            if a.shape != (n, n):
                raise PreconditionError(f"pair matrix has shape {a.shape}, expected {(n, n)}")
            a.setflags(write=False)
            mats.append(a)
        self.k = k
        self.n = n
        self._adj = tuple(mats)

    def pair_matrix(self, i: int) -> np.ndarray:
        """Adjacency of the pair (V_i, V_{i+1}), rows indexed by V_i."""
        self._check_part(i)
        return self._adj[i - 1]

    def _check_part(self, i: int) -> None:
        if not 1 <= i <= self.k:
            raise PreconditionError(f"part {i} out of range 1..{self.k}")

    def _check_vertex(self, v: VertexRef) -> None:
        self._check_part(v.part)
        if not 0 <= v.index < self.n:
            raise PreconditionError(f"vertex index {v.index} out of range 0..{self.n - 1}")

    def has_edge(self, u: VertexRef, w: VertexRef) -> bool:
        self._check_vertex(u)
        self._check_vertex(w)
        if w.part == part_after(self.k, u.part):
            return bool(self._adj[u.part - 1][u.index, w.index])
        if u.part == part_after(self.k, w.part):
            return bool(self._adj[w.part - 1][w.index, u.index])
        return False

    def neighbor_mask(self, v: VertexRef, j: int) -> np.ndarray:
        """Boolean mask over V_j of neighbours of v; j must be a part
        consecutive to v's part."""
        self._check_vertex(v)
        self._check_part(j)
        if j == part_after(self.k, v.part):
            return self._adj[v.part - 1][v.index, :]
        if j == part_before(self.k, v.part):
            return self._adj[j - 1][:, v.index]
        raise PreconditionError(f"parts {v.part} and {j} are not consecutive")

    def edges(self) -> Iterator[tuple]:
        """All edges as (i, u, w) with u in V_i, w in V_{i+1}, sorted."""
        for i in range(1, self.k + 1):
            rows, cols = np.nonzero(self._adj[i - 1])
            for u, w in zip(rows.tolist(), cols.tolist()):
                yield (i, u, w)

    def edge_count(self) -> int:
        return sum(int(m.sum()) for m in self._adj)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BlowupGraph):
            return NotImplemented
        return (
            self.k == other.k
            and self.n == other.n
            and all(np.array_equal(a, b) for a, b in zip(self._adj, other._adj))
        )

    def __hash__(self):
        raise TypeError("BlowupGraph is not hashable")

    def __repr__(self) -> str:
        return f"BlowupGraph(k={self.k}, n={self.n}, edges={self.edge_count()})"


def build_graph(k: int, n: int, edges: Iterable[tuple]) -> BlowupGraph:
    """Build a graph from (i, u, w) triples, u in V_i adjacent to w in V_{i+1}.

    Duplicate edges collapse silently; out-of-range parts or indices raise.
    """
    if k < 3:
        raise PreconditionError(f"k must be >= 3, got {k}")
    mats = [np.zeros((n, n), dtype=bool) for _ in range(k)]
    for i, u, w in edges:
        if not 1 <= i <= k:
            raise PreconditionError(f"edge part {i} out of range 1..{k}")
        if not (0 <= u < n and 0 <= w < n):
            raise PreconditionError(f"edge ({i},{u},{w}) has index out of range 0..{n - 1}")
        mats[i - 1][u, w] = True
    return BlowupGraph(k, n, mats)


def degree(G: BlowupGraph, v: VertexRef, j: int) -> int:
    """Number of neighbours of v in part j (j consecutive to v's part)."""
    return int(G.neighbor_mask(v, j).sum())


def common_neighborhood(G: BlowupGraph, S: Iterable[VertexRef], j: int):
    """Vertices of V_j adjacent to every vertex of S.

    Every element of S must lie in a part consecutive to j.  An empty S
    returns all of V_j (the empty intersection convention).
    """
    G._check_part(j)
    mask = np.ones(G.n, dtype=bool)
    for v in S:
        mask = mask & G.neighbor_mask(v, j)
    return {VertexRef(j, int(i)) for i in np.flatnonzero(mask)}


def degree_profile(G: BlowupGraph) -> DegreeProfile:
    """Exact bipartite minimum degrees delta_1..delta_k and their minimum.

    delta_i is the minimum, over both sides, of the degree within the pair
    (V_i, V_{i+1}); delta_star is min_i delta_i.
    """
    deltas = []
    for i in range(1, G.k + 1):
        m = G.pair_matrix(i)
        row_min = int(m.sum(axis=1).min())
        col_min = int(m.sum(axis=0).min())
        deltas.append(min(row_min, col_min))
    return DegreeProfile(tuple(deltas), min(deltas))


def validate_cycle(G: BlowupGraph, cycle: Sequence[int]) -> Optional[str]:
    """None if cycle is a transversal C_k-cycle of G, else the first violation."""
    if len(cycle) != G.k:
        return f"cycle {tuple(cycle)} has length {len(cycle)}, expected k={G.k}"
    for p, idx in enumerate(cycle):
        if not 0 <= idx < G.n:
            return f"cycle {tuple(cycle)} has out-of-range index {idx} in part {p + 1}"
    for p in range(G.k):
        q = (p + 1) % G.k
        if not G.pair_matrix(p + 1)[cycle[p], cycle[q]]:
            return (
                f"cycle {tuple(cycle)} misses edge between part {p + 1} vertex "
                f"{cycle[p]} and part {q + 1} vertex {cycle[q]}"
            )
    return None


def validate_tiling(G: BlowupGraph, cycles: Sequence[Sequence[int]]) -> Optional[str]:
    """None if cycles form a transversal C_k-tiling of G, else the first violation.

    Checks, in order: every member is a transversal cycle of G; the cycles
    are pairwise vertex-disjoint.
    """
    for c in cycles:
        msg = validate_cycle(G, c)
        if msg is not None:
            return msg
    seen = [set() for _ in range(G.k)]
    for c in cycles:
        for p, idx in enumerate(c):
            if idx in seen[p]:
                return f"vertex {idx} of part {p + 1} is used by two cycles"
            seen[p].add(idx)
    return None


def uncovered(G: BlowupGraph, cycles: Sequence[Sequence[int]]) -> dict:
    """Per-part sets of vertex indices not covered by the tiling.

    The tiling must be valid; an invalid tiling raises PreconditionError.
    """
    msg = validate_tiling(G, cycles)
    if msg is not None:
        raise PreconditionError(f"invalid tiling: {msg}")
    out = {}
    for p in range(G.k):
        used = {c[p] for c in cycles}
        out[p + 1] = set(range(G.n)) - used
    return out


# ---------------------------------------------------------------------------
# serialization


def graph_to_json_dict(G: BlowupGraph) -> dict:
    return {
        "format": JSON_FORMAT,
        "k": G.k,
        "n": G.n,
        "edges": [[i, u, w] for (i, u, w) in G.edges()],
    }


def graph_to_json(G: BlowupGraph) -> str:
    """Canonical JSON text; loading and re-emitting is byte-identical."""
    return json.dumps(graph_to_json_dict(G), sort_keys=True, separators=(",", ":")) + "\n"


def graph_from_json_dict(obj: dict) -> BlowupGraph:
    if not isinstance(obj, dict):
        raise PreconditionError("graph JSON must be an object")
    fmt = obj.get("format")
    if fmt != JSON_FORMAT:
        raise PreconditionError(f"unsupported format {fmt!r}, expected {JSON_FORMAT!r}")
    for key in ("k", "n", "edges"):
        if key not in obj:
            raise PreconditionError(f"graph JSON missing key {key!r}")
    return build_graph(int(obj["k"]), int(obj["n"]), [tuple(e) for e in obj["edges"]])


def graph_from_json(text: str) -> BlowupGraph:
    return graph_from_json_dict(json.loads(text))


def graph_to_dot(G: BlowupGraph, blocks: Optional[dict] = None) -> str:
    """Graphviz text with one ranked cluster per part.

    ``blocks`` (optional) maps block names like "U_1" to index lists inside
    the named part and is rendered as node labels.
    """
    label = {}
    if blocks:
        for name, ids in blocks.items():
            part = int(name.rsplit("_", 1)[1])
            for idx in ids:
                label[(part, idx)] = name
    lines = ["graph ckblowup {"]
    for p in range(1, G.k + 1):
        lines.append(f"  subgraph cluster_{p} {{")
        lines.append(f'    label="V_{p}"; rank=same;')
        for idx in range(G.n):
            extra = f' [label="{label[(p, idx)]}:{idx}"]' if (p, idx) in label else ""
            lines.append(f"    p{p}_{idx}{extra};")
        lines.append("  }")
    for i, u, w in G.edges():
        j = part_after(G.k, i)
        lines.append(f"  p{i}_{u} -- p{j}_{w};")
    lines.append("}")
    return "\n".join(lines) + "\n"
