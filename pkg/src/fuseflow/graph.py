"""Undirected weighted variable-adjacency graphs.

Nodes index regression variables; an edge (i, j, w) marks a pair whose
coefficient difference is penalized with weight w. Edges are canonical:
stored once with i < j, sorted lexicographically, strictly positive
weights (zero-weight edges are dropped at construction).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Graph:
    num_nodes: int
    edge_i: np.ndarray  # int32, edge lower endpoints, i < j
    edge_j: np.ndarray  # int32, edge upper endpoints
    weight: np.ndarray  # float64, > 0

    def __post_init__(self):
        for arr in (self.edge_i, self.edge_j, self.weight):
            arr.flags.writeable = False

    @property
    def num_edges(self) -> int:
        return int(self.edge_i.size)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return list(
            zip(self.edge_i.tolist(), self.edge_j.tolist(), self.weight.tolist())
        )

    @classmethod
    def from_edges(cls, num_nodes: int, edges) -> "Graph":
        """Build a canonical graph from (i, j, w) triples.

        Endpoints are reordered to i < j, zero-weight edges dropped, and
        the edge list sorted. Raises ValueError on invalid input.
        """
        if num_nodes < 0:
            raise ValueError("num_nodes must be nonnegative")
        triples = [(int(i), int(j), float(w)) for i, j, w in edges]
        ei = np.array([t[0] for t in triples], dtype=np.int32)
        ej = np.array([t[1] for t in triples], dtype=np.int32)
        w = np.array([t[2] for t in triples], dtype=np.float64)
        if ei.size:
            lo = np.minimum(ei, ej)
            hi = np.maximum(ei, ej)
            ei, ej = lo, hi
            keep = w != 0.0
            ei, ej, w = ei[keep], ej[keep], w[keep]
            order = np.lexsort((ej, ei))
            ei, ej, w = ei[order], ej[order], w[order]
        g = cls(int(num_nodes), ei, ej, w)
        validate(g)
        return g


def validate(g: Graph) -> None:
    """Check all Graph invariants; raise ValueError naming the first violation."""
    ei, ej, w = g.edge_i, g.edge_j, g.weight
    if not (ei.size == ej.size == w.size):
        raise ValueError("edge arrays have mismatched lengths")
    if ei.size == 0:
        return
    if ei.min() < 0 or ej.max() >= g.num_nodes:
        k = int(np.argmax((ei < 0) | (ej >= g.num_nodes)))
        raise ValueError(
            f"edge ({ei[k]}, {ej[k]}) out of range for {g.num_nodes} nodes"
        )
    bad = ei >= ej
    if bad.any():
        k = int(np.argmax(bad))
        raise ValueError(f"edge ({ei[k]}, {ej[k]}) violates i < j ordering")
    pair = ei.astype(np.int64) * g.num_nodes + ej
    if pair.size > 1:
        dup = np.diff(np.sort(pair)) == 0
        if dup.any():
            k = int(np.argmax(dup))
            p = np.sort(pair)[k]
            raise ValueError(
                f"duplicate edge ({p // g.num_nodes}, {p % g.num_nodes})"
            )
    if (w <= 0).any():
        k = int(np.argmax(w <= 0))
        raise ValueError(f"edge ({ei[k]}, {ej[k]}) has nonpositive weight {w[k]}")


def grid_graph_2d(rows: int, cols: int) -> Graph:
    """4-neighborhood grid over rows x cols nodes, unit weights.

    Node (r, c) has index r * cols + c.
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append((u, u + 1, 1.0))
            if r + 1 < rows:
                edges.append((u, u + cols, 1.0))
    return Graph.from_edges(rows * cols, edges)


def grid_graph_3d(nx: int, ny: int, nz: int) -> Graph:
    """6-neighborhood grid over nx x ny x nz nodes, unit weights.

    Node (x, y, z) has index (x * ny + y) * nz + z.
    """
    if nx < 1 or ny < 1 or nz < 1:
        raise ValueError("grid dimensions must be >= 1")
    edges = []
    for x in range(nx):
        for y in range(ny):
            for z in range(nz):
                u = (x * ny + y) * nz + z
                if z + 1 < nz:
                    edges.append((u, u + 1, 1.0))
                if y + 1 < ny:
                    edges.append((u, u + nz, 1.0))
                if x + 1 < nx:
                    edges.append((u, u + ny * nz, 1.0))
    return Graph.from_edges(nx * ny * nz, edges)


def node_edge_weight_sums(g: Graph, values: np.ndarray) -> np.ndarray:
    """Per-node sums of a per-edge quantity over incident edges."""
    out = np.zeros(g.num_nodes)
    np.add.at(out, g.edge_i, values)
    np.add.at(out, g.edge_j, values)
    return out


def write_edge_list(g: Graph, path) -> None:
    """Serialize as text: header ``nodes <N>`` then one ``i j w`` line per edge."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"nodes {g.num_nodes}\n")
        for i, j, w in zip(g.edge_i, g.edge_j, g.weight):
            fh.write(f"{i} {j} {w:.17g}\n")


def read_edge_list(path) -> Graph:
    """Parse the edge-list text format written by write_edge_list."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "nodes":
            raise ValueError(f"{path}: expected header 'nodes <N>'")
        num_nodes = int(header[1])
        edges = []
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'i j w'")
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return Graph.from_edges(num_nodes, edges)
