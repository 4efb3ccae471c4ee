"""Graph and partition containers, ingestion, and block summaries.

Graphs are simple and undirected: no self-loops, no duplicate edges.
Nodes carry arbitrary string names mapped to dense indices in order of
first appearance; the map is kept so partitions stay portable across
reports.  All containers are immutable after construction and safe to
share read-only.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import GraphParseError, ValidationError

__all__ = [
    "Graph",
    "Partition",
    "BlockSummary",
    "DegreeStats",
    "load_edge_list",
    "loads_edge_list",
    "load_partition",
    "loads_partition",
    "block_summary",
    "degree_stats",
    "write_edge_list",
    "write_partition",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph in edge-array plus CSR-adjacency form."""

    n_nodes: int
    edges: np.ndarray            # (E, 2) int64, endpoints as dense indices
    indptr: np.ndarray           # CSR offsets, length N + 1
    indices: np.ndarray          # CSR neighbor lists, length 2E
    node_names: tuple[str, ...]
    dropped_self_loops: int = 0
    dropped_duplicates: int = 0

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @classmethod
    def from_edges(cls, n_nodes: int, edges: Iterable[tuple[int, int]],
                   node_names: Sequence[str] | None = None,
                   dropped_self_loops: int = 0,
                   dropped_duplicates: int = 0) -> "Graph":
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n_nodes):
            raise ValidationError("edge endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValidationError("self-loops are not allowed")
        key = np.sort(arr, axis=1)
        if arr.shape[0] != len({(int(u), int(v)) for u, v in key}):
            raise ValidationError("duplicate edges are not allowed")
        indptr, indices = _build_csr(n_nodes, arr)
        names = tuple(node_names) if node_names is not None else tuple(
            str(i) for i in range(n_nodes))
        if len(names) != n_nodes:
            raise ValidationError("node_names length does not match n_nodes")
        g = cls(n_nodes, arr, indptr, indices, names,
                dropped_self_loops, dropped_duplicates)
        g.edges.setflags(write=False)
        g.indptr.setflags(write=False)
        g.indices.setflags(write=False)
        return g


def _build_csr(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    deg = np.zeros(n, dtype=np.int64)
    if edges.size:
        np.add.at(deg, edges[:, 0], 1)
        np.add.at(deg, edges[:, 1], 1)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    indices = np.zeros(indptr[-1], dtype=np.int64)
    fill = indptr[:-1].copy()
    for u, v in edges:
        indices[fill[u]] = v
        fill[u] += 1
        indices[fill[v]] = u
        fill[v] += 1
    return indptr, indices


@dataclass(frozen=True, eq=False)
class Partition:
    """Node labels compacted to [0, B) with every group nonempty."""

    labels: np.ndarray
    n_groups: int
    group_sizes: np.ndarray

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        raw = np.asarray(labels)
        if raw.ndim != 1:
            raise ValidationError("labels must be one-dimensional")
        # compact in order of first appearance
        _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        compact = order[inverse].astype(np.int64)
        sizes = np.bincount(compact)
        p = cls(compact, int(sizes.size), sizes.astype(np.int64))
        p.labels.setflags(write=False)
        p.group_sizes.setflags(write=False)
        return p

    @property
    def n_nodes(self) -> int:
        return int(self.labels.size)


@dataclass(frozen=True, eq=False)
class BlockSummary:
    """Sufficient statistics of a partitioned graph.

    ``e_rr`` counts within-group edge endpoints (twice the internal edge
    count of each group) and ``e_r`` the total degree of each group.
    """

    n_groups: int
    n_edges: int
    e_in: int
    e_rr: np.ndarray
    e_r: np.ndarray
    group_sizes: np.ndarray


@dataclass(frozen=True, eq=False)
class DegreeStats:
    """Degree sequence plus its histogram eta_k."""

    degrees: np.ndarray
    counts: np.ndarray   # counts[k] = number of nodes with degree k
    n_edges: int


def block_summary(g: Graph, p: Partition) -> BlockSummary:
    """Single-pass sufficient statistics of (graph, partition)."""
    if p.n_nodes != g.n_nodes:
        raise ValidationError(
            f"partition covers {p.n_nodes} nodes, graph has {g.n_nodes}")
    b = p.n_groups
    labels = p.labels
    if g.n_edges:
        lu = labels[g.edges[:, 0]]
        lv = labels[g.edges[:, 1]]
        same = lu == lv
        e_in = int(np.count_nonzero(same))
        e_rr = 2 * np.bincount(lu[same], minlength=b)
        e_r = np.bincount(lu, minlength=b) + np.bincount(lv, minlength=b)
    else:
        e_in = 0
        e_rr = np.zeros(b, dtype=np.int64)
        e_r = np.zeros(b, dtype=np.int64)
    return BlockSummary(b, g.n_edges, e_in,
                        e_rr.astype(np.int64), e_r.astype(np.int64),
                        p.group_sizes.copy())


def degree_stats(g: Graph) -> DegreeStats:
    deg = g.degrees
    counts = np.bincount(deg) if g.n_nodes else np.zeros(1, dtype=np.int64)
    return DegreeStats(deg.astype(np.int64), counts.astype(np.int64), g.n_edges)


def load_edge_list(source: str | IO[str], strict: bool = True) -> Graph:
    """Parse a whitespace-separated edge list.

    Lines starting with ``#`` and blank lines are ignored.  Under the
    strict policy self-loops and duplicate edges raise; the permissive
    policy drops them, keeping counts on the returned graph.
    """
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return loads_edge_list(fh.read(), strict=strict)
    return loads_edge_list(source.read(), strict=strict)


def loads_edge_list(text: str, strict: bool = True) -> Graph:
    name_to_idx: dict[str, int] = {}
    names: list[str] = []
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    dropped_loops = 0
    dropped_dups = 0

    def idx(tok: str) -> int:
        i = name_to_idx.get(tok)
        if i is None:
            i = len(names)
            name_to_idx[tok] = i
            names.append(tok)
        return i

    for ln, line in enumerate(io.StringIO(text), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise GraphParseError(
                f"line {ln}: expected two node tokens, got {len(parts)}")
        u, v = idx(parts[0]), idx(parts[1])
        if u == v:
            if strict:
                raise ValidationError(f"line {ln}: self-loop on node {parts[0]!r}")
            dropped_loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            if strict:
                raise ValidationError(
                    f"line {ln}: duplicate edge {parts[0]!r} -- {parts[1]!r}")
            dropped_dups += 1
            continue
        seen.add(key)
        edges.append((u, v))
    if not names:
        raise GraphParseError("no edges found in input")
    return Graph.from_edges(len(names), edges, names,
                            dropped_self_loops=dropped_loops,
                            dropped_duplicates=dropped_dups)


def load_partition(source: str | IO[str], g: Graph) -> Partition:
    """Read a partition file for graph ``g``.

    Two formats are accepted: one label per line in node-index order, or
    ``node<TAB>label`` pairs using the graph's node names.  Labels are
    compacted on load.
    """
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return loads_partition(fh.read(), g)
    return loads_partition(source.read(), g)


def loads_partition(text: str, g: Graph) -> Partition:
    rows: list[list[str]] = []
    for ln, line in enumerate(io.StringIO(text), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t") if "\t" in stripped else stripped.split()
        if len(parts) not in (1, 2):
            raise GraphParseError(f"line {ln}: expected 1 or 2 fields")
        rows.append(parts)
    if not rows:
        raise GraphParseError("no labels found in input")
    widths = {len(r) for r in rows}
    if widths == {1}:
        if len(rows) != g.n_nodes:
            raise ValidationError(
                f"{len(rows)} labels for a graph with {g.n_nodes} nodes")
        return Partition.from_labels([r[0] for r in rows])
    if widths == {2}:
        name_to_idx = {name: i for i, name in enumerate(g.node_names)}
        labels: list[str | None] = [None] * g.n_nodes
        for node, label in rows:
            if node not in name_to_idx:
                raise ValidationError(f"unknown node name {node!r}")
            labels[name_to_idx[node]] = label
        missing = [g.node_names[i] for i, x in enumerate(labels) if x is None]
        if missing:
            raise ValidationError(f"nodes without a label: {missing[:5]}")
        return Partition.from_labels(labels)
    raise GraphParseError("mixed one-column and two-column partition rows")


def write_edge_list(g: Graph, target: str | IO[str]) -> None:
    lines = [f"{g.node_names[u]} {g.node_names[v]}\n" for u, v in g.edges]
    _write(target, "".join(lines))


def write_partition(p: Partition, target: str | IO[str],
                    g: Graph | None = None) -> None:
    if g is not None:
        body = "".join(f"{g.node_names[i]}\t{p.labels[i]}\n"
                       for i in range(p.n_nodes))
    else:
        body = "".join(f"{x}\n" for x in p.labels)
    _write(target, body)


def _write(target: str | IO[str], body: str) -> None:
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        target.write(body)
