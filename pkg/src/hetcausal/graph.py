"""Typed graph container, TSV ingestion and the homogeneous projection.

Node ids are dense integers assigned in file order; the original id string is
kept in ``HeteroGraph.names`` for reporting. All neighborhoods are undirected
and never contain the node itself.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "GraphFormatError",
    "HeteroGraph",
    "HomoProjection",
    "load_graph",
    "load_splits",
    "write_graph",
    "write_splits",
    "project_homogeneous",
    "from_edge_list",
    "neighborhood",
    "SPLITS",
]

SPLITS = ("train", "val", "test")
UNLABELED = -1


class GraphFormatError(ValueError):
    """Raised for malformed or inconsistent graph input; message carries ``file:line``."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f", {os.path.basename(path)}"
            if line is not None:
                where += f":{line}"
        super().__init__(message + where)


def _build_adjacency(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, ...]:
    # undirected, deduplicated, self-loops removed; each row sorted ascending
    keep = src != dst
    a = np.concatenate([src[keep], dst[keep]])
    b = np.concatenate([dst[keep], src[keep]])
    if a.size:
        pairs = np.unique(np.stack([a, b], axis=1), axis=0)
        a, b = pairs[:, 0], pairs[:, 1]
    bounds = np.searchsorted(a, np.arange(n + 1))
    return tuple(b[bounds[i]:bounds[i + 1]].copy() for i in range(n))


@dataclass(frozen=True, eq=False)
class HeteroGraph:
    """Heterogeneous graph with class labels on one node type.

    Parameters
    ----------
    names : sequence of str
        Original node ids; position is the dense node id.
    node_types : sequence of str
        Type of every node.
    edges : sequence of (src, relation, dst)
        Dense ids and relation names.
    labels : mapping int -> int
        Class index for labeled nodes only.
    target_type : str
    num_classes : int
    """

    names: tuple[str, ...]
    node_types: tuple[str, ...]
    edges: tuple[tuple[int, str, int], ...]
    labels: Mapping[int, int]
    target_type: str
    num_classes: int
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.names)
        if len(self.node_types) != n:
            raise GraphFormatError("node_types length does not match node count")
        if len(set(self.names)) != n:
            raise GraphFormatError("duplicate node id")
        for s, r, d in self.edges:
            if not (0 <= s < n and 0 <= d < n):
                raise GraphFormatError(f"dangling endpoint in edge ({s}, {r}, {d})")
        if self.num_classes < 2:
            raise GraphFormatError(f"num_classes must be >= 2, got {self.num_classes}")
        for v, c in self.labels.items():
            if self.node_types[v] != self.target_type:
                raise GraphFormatError(f"label on non-target node {self.names[v]}")
            if not 0 <= c < self.num_classes:
                raise GraphFormatError(f"label {c} of node {self.names[v]} outside 0..{self.num_classes - 1}")
        object.__setattr__(self, "labels", dict(sorted(self.labels.items())))
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(self.names)})

    @property
    def num_nodes(self) -> int:
        return len(self.names)

    @cached_property
    def relations(self) -> tuple[str, ...]:
        return tuple(sorted({r for _, r, _ in self.edges}))

    @cached_property
    def y(self) -> np.ndarray:
        """Label array with -1 for unlabeled nodes."""
        y = np.full(self.num_nodes, UNLABELED, dtype=np.int64)
        for v, c in self.labels.items():
            y[v] = c
        return y

    @cached_property
    def adjacency(self) -> dict[str, tuple[np.ndarray, ...]]:
        out = {}
        for rel in self.relations:
            src = np.array([s for s, r, _ in self.edges if r == rel], dtype=np.int64)
            dst = np.array([d for _, r, d in self.edges if r == rel], dtype=np.int64)
            out[rel] = _build_adjacency(self.num_nodes, src, dst)
        return out

    def node_id(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown node {name!r}") from None

    def labeled_targets(self) -> list[int]:
        return list(self.labels)


@dataclass(frozen=True, eq=False)
class HomoProjection:
    """Type-free simple undirected graph over the same node set."""

    names: tuple[str, ...]
    pairs: np.ndarray  # (m, 2), each row (u, v) with u < v, rows sorted
    labels: Mapping[int, int]
    target_type: str
    num_classes: int

    @property
    def num_nodes(self) -> int:
        return len(self.names)

    @cached_property
    def y(self) -> np.ndarray:
        y = np.full(self.num_nodes, UNLABELED, dtype=np.int64)
        for v, c in self.labels.items():
            y[v] = c
        return y

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, ...]:
        return _build_adjacency(self.num_nodes, self.pairs[:, 0], self.pairs[:, 1])

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.pairs}


def project_homogeneous(g: HeteroGraph) -> HomoProjection:
    """Drop node and edge types: union of all relations as simple undirected pairs."""
    if g.edges:
        arr = np.array([(s, d) for s, _, d in g.edges], dtype=np.int64)
        arr = arr[arr[:, 0] != arr[:, 1]]
        arr = np.sort(arr, axis=1)
        pairs = np.unique(arr, axis=0) if arr.size else np.empty((0, 2), dtype=np.int64)
    else:
        pairs = np.empty((0, 2), dtype=np.int64)
    return HomoProjection(g.names, pairs, dict(g.labels), g.target_type, g.num_classes)


def neighborhood(g: HeteroGraph | HomoProjection, v: int, r: str | None = None) -> np.ndarray:
    """Sorted neighbor ids of ``v``; ``r`` is required for heterogeneous graphs and must be None for projections."""
    if not 0 <= v < g.num_nodes:
        raise KeyError(f"unknown node {v}")
    if isinstance(g, HomoProjection):
        if r is not None:
            raise ValueError("projections carry no relations")
        return g.adjacency[v]
    if r is None:
        raise ValueError("relation required for a heterogeneous graph")
    if r not in g.adjacency:
        raise KeyError(f"unknown relation {r!r}")
    return g.adjacency[r][v]


# --------------------------------------------------------------------------- io


def _data_lines(path: str) -> Iterable[tuple[int, list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line.split("\t")


def _parse_int(text: str, path: str, lineno: int, what: str) -> int:
    # int() alone accepts unicode digits and underscores; keep it ASCII
    t = text.strip()
    if not t or not (t.isascii() and t.lstrip("-").isdigit()):
        raise GraphFormatError(f"malformed {what} {text!r}", path, lineno)
    return int(t)


def load_graph(
    nodes_path: str,
    edges_path: str,
    labels_inline: bool = True,
    labels: Mapping[str, int] | None = None,
    num_classes: int | None = None,
    target_type: str | None = None,
) -> HeteroGraph:
    """Read ``nodes.tsv`` / ``edges.tsv`` into a validated :class:`HeteroGraph`.

    With ``labels_inline`` the third column of ``nodes.tsv`` holds an integer
    class or ``-``; otherwise labels come from the ``labels`` mapping (original
    id -> class). ``target_type`` defaults to the unique type carrying labels and
    ``num_classes`` to ``max(label) + 1``.
    """
    for p in (nodes_path, edges_path):
        if not os.path.isfile(p):
            raise GraphFormatError(f"missing file {p}")
    names: list[str] = []
    types: list[str] = []
    raw_labels: dict[int, tuple[int, int]] = {}
    index: dict[str, int] = {}
    ncols = 3 if labels_inline else 2
    for lineno, cols in _data_lines(nodes_path):
        if len(cols) != ncols:
            raise GraphFormatError(f"expected {ncols} columns, got {len(cols)}", nodes_path, lineno)
        name, ntype = cols[0].strip(), cols[1].strip()
        if not name or not ntype:
            raise GraphFormatError("empty node id or type", nodes_path, lineno)
        if name in index:
            raise GraphFormatError(f"duplicate node id {name!r}", nodes_path, lineno)
        index[name] = len(names)
        names.append(name)
        types.append(ntype)
        if labels_inline and cols[2].strip() != "-":
            raw_labels[index[name]] = (_parse_int(cols[2], nodes_path, lineno, "label"), lineno)
    if not labels_inline and labels:
        for name, c in labels.items():
            if name not in index:
                raise GraphFormatError(f"label for unknown node {name!r}")
            raw_labels[index[name]] = (int(c), 0)

    edges: list[tuple[int, str, int]] = []
    for lineno, cols in _data_lines(edges_path):
        if len(cols) != 3:
            raise GraphFormatError(f"expected 3 columns, got {len(cols)}", edges_path, lineno)
        s, rel, d = (c.strip() for c in cols)
        if not rel:
            raise GraphFormatError("empty relation", edges_path, lineno)
        if s not in index or d not in index:
            raise GraphFormatError("dangling endpoint", edges_path, lineno)
        edges.append((index[s], rel, index[d]))

    if target_type is None:
        labeled_types = {types[v] for v in raw_labels}
        if len(labeled_types) > 1:
            v = max(raw_labels, key=lambda u: raw_labels[u][1])
            raise GraphFormatError("labels on more than one node type", nodes_path, raw_labels[v][1])
        target_type = labeled_types.pop() if labeled_types else (types[0] if types else "")
    if num_classes is None:
        num_classes = max(max((c for c, _ in raw_labels.values()), default=0) + 1, 2)
    for v, (c, lineno) in raw_labels.items():
        if types[v] != target_type:
            raise GraphFormatError("label on non-target type", nodes_path, lineno or None)
        if c < 0 or c >= num_classes:
            raise GraphFormatError(f"label {c} >= num_classes {num_classes}", nodes_path, lineno or None)
    return HeteroGraph(
        names=tuple(names),
        node_types=tuple(types),
        edges=tuple(edges),
        labels={v: c for v, (c, _) in raw_labels.items()},
        target_type=target_type,
        num_classes=num_classes,
    )


def load_splits(path: str, g: HeteroGraph) -> dict[int, str]:
    """Read ``splits.tsv``; keys must be labeled target-type nodes."""
    out: dict[int, str] = {}
    for lineno, cols in _data_lines(path):
        if len(cols) != 2:
            raise GraphFormatError(f"expected 2 columns, got {len(cols)}", path, lineno)
        name, split = cols[0].strip(), cols[1].strip()
        if split not in SPLITS:
            raise GraphFormatError(f"unknown split {split!r}", path, lineno)
        if name not in g._index:
            raise GraphFormatError(f"unknown node {name!r}", path, lineno)
        v = g._index[name]
        if v not in g.labels:
            raise GraphFormatError(f"split for unlabeled node {name!r}", path, lineno)
        if v in out:
            raise GraphFormatError(f"node {name!r} assigned twice", path, lineno)
        out[v] = split
    return out


def write_graph(g: HeteroGraph, nodes_path: str, edges_path: str) -> None:
    with open(nodes_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# node_id\tnode_type\tlabel\n")
        for v, (name, t) in enumerate(zip(g.names, g.node_types)):
            lab = g.labels.get(v)
            fh.write(f"{name}\t{t}\t{'-' if lab is None else lab}\n")
    with open(edges_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# src_id\trelation\tdst_id\n")
        for s, r, d in g.edges:
            fh.write(f"{g.names[s]}\t{r}\t{g.names[d]}\n")


def write_splits(g: HeteroGraph, splits: Mapping[int, str], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for v in sorted(splits):
            fh.write(f"{g.names[v]}\t{splits[v]}\n")


def from_edge_list(
    node_types: Sequence[str],
    edges: Sequence[tuple[int, str, int]],
    labels: Mapping[int, int],
    target_type: str,
    num_classes: int,
) -> HeteroGraph:
    """Convenience constructor with names ``"0".."n-1"``."""
    return HeteroGraph(
        names=tuple(str(i) for i in range(len(node_types))),
        node_types=tuple(node_types),
        edges=tuple((int(s), str(r), int(d)) for s, r, d in edges),
        labels=dict(labels),
        target_type=target_type,
        num_classes=num_classes,
    )
