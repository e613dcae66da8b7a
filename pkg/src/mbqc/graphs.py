"""Graphs, standard lattices, and the site-percolation utility.

Every other module consumes these values.  A ``Graph`` is immutable after
construction: vertices are ``0..n-1`` and edges are stored canonically as
``(a, b)`` with ``a < b``, sorted, so equal graphs serialize identically.

Grid vertex indexing is row-major: on a ``grid2d`` with dims ``[r, c]`` the
site at row ``i``, column ``j`` has index ``i*c + j``; ``grid3d`` extends
this with the last axis fastest.  All lattices use open boundaries.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .rng import make_rng

_LATTICE_KINDS = ("chain", "star", "grid2d", "grid3d")
_DIMS_LEN = {"chain": 1, "star": 1, "grid2d": 2, "grid3d": 3}


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n_vertices-1``."""

    n_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __init__(self, n_vertices: int, edges: Iterable[Sequence[int]] = ()):
        if n_vertices < 0:
            raise ValidationError("n_vertices must be non-negative")
        canon = set()
        for e in edges:
            a, b = int(e[0]), int(e[1])
            if a == b:
                raise ValidationError(f"self-loop at vertex {a}")
            if not (0 <= a < n_vertices and 0 <= b < n_vertices):
                raise ValidationError(f"edge ({a},{b}) out of range for n={n_vertices}")
            canon.add((a, b) if a < b else (b, a))
        object.__setattr__(self, "n_vertices", int(n_vertices))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> list[int]:
        if not (0 <= v < self.n_vertices):
            raise ValidationError(f"vertex {v} out of range")
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return sorted(out)

    def adjacency(self) -> list[list[int]]:
        """Neighbor lists for all vertices (one pass over the edge set)."""
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def has_edge(self, a: int, b: int) -> bool:
        if a > b:
            a, b = b, a
        return (a, b) in set(self.edges)

    def without_vertices(self, removed: Iterable[int]) -> "Graph":
        """Induced subgraph on the surviving vertices, reindexed densely.

        Survivors keep their relative order; the mapping is
        ``old -> rank of old among survivors``.
        """
        gone = set(removed)
        for v in gone:
            if not (0 <= v < self.n_vertices):
                raise ValidationError(f"removed vertex {v} out of range")
        keep = [v for v in range(self.n_vertices) if v not in gone]
        index = {v: i for i, v in enumerate(keep)}
        edges = [(index[a], index[b]) for a, b in self.edges
                 if a not in gone and b not in gone]
        return Graph(len(keep), edges)

    def delete_vertex_keep_labels(self, v: int) -> "Graph":
        """Drop all edges at ``v`` but keep the vertex count (isolated site)."""
        return Graph(self.n_vertices,
                     [e for e in self.edges if v not in e])

    def to_json_dict(self) -> dict:
        return {"n": self.n_vertices, "edges": [list(e) for e in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, d: dict) -> "Graph":
        try:
            return cls(int(d["n"]), d.get("edges", []))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad graph JSON: {exc}") from exc

    @classmethod
    def from_json(cls, s: str) -> "Graph":
        return cls.from_json_dict(json.loads(s))


@dataclass(frozen=True)
class LatticeSpec:
    """A named lattice: chain, star, grid2d or grid3d with positive dims.

    For ``star``, ``dims[0]`` is the number of leaves plus one (total
    vertex count); vertex 0 is the hub.
    """

    kind: str
    dims: tuple[int, ...]

    def __init__(self, kind: str, dims: Sequence[int]):
        if kind not in _LATTICE_KINDS:
            raise ValidationError(f"unknown lattice kind {kind!r}")
        dims = tuple(int(d) for d in dims)
        if len(dims) != _DIMS_LEN[kind]:
            raise ValidationError(
                f"{kind} takes {_DIMS_LEN[kind]} dims, got {len(dims)}")
        if any(d < 1 for d in dims):
            raise ValidationError("dims entries must be >= 1")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "dims", dims)

    @property
    def n_vertices(self) -> int:
        n = 1
        for d in self.dims:
            n *= d
        return n

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "dims": list(self.dims)}

    @classmethod
    def from_json_dict(cls, d: dict) -> "LatticeSpec":
        try:
            return cls(d["kind"], d["dims"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad lattice JSON: {exc}") from exc


@dataclass(frozen=True)
class DefectMask:
    """Record of a seeded site-defect draw, reproducible from (rate, seed)."""

    removed: frozenset[int]
    defect_rate: float
    seed: int

    removed_sorted: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "removed_sorted", tuple(sorted(self.removed)))


def build_lattice(spec: LatticeSpec) -> Graph:
    """Build the named lattice graph with open boundaries.

    chain -> path; star -> hub 0 joined to each leaf; grid2d/grid3d ->
    nearest-neighbor rectangular lattice, row-major indexing.
    """
    if spec.kind == "chain":
        n = spec.dims[0]
        return Graph(n, [(i, i + 1) for i in range(n - 1)])
    if spec.kind == "star":
        n = spec.dims[0]
        return Graph(n, [(0, i) for i in range(1, n)])
    if spec.kind == "grid2d":
        r, c = spec.dims
        edges = []
        for i in range(r):
            for j in range(c):
                v = i * c + j
                if j + 1 < c:
                    edges.append((v, v + 1))
                if i + 1 < r:
                    edges.append((v, v + c))
        return Graph(r * c, edges)
    # grid3d
    a, b, c = spec.dims
    edges = []
    for i in range(a):
        for j in range(b):
            for k in range(c):
                v = (i * b + j) * c + k
                if k + 1 < c:
                    edges.append((v, v + 1))
                if j + 1 < b:
                    edges.append((v, v + c))
                if i + 1 < a:
                    edges.append((v, v + b * c))
    return Graph(a * b * c, edges)


def apply_site_defects(spec: LatticeSpec, defect_rate: float, seed: int
                       ) -> tuple[Graph, DefectMask]:
    """Remove each lattice site independently with probability ``defect_rate``.

    Deterministic for fixed (spec, rate, seed); the returned graph is the
    induced subgraph on survivors with dense reindexing (use the mask to map
    back to lattice coordinates).
    """
    if not (0.0 <= defect_rate <= 1.0):
        raise ValidationError(f"defect_rate {defect_rate} outside [0, 1]")
    full = build_lattice(spec)
    rng = make_rng(seed)
    hits = rng.random(full.n_vertices) < defect_rate
    removed = frozenset(int(v) for v in np.flatnonzero(hits))
    return full.without_vertices(removed), DefectMask(removed, float(defect_rate), int(seed))


def _grid2d_boundary_sets(spec: LatticeSpec, axis: str) -> tuple[list[int], list[int]]:
    r, c = spec.dims
    if axis == "column":
        # spanning top row <-> bottom row
        return [j for j in range(c)], [(r - 1) * c + j for j in range(c)]
    if axis == "row":
        return [i * c for i in range(r)], [i * c + (c - 1) for i in range(r)]
    raise ValidationError(f"axis must be 'row' or 'column', got {axis!r}")


class _UnionFind:
    """Union-find with path halving; used with two virtual boundary nodes."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def has_spanning_cluster(graph: Graph, spec: LatticeSpec, mask: DefectMask | None = None,
                         axis: str = "column") -> bool:
    """Decide whether surviving sites connect the two opposite boundaries.

    ``graph`` must be the induced subgraph of ``build_lattice(spec)`` under
    ``mask`` (mask None means no removals).  Axis ``column`` asks for a
    top-to-bottom crossing, ``row`` for left-to-right.  Decision is by
    union-find with a virtual node per boundary.
    """
    if spec.kind != "grid2d":
        raise ValidationError("spanning test is defined for grid2d lattices")
    removed = mask.removed if mask is not None else frozenset()
    n_full = spec.n_vertices
    if mask is not None and mask.removed and max(mask.removed) >= n_full:
        raise ValidationError("mask does not match lattice")
    survivors = [v for v in range(n_full) if v not in removed]
    if graph.n_vertices != len(survivors):
        raise ValidationError("graph does not match lattice/mask")
    index = {v: i for i, v in enumerate(survivors)}

    full = build_lattice(spec)
    expected = set()
    for a, b in full.edges:
        if a not in removed and b not in removed:
            expected.add((index[a], index[b]))
    if expected != set(graph.edges):
        raise ValidationError("graph is not the induced subgraph of the lattice")

    lo, hi = _grid2d_boundary_sets(spec, axis)
    uf = _UnionFind(graph.n_vertices + 2)
    top, bottom = graph.n_vertices, graph.n_vertices + 1
    for v in lo:
        if v not in removed:
            uf.union(top, index[v])
    for v in hi:
        if v not in removed:
            uf.union(bottom, index[v])
    for a, b in graph.edges:
        uf.union(a, b)
    return uf.find(top) == uf.find(bottom)


def spanning_probability(spec: LatticeSpec, defect_rate: float, seeds: Sequence[int],
                         axis: str = "column") -> float:
    """Fraction of seeds whose defect draw still spans the lattice."""
    hits = 0
    for s in seeds:
        g, m = apply_site_defects(spec, defect_rate, s)
        if has_spanning_cluster(g, spec, m, axis=axis):
            hits += 1
    return hits / len(seeds)
