"""Immutable weighted graphs, walks, edge densities, and p-energies."""

from __future__ import annotations

import math
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, ParameterError


class Graph:
    """Finite simple graph with strictly positive edge weights.

    Edges are kept in a fixed canonical order (input order) and every
    per-edge quantity in this package is indexed by that order.  In the
    undirected case ``(x, y)`` and ``(y, x)`` denote the same edge.
    Instances are immutable and safe to share across threads.
    """

    __slots__ = (
        "directed",
        "vertices",
        "edges",
        "sigma",
        "_vindex",
        "_eindex",
        "_out",
        "_in",
    )

    def __init__(
        self,
        vertices: Sequence[str],
        edges: Sequence[tuple[str, str]],
        sigma: Sequence[float] | float | None = None,
        *,
        directed: bool = False,
    ) -> None:
        verts = tuple(vertices)
        if len(verts) < 1:
            raise InputError("a graph needs at least one vertex")
        for v in verts:
            if not isinstance(v, str) or not v:
                raise InputError(f"vertex labels must be nonempty strings, got {v!r}")
        if len(set(verts)) != len(verts):
            raise InputError("duplicate vertex label")

        vindex = {v: i for i, v in enumerate(verts)}
        edge_list: list[tuple[str, str]] = []
        eindex: dict[tuple[str, str], int] = {}
        for k, (tail, head) in enumerate(edges):
            if tail not in vindex:
                raise InputError(f"unknown vertex {tail!r} in edge {k}")
            if head not in vindex:
                raise InputError(f"unknown vertex {head!r} in edge {k}")
            if tail == head:
                raise InputError(f"self-loop {tail!r} in edge {k} is not supported")
            key = (tail, head)
            if key in eindex or (not directed and (head, tail) in eindex):
                raise InputError(f"duplicate edge ({tail!r}, {head!r})")
            eindex[key] = k
            if not directed:
                eindex[(head, tail)] = k
            edge_list.append((tail, head))

        m = len(edge_list)
        if sigma is None:
            weights = np.ones(m)
        elif np.isscalar(sigma):
            weights = np.full(m, float(sigma))
        else:
            weights = np.array(sigma, dtype=float)
        if weights.shape != (m,):
            raise InputError(f"expected {m} edge weights, got shape {weights.shape}")
        if m and (not np.all(np.isfinite(weights)) or np.any(weights <= 0.0)):
            raise InputError("edge weights must be finite and strictly positive")
        weights.setflags(write=False)

        out: list[list[tuple[int, int]]] = [[] for _ in verts]
        inc: list[list[tuple[int, int]]] = [[] for _ in verts]
        for k, (tail, head) in enumerate(edge_list):
            ti, hi = vindex[tail], vindex[head]
            out[ti].append((k, hi))
            inc[hi].append((k, ti))
            if not directed:
                out[hi].append((k, ti))
                inc[ti].append((k, hi))

        object.__setattr__(self, "directed", bool(directed))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple(edge_list))
        object.__setattr__(self, "sigma", weights)
        object.__setattr__(self, "_vindex", vindex)
        object.__setattr__(self, "_eindex", eindex)
        object.__setattr__(self, "_out", tuple(tuple(a) for a in out))
        object.__setattr__(self, "_in", tuple(tuple(a) for a in inc))

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def sigma_min(self) -> float:
        if self.m == 0:
            raise InputError("sigma_min is undefined on an edgeless graph")
        return float(self.sigma.min())

    @property
    def sigma_total(self) -> float:
        return float(self.sigma.sum())

    def vertex_index(self, label: str) -> int:
        try:
            return self._vindex[label]
        except KeyError:
            raise InputError(f"unknown vertex {label!r}") from None

    def has_edge(self, tail: str, head: str) -> bool:
        return (tail, head) in self._eindex

    def edge_index(self, tail: str, head: str) -> int:
        try:
            return self._eindex[(tail, head)]
        except KeyError:
            raise InputError(f"no edge ({tail!r}, {head!r})") from None

    def out_edges(self, vertex_idx: int) -> tuple[tuple[int, int], ...]:
        """Traversable edges leaving a vertex as ``(edge_idx, neighbor_idx)``."""
        return self._out[vertex_idx]

    def in_edges(self, vertex_idx: int) -> tuple[tuple[int, int], ...]:
        return self._in[vertex_idx]

    def with_sigma(self, sigma: Sequence[float] | float) -> "Graph":
        """Same structure with replaced edge weights."""
        return Graph(self.vertices, self.edges, sigma, directed=self.directed)

    def same_structure(self, other: "Graph") -> bool:
        return (
            self.directed == other.directed
            and self.vertices == other.vertices
            and self.edges == other.edges
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.same_structure(other) and np.array_equal(self.sigma, other.sigma)

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph({kind}, n={self.n}, m={self.m})"


class Walk:
    """A walk given by its vertex sequence; may repeat edges and vertices.

    Traverses at least one edge.  On directed graphs every step follows an
    edge tail to head; on undirected graphs either direction is allowed.
    """

    __slots__ = ("graph", "vertex_labels", "edge_indices")

    def __init__(self, graph: Graph, vertex_labels: Sequence[str]) -> None:
        labels = tuple(vertex_labels)
        if len(labels) < 2:
            raise InputError("a walk must traverse at least one edge")
        indices = []
        for a, b in zip(labels, labels[1:]):
            graph.vertex_index(a)
            graph.vertex_index(b)
            if not graph.has_edge(a, b):
                raise InputError(f"walk step ({a!r}, {b!r}) is not an edge")
            indices.append(graph.edge_index(a, b))
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "vertex_labels", labels)
        object.__setattr__(self, "edge_indices", tuple(indices))

    def __setattr__(self, name, value):
        raise AttributeError("Walk is immutable")

    @classmethod
    def from_edge_indices(
        cls, graph: Graph, edge_indices: Sequence[int], start: str | None = None
    ) -> "Walk":
        """Build a walk from an edge index sequence.

        ``start`` disambiguates the traversal direction of the first edge on
        undirected graphs; it defaults to the stored tail.
        """
        idxs = list(edge_indices)
        if not idxs:
            raise InputError("a walk must traverse at least one edge")
        for k in idxs:
            if not 0 <= k < graph.m:
                raise InputError(f"edge index {k} outside the graph")
        tail0, head0 = graph.edges[idxs[0]]
        if graph.directed:
            candidates = [tail0]
        elif start is not None:
            candidates = [start]
        else:
            candidates = [tail0, head0]
        if start is not None and start not in (tail0, head0):
            raise InputError(f"start {start!r} is not an endpoint of the first edge")
        for first in candidates:
            labels = [first]
            ok = True
            for k in idxs:
                tail, head = graph.edges[k]
                cur = labels[-1]
                if cur == tail:
                    labels.append(head)
                elif not graph.directed and cur == head:
                    labels.append(tail)
                else:
                    ok = False
                    break
            if ok:
                return cls(graph, labels)
        raise InputError("edge sequence does not form a walk")

    @property
    def hops(self) -> int:
        return len(self.edge_indices)

    @property
    def source(self) -> str:
        return self.vertex_labels[0]

    @property
    def target(self) -> str:
        return self.vertex_labels[-1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Walk):
            return NotImplemented
        return self.graph == other.graph and self.vertex_labels == other.vertex_labels

    def __hash__(self) -> int:
        return hash(self.vertex_labels)

    def __repr__(self) -> str:
        return "Walk(" + "-".join(self.vertex_labels) + ")"


class EdgeDensity:
    """Real values on edges, in the canonical edge order of a graph."""

    __slots__ = ("values",)

    def __init__(self, values: Iterable[float]) -> None:
        arr = np.array(values, dtype=float, copy=True).reshape(-1)
        if arr.size and not np.all(np.isfinite(arr)):
            raise InputError("edge densities must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("EdgeDensity is immutable")

    @classmethod
    def constant(cls, graph: Graph, value: float) -> "EdgeDensity":
        return cls(np.full(graph.m, float(value)))

    @classmethod
    def zeros(cls, graph: Graph) -> "EdgeDensity":
        return cls(np.zeros(graph.m))

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]

    def as_dict(self, graph: Graph) -> dict[tuple[str, str], float]:
        return {edge: float(v) for edge, v in zip(graph.edges, self.values)}

    def __repr__(self) -> str:
        return f"EdgeDensity({self.values.tolist()})"


class AdmissibilityClass(Enum):
    """Where a density falls among the nested admissible sets.

    ``RESTRICTED`` additionally satisfies the box bounds 0 <= rho <= 1,
    ``ADMISSIBLE`` is nonnegative, ``RELAXED_ONLY`` carries negative entries
    but still gives every walk of the family length at least one, and
    ``NOT_ADMISSIBLE`` fails the unit length requirement outright.
    """

    NOT_ADMISSIBLE = "not_admissible"
    RELAXED_ONLY = "relaxed_only"
    ADMISSIBLE = "admissible"
    RESTRICTED = "restricted"


def _density_values(rho: EdgeDensity | Iterable[float], m: int | None = None) -> np.ndarray:
    values = rho.values if isinstance(rho, EdgeDensity) else np.asarray(rho, dtype=float)
    if m is not None and values.shape != (m,):
        raise InputError(f"expected a density over {m} edges, got shape {values.shape}")
    return values


def rho_length(walk: Walk, rho: EdgeDensity | Iterable[float]) -> float:
    """Length of a walk under a density: the sum of the density over the
    walk's edges, counting repeated traversals."""
    values = _density_values(rho, walk.graph.m)
    return float(sum(values[k] for k in walk.edge_indices))


def energy(
    rho: EdgeDensity | Iterable[float],
    p: float,
    sigma: Iterable[float],
) -> float:
    """Weighted p-energy of a density.

    For finite ``p`` this is ``sum_e sigma(e) |rho(e)|**p``; for ``p = inf``
    it is ``max_e |rho(e)|`` (weights play no role).  Requires ``p >= 1``.
    """
    values = _density_values(rho)
    weights = np.asarray(sigma, dtype=float)
    if weights.shape != values.shape:
        raise InputError("density and weights must cover the same edges")
    if not (p >= 1.0):
        raise ParameterError(f"p must be at least 1, got {p}")
    if values.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.abs(values).max())
    return float(np.sum(weights * np.abs(values) ** p))


def admissibility_class(
    rho: EdgeDensity | Iterable[float],
    family_rho_length: float,
    tol: float = 0.0,
) -> AdmissibilityClass:
    """Classify a density relative to a family's shortest rho-length.

    ``family_rho_length`` must come from the family oracle.  Threshold
    comparisons use the explicit ``tol`` supplied by the caller.
    """
    if tol < 0.0:
        raise ParameterError("tol must be nonnegative")
    values = _density_values(rho)
    if family_rho_length < 1.0 - tol:
        return AdmissibilityClass.NOT_ADMISSIBLE
    if values.size and values.min() < -tol:
        return AdmissibilityClass.RELAXED_ONLY
    if values.size and values.max() > 1.0 + tol:
        return AdmissibilityClass.ADMISSIBLE
    return AdmissibilityClass.RESTRICTED
