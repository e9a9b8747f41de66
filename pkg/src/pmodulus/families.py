"""Walk families as shortest-walk oracles, plus usage matrices.

A family is represented operationally: given a nonnegative density it
returns a member walk of minimal rho-length.  Minimizers are tie-broken by
hop count and then by lexicographically smallest edge index sequence, so
repeated runs generate identical active sets.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, ParameterError
from .graph import EdgeDensity, Graph, Walk, _density_values


def usage_row(walk: Walk) -> np.ndarray:
    """Traversal counts of a walk per edge; the entries sum to its hops."""
    return np.bincount(
        np.asarray(walk.edge_indices, dtype=np.int64), minlength=walk.graph.m
    )


@dataclass(frozen=True)
class UsageMatrix:
    """Rows of traversal counts for a finite active subfamily of walks."""

    walks: tuple[Walk, ...]
    counts: np.ndarray  # shape (len(walks), m), nonnegative integers

    @classmethod
    def from_walks(cls, walks: Sequence[Walk]) -> "UsageMatrix":
        walks = tuple(walks)
        if not walks:
            raise InputError("usage matrix needs at least one walk")
        m = walks[0].graph.m
        for w in walks:
            if w.graph.m != m:
                raise InputError("walks must live on the same graph")
        counts = np.vstack([usage_row(w) for w in walks])
        return cls(walks, counts)

    @property
    def num_walks(self) -> int:
        return len(self.walks)


def _check_nonnegative(rho_values: np.ndarray) -> None:
    if rho_values.size and rho_values.min() < 0.0:
        raise ParameterError("shortest-walk search requires a nonnegative density")


def _dijkstra_labels(graph: Graph, weights: np.ndarray, source_idx: int):
    """Per-vertex minimal (distance, hops) labels under nonnegative weights."""
    n = graph.n
    dist = np.full(n, math.inf)
    hops = np.full(n, -1, dtype=np.int64)
    dist[source_idx] = 0.0
    hops[source_idx] = 0
    done = [False] * n
    heap: list[tuple[float, int, int]] = [(0.0, 0, source_idx)]
    while heap:
        d, h, u = heappop(heap)
        if done[u]:
            continue
        if d != dist[u] or h != hops[u]:
            continue
        done[u] = True
        for eidx, v in graph.out_edges(u):
            nd = d + weights[eidx]
            nh = h + 1
            if nd < dist[v] or (nd == dist[v] and nh < hops[v]):
                dist[v] = nd
                hops[v] = nh
                heappush(heap, (nd, nh, v))
    return dist, hops


def rho_shortest_distances(
    graph: Graph, rho: EdgeDensity | Iterable[float], source: str
) -> np.ndarray:
    """Single-source shortest rho-distances to every vertex (inf when
    unreachable)."""
    values = _density_values(rho, graph.m)
    _check_nonnegative(values)
    dist, _ = _dijkstra_labels(graph, values, graph.vertex_index(source))
    return dist


def _lex_shortest_walk(
    graph: Graph, weights: np.ndarray, source_idx: int, target_idx: int
) -> tuple[Walk, float] | None:
    """Minimal rho-length walk, hop count then edge sequence as tie-break."""
    dist, hops = _dijkstra_labels(graph, weights, source_idx)
    if math.isinf(dist[target_idx]):
        return None

    def tight(u: int, eidx: int, v: int) -> bool:
        return dist[u] + weights[eidx] == dist[v] and hops[u] + 1 == hops[v]

    # Vertices that can still complete an optimal walk to the target.
    reach = np.zeros(graph.n, dtype=bool)
    reach[target_idx] = True
    stack = [target_idx]
    while stack:
        v = stack.pop()
        for eidx, u in graph.in_edges(v):
            if not reach[u] and tight(u, eidx, v):
                reach[u] = True
                stack.append(u)

    labels = [graph.vertices[source_idx]]
    u = source_idx
    while u != target_idx:
        step = None
        for eidx, v in graph.out_edges(u):
            if reach[v] and tight(u, eidx, v):
                step = v
                break
        if step is None:  # cannot happen: source is on an optimal walk
            raise InputError("internal search failure")
        u = step
        labels.append(graph.vertices[u])
    return Walk(graph, labels), float(dist[target_idx])


class WalkFamily(ABC):
    """Family of walks defined by a shortest-walk oracle."""

    graph: Graph

    @abstractmethod
    def shortest_walk(
        self, rho: EdgeDensity | Iterable[float]
    ) -> tuple[Walk, float] | None:
        """A member minimizing rho-length with that length, or None when the
        family is empty.  Requires ``rho >= 0``."""

    @abstractmethod
    def is_member(self, walk: Walk) -> bool:
        """Whether a walk belongs to the family."""

    def hop_shortest_walk(self) -> tuple[Walk, int] | None:
        """Member with the fewest hops (the unit-density oracle)."""
        found = self.shortest_walk(np.ones(self.graph.m))
        if found is None:
            return None
        walk, length = found
        return walk, int(round(length))

    def rho_length(self, rho: EdgeDensity | Iterable[float]) -> float:
        """Shortest rho-length over the family; +inf when empty."""
        found = self.shortest_walk(rho)
        return math.inf if found is None else found[1]


class ConnectingFamily(WalkFamily):
    """All walks from a source vertex to a distinct target vertex."""

    def __init__(self, graph: Graph, source: str, target: str) -> None:
        graph.vertex_index(source)
        graph.vertex_index(target)
        if source == target:
            raise InputError("connecting family requires distinct endpoints")
        self.graph = graph
        self.source = source
        self.target = target

    def shortest_walk(self, rho):
        values = _density_values(rho, self.graph.m)
        _check_nonnegative(values)
        return _lex_shortest_walk(
            self.graph,
            values,
            self.graph.vertex_index(self.source),
            self.graph.vertex_index(self.target),
        )

    def is_member(self, walk: Walk) -> bool:
        return (
            walk.graph.same_structure(self.graph)
            and walk.source == self.source
            and walk.target == self.target
        )

    def __repr__(self) -> str:
        return f"ConnectingFamily({self.source!r} -> {self.target!r})"


class ViaVertexFamily(WalkFamily):
    """Walks from source to target that pass through a given vertex.

    The oracle concatenates a shortest source-to-via walk with a shortest
    via-to-target walk.  This is valid because members are walks, not simple
    paths: the two halves may reuse edges, and splitting any member at its
    first visit of the via vertex shows the concatenated value is optimal.
    """

    def __init__(self, graph: Graph, source: str, via: str, target: str) -> None:
        for v in (source, via, target):
            graph.vertex_index(v)
        if via in (source, target):
            raise InputError("via vertex must differ from both endpoints")
        self.graph = graph
        self.source = source
        self.via = via
        self.target = target

    def shortest_walk(self, rho):
        values = _density_values(rho, self.graph.m)
        _check_nonnegative(values)
        s = self.graph.vertex_index(self.source)
        v = self.graph.vertex_index(self.via)
        t = self.graph.vertex_index(self.target)
        first = _lex_shortest_walk(self.graph, values, s, v)
        if first is None:
            return None
        second = _lex_shortest_walk(self.graph, values, v, t)
        if second is None:
            return None
        walk = Walk(
            self.graph, first[0].vertex_labels + second[0].vertex_labels[1:]
        )
        return walk, first[1] + second[1]

    def is_member(self, walk: Walk) -> bool:
        return (
            walk.graph.same_structure(self.graph)
            and walk.source == self.source
            and walk.target == self.target
            and self.via in walk.vertex_labels[1:-1]
        )

    def __repr__(self) -> str:
        return (
            f"ViaVertexFamily({self.source!r} -> {self.via!r} -> {self.target!r})"
        )


class ExplicitFamily(WalkFamily):
    """A finite, user-supplied list of walks; validated at construction."""

    def __init__(self, graph: Graph, walks: Sequence[Walk]) -> None:
        self.graph = graph
        for w in walks:
            if not w.graph.same_structure(graph):
                raise InputError("walk does not live on this graph")
        self.walks = tuple(walks)

    def shortest_walk(self, rho):
        values = _density_values(rho, self.graph.m)
        _check_nonnegative(values)
        if not self.walks:
            return None
        best = min(
            self.walks,
            key=lambda w: (
                sum(values[k] for k in w.edge_indices),
                w.hops,
                w.edge_indices,
            ),
        )
        return best, float(sum(values[k] for k in best.edge_indices))

    def is_member(self, walk: Walk) -> bool:
        return walk in self.walks

    def __repr__(self) -> str:
        return f"ExplicitFamily({len(self.walks)} walks)"
