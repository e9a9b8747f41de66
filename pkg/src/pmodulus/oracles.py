"""Independent classical computations used to cross-check the solver.

Breadth-first hop distance, effective conductance through a dense Laplacian
solve, and augmenting-path max flow with a verified minimum cut.  These
share no code with the modulus solver on purpose.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InputError, InternalError, UnsupportedOperationError
from .graph import Graph


@dataclass(frozen=True)
class FlowResult:
    """Max-flow value together with a minimum cut achieving it.

    ``cut_edges`` holds canonical edge indices; removing them disconnects
    the source from the target, and their total capacity equals ``value``.
    """

    value: float
    cut_edges: tuple[int, ...]


def shortest_hops(graph: Graph, source: str, target: str) -> int | None:
    """Breadth-first hop distance, or None when no walk connects the pair."""
    s = graph.vertex_index(source)
    t = graph.vertex_index(target)
    if s == t:
        raise InputError("source and target must be distinct")
    dist = [-1] * graph.n
    dist[s] = 0
    queue = deque([s])
    while queue:
        u = queue.popleft()
        if u == t:
            return dist[t]
        for _, v in graph.out_edges(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return None


def effective_conductance(graph: Graph, source: str, target: str) -> float:
    """Conductance between two vertices of an undirected resistor network.

    Solves the weighted Laplacian system for the potential fixed to 0 at the
    source and 1 at the target (dense elimination with partial pivoting) and
    returns the dissipated power, which equals the effective conductance.
    """
    if graph.directed:
        raise UnsupportedOperationError(
            "effective conductance is defined for undirected graphs"
        )
    s = graph.vertex_index(source)
    t = graph.vertex_index(target)
    if s == t:
        raise InputError("source and target must be distinct")

    # Restrict to the component containing the pair; the grounded Laplacian
    # is singular otherwise.
    component = [False] * graph.n
    component[s] = True
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for _, v in graph.out_edges(u):
            if not component[v]:
                component[v] = True
                queue.append(v)
    if not component[t]:
        raise InputError("source and target are not connected")

    order = [v for v in range(graph.n) if component[v] and v not in (s, t)]
    position = {v: i for i, v in enumerate(order)}
    size = len(order)
    lap = np.zeros((size, size))
    rhs = np.zeros(size)
    phi = np.zeros(graph.n)
    phi[t] = 1.0
    for k, (tail, head) in enumerate(graph.edges):
        a, b = graph.vertex_index(tail), graph.vertex_index(head)
        if not (component[a] and component[b]):
            continue
        w = graph.sigma[k]
        for x, y in ((a, b), (b, a)):
            if x in position:
                i = position[x]
                lap[i, i] += w
                if y in position:
                    lap[i, position[y]] -= w
                elif y == t:
                    rhs[i] += w
    if size:
        phi[order] = np.linalg.solve(lap, rhs)

    power = 0.0
    for k, (tail, head) in enumerate(graph.edges):
        a, b = graph.vertex_index(tail), graph.vertex_index(head)
        if component[a] and component[b]:
            power += graph.sigma[k] * (phi[a] - phi[b]) ** 2
    return float(power)


def max_flow_min_cut(graph: Graph, source: str, target: str) -> FlowResult:
    """Max flow with capacities given by the edge weights.

    Shortest augmenting paths (breadth first), deterministic arc order.  An
    undirected edge becomes two opposed arcs that share its capacity, which
    matches the walk-based picture where either traversal direction consumes
    the edge.  The returned cut is re-verified to disconnect the pair and to
    match the flow value.
    """
    s = graph.vertex_index(source)
    t = graph.vertex_index(target)
    if s == t:
        raise InputError("source and target must be distinct")

    # Arcs 2k and 2k+1 are the forward and reverse sides of edge k.
    arc_to: list[int] = []
    residual: list[float] = []
    adjacency: list[list[int]] = [[] for _ in range(graph.n)]
    for k, (tail, head) in enumerate(graph.edges):
        a, b = graph.vertex_index(tail), graph.vertex_index(head)
        cap = float(graph.sigma[k])
        arc_to.extend([b, a])
        residual.extend([cap, cap if not graph.directed else 0.0])
        adjacency[a].append(2 * k)
        adjacency[b].append(2 * k + 1)

    cap_scale = float(graph.sigma.max()) if graph.m else 1.0
    active = 1e-12 * cap_scale

    def find_path() -> list[int] | None:
        parent_arc = [-1] * graph.n
        parent_arc[s] = -2
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for arc in adjacency[u]:
                v = arc_to[arc]
                if parent_arc[v] == -1 and residual[arc] > active:
                    parent_arc[v] = arc
                    if v == t:
                        arcs = []
                        while v != s:
                            arcs.append(parent_arc[v])
                            v = arc_to[parent_arc[v] ^ 1]
                        arcs.reverse()
                        return arcs
                    queue.append(v)
        return None

    value = 0.0
    while True:
        arcs = find_path()
        if arcs is None:
            break
        push = min(residual[a] for a in arcs)
        for a in arcs:
            residual[a] -= push
            residual[a ^ 1] += push
        value += push

    reachable = [False] * graph.n
    reachable[s] = True
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for arc in adjacency[u]:
            v = arc_to[arc]
            if not reachable[v] and residual[arc] > active:
                reachable[v] = True
                queue.append(v)

    cut = []
    for k, (tail, head) in enumerate(graph.edges):
        a, b = graph.vertex_index(tail), graph.vertex_index(head)
        crosses = (reachable[a] and not reachable[b]) or (
            not graph.directed and reachable[b] and not reachable[a]
        )
        if crosses:
            cut.append(k)

    cut_value = float(sum(graph.sigma[k] for k in cut))
    if abs(cut_value - value) > 1e-9 * max(1.0, cap_scale) * max(1, graph.m):
        raise InternalError(
            f"flow value {value} and cut value {cut_value} disagree"
        )
    if not _cut_disconnects(graph, set(cut), s, t):
        raise InternalError("reported cut does not disconnect the pair")
    return FlowResult(value=value, cut_edges=tuple(cut))


def _cut_disconnects(graph: Graph, cut: set[int], s: int, t: int) -> bool:
    seen = [False] * graph.n
    seen[s] = True
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for eidx, v in graph.out_edges(u):
            if eidx not in cut and not seen[v]:
                seen[v] = True
                queue.append(v)
    return not seen[t]
