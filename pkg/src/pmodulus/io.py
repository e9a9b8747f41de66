"""Graph documents: JSON and edge-list parsing and serialization.

Both formats preserve vertex and edge order, so parse -> serialize -> parse
reproduces the graph exactly, weights bit for bit.
"""

from __future__ import annotations

import json

from .errors import InputError
from .graph import Graph

FORMATS = ("json", "edgelist")


def parse_graph(text: str | bytes, fmt: str) -> Graph:
    """Parse a graph document in the named format ("json" or "edgelist")."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"input is not valid UTF-8: {exc}") from None
    if fmt == "json":
        return _parse_json(text)
    if fmt == "edgelist":
        return _parse_edgelist(text)
    raise InputError(f"unknown graph format {fmt!r}; expected one of {FORMATS}")


def _parse_json(text: str) -> Graph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(doc, dict):
        raise InputError("graph document must be a JSON object")
    directed = doc.get("directed", False)
    if not isinstance(directed, bool):
        raise InputError("'directed' must be a boolean")
    vertices = doc.get("vertices")
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise InputError("'vertices' must be a list of strings")
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_edges, list):
        raise InputError("'edges' must be a list")

    declared = set(vertices)
    edges: list[tuple[str, str]] = []
    sigma: list[float] = []
    for k, rec in enumerate(raw_edges):
        if not isinstance(rec, dict):
            raise InputError(f"edge {k} must be an object with tail/head")
        try:
            tail, head = rec["tail"], rec["head"]
        except KeyError as exc:
            raise InputError(f"edge {k} is missing field {exc}") from None
        for v in (tail, head):
            if not isinstance(v, str):
                raise InputError(f"edge {k} endpoints must be strings")
            if v not in declared:
                raise InputError(f"unknown vertex {v!r} in edge {k}")
        weight = rec.get("sigma", 1.0)
        if isinstance(weight, bool) or not isinstance(weight, (int, float)):
            raise InputError(f"malformed number for sigma in edge {k}")
        if not weight > 0.0:
            raise InputError(f"nonpositive weight {weight} in edge {k}")
        edges.append((tail, head))
        sigma.append(float(weight))
    return Graph(vertices, edges, sigma, directed=directed)


def _parse_edgelist(text: str) -> Graph:
    directed: bool | None = None
    vertices: list[str] = []
    seen_vertices: set[str] = set()
    edges: list[tuple[str, str]] = []
    seen_edges: set[tuple[str, str]] = set()
    sigma: list[float] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if directed is None:
            if len(tokens) == 1 and tokens[0] in ("directed", "undirected"):
                directed = tokens[0] == "directed"
                continue
            raise InputError(
                f"line {lineno}: expected header 'directed' or 'undirected'"
            )
        if len(tokens) not in (2, 3):
            raise InputError(
                f"line {lineno}: expected 'tail head [sigma]', got {len(tokens)} fields"
            )
        tail, head = tokens[0], tokens[1]
        if len(tokens) == 3:
            try:
                weight = float(tokens[2])
            except ValueError:
                raise InputError(
                    f"line {lineno}: malformed number {tokens[2]!r}"
                ) from None
        else:
            weight = 1.0
        if not weight > 0.0:
            raise InputError(f"line {lineno}: nonpositive weight {weight}")
        if tail == head:
            raise InputError(f"line {lineno}: self-loop on {tail!r}")
        key = (tail, head)
        if key in seen_edges or (not directed and (head, tail) in seen_edges):
            raise InputError(f"line {lineno}: duplicate edge {tail} {head}")
        seen_edges.add(key)
        for v in (tail, head):
            if v not in seen_vertices:
                seen_vertices.add(v)
                vertices.append(v)
        edges.append(key)
        sigma.append(weight)

    if directed is None:
        raise InputError("empty edge list: missing 'directed'/'undirected' header")
    if not vertices:
        raise InputError("edge list declares no vertices")
    return Graph(vertices, edges, sigma, directed=directed)


def graph_to_json(graph: Graph) -> str:
    """Serialize a graph to its JSON document form."""
    doc = {
        "directed": graph.directed,
        "vertices": list(graph.vertices),
        "edges": [
            {"tail": tail, "head": head, "sigma": float(w)}
            for (tail, head), w in zip(graph.edges, graph.sigma)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def graph_to_edgelist(graph: Graph) -> str:
    """Serialize a graph to edge-list form (isolated vertices are dropped)."""
    lines = ["directed" if graph.directed else "undirected"]
    for (tail, head), w in zip(graph.edges, graph.sigma):
        lines.append(f"{tail} {head} {w!r}")
    return "\n".join(lines) + "\n"


def guess_format(path: str) -> str:
    return "json" if path.lower().endswith(".json") else "edgelist"
