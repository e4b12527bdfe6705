"""Two-colorable simple graphs.

Vertices are numbered ``1..n``. The bipartition is always computed here by
breadth-first 2-coloring; callers never supply a coloring.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import InvalidEdge, InvalidParams, InvalidVertex, NotTwoColorable

Edge = tuple[int, int]


@dataclass(frozen=True)
class ColoredGraph:
    n: int
    edges: tuple[Edge, ...]
    s1: frozenset[int]
    s2: frozenset[int]
    _adj: tuple[frozenset[int], ...] = field(repr=False, compare=False, default=())

    def color(self, v: int) -> int:
        """Color class (1 or 2) of vertex ``v``."""
        _check_vertex(self, v)
        return 1 if v in self.s1 else 2

    def color_class(self, j: int) -> frozenset[int]:
        if j == 1:
            return self.s1
        if j == 2:
            return self.s2
        raise InvalidParams(f"color index must be 1 or 2, got {j}")

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def to_record(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_record(cls, record: dict) -> "ColoredGraph":
        # any coloring present in the record is ignored
        return build_colored_graph(int(record["n"]), [tuple(e) for e in record["edges"]])


def _check_vertex(g: ColoredGraph, v: int) -> None:
    if not (isinstance(v, int) and 1 <= v <= g.n):
        raise InvalidVertex(f"vertex {v!r} not in 1..{g.n}")


def normalize_edges(n: int, edges: Iterable[Iterable[int]]) -> tuple[Edge, ...]:
    """Validate an edge list and return it as sorted ``(lo, hi)`` pairs.

    Raises InvalidEdge on self-loops, out-of-range endpoints or duplicates.
    """
    seen: set[Edge] = set()
    for e in edges:
        pair = tuple(int(v) for v in e)
        if len(pair) != 2:
            raise InvalidEdge(f"edge {e!r} is not a pair")
        i, j = pair
        if not (1 <= i <= n and 1 <= j <= n):
            raise InvalidEdge(f"edge ({i}, {j}) has an endpoint outside 1..{n}")
        if i == j:
            raise InvalidEdge(f"self-loop at vertex {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise InvalidEdge(f"duplicate edge {key}")
        seen.add(key)
    return tuple(sorted(seen))


def build_colored_graph(n: int, edges: Iterable[Iterable[int]]) -> ColoredGraph:
    """Build a graph on ``1..n`` and 2-color it.

    Per connected component the larger color class goes to ``s1``; when the
    two classes have equal size, the class holding the component's
    lowest-numbered vertex goes to ``s1``.
    """
    if not isinstance(n, int) or n < 1:
        raise InvalidParams(f"vertex count must be a positive integer, got {n!r}")
    norm = normalize_edges(n, edges)
    adj: list[set[int]] = [set() for _ in range(n + 1)]
    for i, j in norm:
        adj[i].add(j)
        adj[j].add(i)

    color = [0] * (n + 1)
    s1: set[int] = set()
    s2: set[int] = set()
    for root in range(1, n + 1):
        if color[root]:
            continue
        color[root] = 1
        classes: tuple[list[int], list[int]] = ([root], [])
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in sorted(adj[u]):
                if color[w] == 0:
                    color[w] = 3 - color[u]
                    classes[color[w] - 1].append(w)
                    queue.append(w)
                elif color[w] == color[u]:
                    raise NotTwoColorable(f"odd cycle through edge ({min(u, w)}, {max(u, w)})")
        a, b = classes
        # root is the component's lowest vertex and always lands in ``a``
        if len(b) > len(a):
            a, b = b, a
        s1.update(a)
        s2.update(b)

    return ColoredGraph(
        n=n,
        edges=norm,
        s1=frozenset(s1),
        s2=frozenset(s2),
        _adj=tuple(frozenset(x) for x in adj),
    )


def neighbors(g: ColoredGraph, i: int) -> frozenset[int]:
    _check_vertex(g, i)
    return g._adj[i]


def standard_graph(kind: str, *params: int) -> ColoredGraph:
    """Fixture graphs with a canonical labeling.

    ``path n``, ``even_cycle n`` (n even, n >= 4) and ``grid rows cols``
    (row-major labels, so vertex ``r*cols + c + 1`` sits at row r, column c).
    """
    if kind == "path":
        (n,) = _params(kind, params, 1)
        return build_colored_graph(n, [(i, i + 1) for i in range(1, n)])
    if kind in ("even_cycle", "cycle"):
        (n,) = _params(kind, params, 1)
        if n < 4 or n % 2:
            raise InvalidParams(f"even cycle needs an even length >= 4, got {n}")
        return build_colored_graph(n, [(i, i % n + 1) for i in range(1, n + 1)])
    if kind == "grid":
        rows, cols = _params(kind, params, 2)
        if rows < 1 or cols < 1:
            raise InvalidParams(f"grid dimensions must be positive, got {rows}x{cols}")
        label = lambda r, c: r * cols + c + 1  # noqa: E731
        edges = []
        for r in range(rows):
            for c in range(cols):
                if c + 1 < cols:
                    edges.append((label(r, c), label(r, c + 1)))
                if r + 1 < rows:
                    edges.append((label(r, c), label(r + 1, c)))
        return build_colored_graph(rows * cols, edges)
    raise InvalidParams(f"unknown graph kind {kind!r}")


def _params(kind: str, params: tuple[int, ...], count: int) -> tuple[int, ...]:
    if len(params) != count:
        raise InvalidParams(f"{kind} takes {count} integer parameter(s), got {params!r}")
    try:
        return tuple(int(p) for p in params)
    except (TypeError, ValueError) as exc:
        raise InvalidParams(f"bad parameters for {kind}: {params!r}") from exc


def parse_graph_spec(spec: str) -> ColoredGraph:
    """Resolve a ``--graph`` argument.

    Accepts an inline fixture (``path:5``, ``cycle:6``, ``grid:2x3``) or a path
    to a JSON file holding ``{"n": ..., "edges": [[i, j], ...]}``.
    """
    if ":" in spec and not Path(spec).exists():
        kind, _, rest = spec.partition(":")
        parts = rest.replace("x", ",").split(",")
        return standard_graph(kind, *parts)
    return load_graph(spec)


def load_graph(path: str | Path) -> ColoredGraph:
    with open(path) as fh:
        record = json.load(fh)
    if not isinstance(record, dict) or "n" not in record or "edges" not in record:
        raise InvalidParams(f"{path}: graph file needs fields 'n' and 'edges'")
    return ColoredGraph.from_record(record)


def dump_graph(g: ColoredGraph, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_record(), fh)
        fh.write("\n")
