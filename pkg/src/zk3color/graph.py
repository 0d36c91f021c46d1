"""Simple graphs, DIMACS .col parsing, 3-colorings and small exact solvers.

Colors are the fixed palette blue/red/yellow with indices 0/1/2; the index
doubles as the signal-state index during the protocol.  The exact solvers
enumerate lexicographically (vertex 0 varies slowest) and are deterministic:
they return the first valid coloring, or the first coloring with the fewest
monochromatic edges.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import Sequence

__all__ = [
    "Color",
    "Graph",
    "Coloring",
    "PERMUTATIONS",
    "DimacsError",
    "parse_dimacs",
    "to_dimacs",
    "is_valid_3coloring",
    "bad_edges",
    "permute_colors",
    "brute_force_3color",
    "best_near_coloring",
]

MAX_EXACT_VERTICES = 20


class Color(IntEnum):
    BLUE = 0
    RED = 1
    YELLOW = 2
    # single-letter aliases
    B = 0
    R = 1
    Y = 2


Coloring = tuple[int, ...]

# the six bijections of {0, 1, 2}, lexicographic; entry p maps color c to p[c]
PERMUTATIONS: tuple[tuple[int, int, int], ...] = tuple(itertools.permutations((0, 1, 2)))


class DimacsError(ValueError):
    """Malformed DIMACS .col input; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph; edges stored 0-indexed with u < v."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"graph needs at least one vertex, got n={self.n}")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range or not ordered u < v")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        neighbors: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            neighbors[u].add(v)
            neighbors[v].add(u)
        return tuple(frozenset(s) for s in neighbors)

    @cached_property
    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    def size_bounds_ok(self) -> bool:
        """n - 1 <= m <= n^2 / 2, guaranteed for simple connected graphs."""
        return self.n - 1 <= self.m <= self.n * self.n / 2


def parse_dimacs(text: str) -> Graph:
    """Parse DIMACS .col: 'c' comments, one 'p edge n m' line, then 'e u v' lines.

    Vertices are 1-indexed in the file and 0-indexed in the result.  Raises
    :class:`DimacsError` with a line number for malformed lines, out-of-range
    or duplicate edges, self-loops, and an edge count that contradicts the
    problem line.  Accepting a disconnected graph only warns; the protocol
    still runs on it.
    """
    n: int | None = None
    declared_m: int | None = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        kind = tokens[0]
        if kind == "c":
            continue
        if kind == "p":
            if n is not None:
                raise DimacsError("duplicate problem line", lineno)
            if len(tokens) != 4 or tokens[1] != "edge":
                raise DimacsError(f"expected 'p edge <n> <m>', got {raw.strip()!r}", lineno)
            try:
                n = int(tokens[2])
                declared_m = int(tokens[3])
            except ValueError:
                raise DimacsError(f"non-integer problem sizes in {raw.strip()!r}", lineno) from None
            if n < 1 or declared_m < 0:
                raise DimacsError(f"invalid sizes n={n}, m={declared_m}", lineno)
        elif kind == "e":
            if n is None:
                raise DimacsError("edge before problem line", lineno)
            if len(tokens) != 3:
                raise DimacsError(f"expected 'e <u> <v>', got {raw.strip()!r}", lineno)
            try:
                u = int(tokens[1])
                v = int(tokens[2])
            except ValueError:
                raise DimacsError(f"non-integer edge endpoints in {raw.strip()!r}", lineno) from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsError(f"vertex out of range in edge ({u}, {v}) with n={n}", lineno)
            if u == v:
                raise DimacsError(f"self-loop at vertex {u}", lineno)
            edge = (min(u, v) - 1, max(u, v) - 1)
            if edge in seen:
                raise DimacsError(f"duplicate edge ({u}, {v})", lineno)
            seen.add(edge)
            edges.append(edge)
        else:
            raise DimacsError(f"unknown line type {kind!r}", lineno)

    if n is None:
        raise DimacsError("missing problem line")
    if declared_m != len(edges):
        raise DimacsError(f"problem line declares {declared_m} edges, found {len(edges)}")

    graph = Graph(n=n, edges=tuple(edges))
    if not graph.is_connected:
        warnings.warn(f"graph is disconnected (n={n}, m={graph.m})", stacklevel=2)
    return graph


def to_dimacs(graph: Graph) -> str:
    """Canonical DIMACS text: sorted edges, 1-indexed, no comments."""
    lines = [f"p edge {graph.n} {graph.m}"]
    for u, v in sorted(graph.edges):
        lines.append(f"e {u + 1} {v + 1}")
    return "\n".join(lines) + "\n"


def _check_length(graph: Graph, colors: Sequence[int]) -> None:
    if len(colors) != graph.n:
        raise ValueError(f"coloring has {len(colors)} entries for {graph.n} vertices")


def is_valid_3coloring(graph: Graph, colors: Sequence[int]) -> bool:
    """True iff no edge joins two vertices of the same color."""
    _check_length(graph, colors)
    return all(colors[u] != colors[v] for u, v in graph.edges)


def bad_edges(graph: Graph, colors: Sequence[int]) -> tuple[tuple[int, int], ...]:
    """Monochromatic edges of an assignment, in edge order."""
    _check_length(graph, colors)
    return tuple((u, v) for u, v in graph.edges if colors[u] == colors[v])


def permute_colors(colors: Sequence[int], perm: Sequence[int]) -> Coloring:
    """Apply a color permutation pointwise; validity is preserved."""
    if sorted(perm) != [0, 1, 2]:
        raise ValueError(f"not a permutation of (0, 1, 2): {tuple(perm)}")
    return tuple(perm[c] for c in colors)


def _require_small(graph: Graph) -> None:
    if graph.n > MAX_EXACT_VERTICES:
        raise ValueError(
            f"exact search limited to {MAX_EXACT_VERTICES} vertices, got n={graph.n}"
        )


def brute_force_3color(graph: Graph) -> Coloring | None:
    """First valid 3-coloring in lexicographic order, or None.

    Depth-first search over color assignments with conflict pruning; prunes
    never skip the lexicographically first solution.
    """
    _require_small(graph)
    adjacency = graph.adjacency
    colors: list[int] = []

    def extend(vertex: int) -> Coloring | None:
        if vertex == graph.n:
            return tuple(colors)
        for c in range(3):
            if any(w < vertex and colors[w] == c for w in adjacency[vertex]):
                continue
            colors.append(c)
            found = extend(vertex + 1)
            if found is not None:
                return found
            colors.pop()
        return None

    return extend(0)


def best_near_coloring(graph: Graph) -> tuple[Coloring, frozenset[tuple[int, int]]]:
    """Assignment minimizing monochromatic edges, with that edge set.

    Lexicographic depth-first branch and bound: a partial assignment is
    abandoned once its violations reach the incumbent's count, and the
    incumbent is replaced only on strict improvement, so the result is the
    lexicographically first minimizer.  The edge set is empty iff the graph
    is 3-colorable.
    """
    _require_small(graph)
    adjacency = graph.adjacency
    colors: list[int] = []
    best_count = graph.m + 1
    best: Coloring | None = None

    def extend(vertex: int, violations: int) -> None:
        nonlocal best_count, best
        if violations >= best_count:
            return
        if vertex == graph.n:
            best_count = violations
            best = tuple(colors)
            return
        for c in range(3):
            added = sum(1 for w in adjacency[vertex] if w < vertex and colors[w] == c)
            colors.append(c)
            extend(vertex + 1, violations + added)
            colors.pop()

    extend(0, 0)
    assert best is not None
    return best, frozenset(bad_edges(graph, best))
