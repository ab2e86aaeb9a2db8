"""Unstructured network graphs.

Protocol code only ever sees adjacency through :func:`neighbors` and
:func:`neighborhood_of_set`; node positions are generation metadata used by
Euclidean metrics and never by a protocol decision.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from drw_pubsub import rng as rngmod
from drw_pubsub.errors import ParameterError, ParseError

_NODES_HINT = re.compile(r"^#\s*nodes\s+(\d+)\s*$")


@dataclass(frozen=True)
class Topology:
    """Immutable undirected graph on nodes ``0..n-1``.

    Attributes:
        n: Number of nodes.
        adjacency: ``adjacency[a]`` is the neighbor set of node ``a``.
        positions: ``(n, 2)`` array in the unit square, or None for graphs
            loaded without a position file.
        radius: Connection radius used at generation time, or None.
    """

    n: int
    adjacency: Tuple[FrozenSet[int], ...]
    positions: Optional[np.ndarray] = None
    radius: Optional[float] = None

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise ParameterError(f"adjacency has {len(self.adjacency)} rows for n={self.n}")
        if self.positions is not None:
            self.positions.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return sum(len(nb) for nb in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Sorted list of edges ``(a, b)`` with ``a < b``."""
        return sorted((a, b) for a, nb in enumerate(self.adjacency) for b in nb if a < b)

    def degree(self, a: int) -> int:
        return len(neighbors(self, a))

    def has_positions(self) -> bool:
        return self.positions is not None


def _check_node(t: Topology, a: int) -> None:
    if not 0 <= a < t.n:
        raise ParameterError(f"node {a} out of range [0, {t.n})")


def from_edges(n: int, edges: Iterable[tuple[int, int]], positions=None, radius=None) -> Topology:
    """Build a topology from an edge iterable, applying symmetric closure."""
    adj: list[set[int]] = [set() for _ in range(n)]
    for a, b in edges:
        if a == b:
            raise ParameterError(f"self-loop on node {a}")
        if not (0 <= a < n and 0 <= b < n):
            raise ParameterError(f"edge ({a}, {b}) out of range [0, {n})")
        adj[a].add(b)
        adj[b].add(a)
    return Topology(n, tuple(frozenset(s) for s in adj), positions, radius)


def from_positions(positions: Sequence[Sequence[float]], radius: float) -> Topology:
    """Unit-disk graph over explicit positions: edge iff distance <= radius."""
    pts = np.asarray(positions, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 1:
        raise ParameterError("need at least one node")
    if not 0 < radius <= math.sqrt(2):
        raise ParameterError(f"radius must be in (0, sqrt(2)], got {radius}")
    if np.any(pts < 0) or np.any(pts > 1):
        raise ParameterError("positions must lie in the unit square")
    pairs = cKDTree(pts).query_pairs(radius, output_type="ndarray")
    return from_edges(n, map(tuple, pairs.tolist()), positions=pts.copy(), radius=float(radius))


def generate_unit_disk(n: int, radius: float, rng_seed: int) -> Topology:
    """Draw ``n`` uniform points in the unit square and connect pairs within ``radius``.

    Positions come from the topology stream of ``rng_seed`` only, so the same
    seed yields the same node placement for every radius.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    if not 0 < radius <= math.sqrt(2):
        raise ParameterError(f"radius must be in (0, sqrt(2)], got {radius}")
    gen = rngmod.stream(rng_seed, rngmod.TOPOLOGY)
    pts = gen.random((int(n), 2))
    return from_positions(pts, radius)


def load_edge_list(text: str, positions_text: Optional[str] = None) -> Topology:
    """Parse an edge-list document.

    One edge per line as two whitespace-separated decimal ids; ``#`` lines are
    comments. A ``# nodes N`` comment, when present, fixes the node count
    (so isolated trailing nodes survive a round trip) and makes ids ``>= N``
    an error. Otherwise ``n`` is one more than the largest id seen.
    """
    declared: Optional[int] = None
    edges: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _NODES_HINT.match(line)
            if m:
                declared = int(m.group(1))
            continue
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ParseError(f"expected two decimal node ids, got {raw!r}", lineno)
        a, b = int(parts[0]), int(parts[1])
        if a == b:
            raise ParseError(f"self-loop on node {a}", lineno)
        edges.append((a, b, lineno))

    n = declared if declared is not None else 1 + max((max(a, b) for a, b, _ in edges), default=-1)
    for a, b, lineno in edges:
        if a >= n or b >= n:
            raise ParseError(f"node id out of range [0, {n})", lineno)
    if n < 1:
        raise ParseError("document declares no nodes")

    pts = load_positions(positions_text, n) if positions_text is not None else None
    return from_edges(n, ((a, b) for a, b, _ in edges), positions=pts)


def load_positions(text: str, n: int) -> np.ndarray:
    """Parse a companion position file of ``id x y`` lines."""
    pts = np.full((n, 2), np.nan)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            idx, x, y = int(parts[0]), float(parts[1]), float(parts[2])
        except (ValueError, IndexError):
            raise ParseError(f"expected 'id x y', got {raw!r}", lineno) from None
        if len(parts) != 3:
            raise ParseError(f"expected 'id x y', got {raw!r}", lineno)
        if not 0 <= idx < n:
            raise ParseError(f"node id out of range [0, {n})", lineno)
        if not (0 <= x <= 1 and 0 <= y <= 1):
            raise ParseError("coordinates must lie in [0, 1]", lineno)
        pts[idx] = (x, y)
    if np.isnan(pts).any():
        missing = int(np.isnan(pts[:, 0]).sum())
        raise ParseError(f"{missing} node(s) have no position")
    return pts


def dump_edge_list(t: Topology) -> str:
    lines = [f"# nodes {t.n}"]
    lines += [f"{a} {b}" for a, b in t.edges()]
    return "\n".join(lines) + "\n"


def dump_positions(t: Topology) -> str:
    if t.positions is None:
        raise ParameterError("topology has no positions")
    return "".join(f"{i} {x!r} {y!r}\n" for i, (x, y) in enumerate(t.positions.tolist()))


def neighbors(t: Topology, a: int) -> FrozenSet[int]:
    """N(a): the adjacency set of ``a``."""
    _check_node(t, a)
    return t.adjacency[a]


def neighborhood_of_set(t: Topology, s: Iterable[int]) -> set[int]:
    """Union of N(a) over ``a`` in ``s``.

    Members of ``s`` are not removed, so interior nodes of a path show up in
    the neighborhood of the path. Apply twice for the second neighborhood.
    """
    out: set[int] = set()
    for a in s:
        _check_node(t, a)
        out |= t.adjacency[a]
    return out


def connected_component(t: Topology, a: int) -> set[int]:
    """Breadth-first component containing ``a``."""
    _check_node(t, a)
    seen = {a}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        for v in t.adjacency[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen
