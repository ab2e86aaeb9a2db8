"""Run-level measurements: intersection timing, load and path geometry."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from drw_pubsub.topology import Topology


@dataclass(frozen=True)
class LoadProfile:
    per_node_load: Dict[int, int] = field(default_factory=dict)
    nodes_used: int = 0
    max_load: int = 0
    gini: float = 0.0

    @property
    def total(self) -> int:
        return sum(self.per_node_load.values())


def gini(values: Iterable[float]) -> float:
    """Gini coefficient by the sorted-cumulative formula.

    ``G = 2 * sum(i * x_(i)) / (n * sum(x)) - (n + 1) / n`` with the values
    sorted ascending and ``i`` counted from 1. Empty or all-zero input gives 0.
    """
    xs = sorted(values)
    n = len(xs)
    total = sum(xs)
    if n == 0 or total == 0:
        return 0.0
    weighted = sum(i * x for i, x in enumerate(xs, start=1))
    g = 2.0 * weighted / (n * total) - (n + 1) / n
    return max(0.0, g)


def load_profile(events: Iterable[Tuple[int, str]]) -> LoadProfile:
    """Aggregate ``(node, event label)`` pairs into per-node message counts."""
    counts = Counter(node for node, _ in events)
    loads = dict(sorted(counts.items()))
    return LoadProfile(
        per_node_load=loads,
        nodes_used=len(loads),
        max_load=max(loads.values(), default=0),
        gini=gini(loads.values()),
    )


def flooding_profile(n: int, messages: int) -> LoadProfile:
    """Reference profile of flooding: every node handles every message once."""
    loads = {a: messages for a in range(n)} if messages > 0 else {}
    return LoadProfile(loads, len(loads), messages if loads else 0, gini(loads.values()))


def euclidean_displacement(t: Topology, path: Sequence[int]) -> Optional[float]:
    """Straight-line distance between the first and last node of ``path``."""
    if not path:
        raise ValueError("path must be nonempty")
    if t.positions is None:
        return None
    (x0, y0), (x1, y1) = t.positions[path[0]], t.positions[path[-1]]
    return math.hypot(float(x1 - x0), float(y1 - y0))


def intersection_step(stamps_a: Mapping[int, int], stamps_b: Mapping[int, int]) -> Optional[int]:
    """Smallest round at which some node has been reached by both walks.

    Each argument maps a node to the step at which that walk first reached it.
    """
    if len(stamps_b) < len(stamps_a):
        stamps_a, stamps_b = stamps_b, stamps_a
    best = None
    for node, sa in stamps_a.items():
        sb = stamps_b.get(node)
        if sb is not None:
            r = max(sa, sb)
            if best is None or r < best:
                best = r
    return best


def path_stamps(path: Sequence[int]) -> Dict[int, int]:
    """First-visit stamps for a single node sequence."""
    out: Dict[int, int] = {}
    for i, v in enumerate(path):
        out.setdefault(v, i)
    return out
