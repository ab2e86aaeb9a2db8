"""Pure random walks and the two directional random walk (DRW) heuristics.

A walk is a small state machine over a read-only :class:`Topology`. Each
branch grows a simple path from the shared origin; no node is ever added twice
to the same walk. The two DRW heuristics pick, among the unvisited neighbors
of the branch tip, the candidate whose neighborhood overlaps least with the
walk's recent past:

* ``DRW_WEIGHTED`` scores a candidate ``z`` by ``|N(x) & N(z)|`` where ``x``
  is the node before the tip, plus any penalty accumulated at ``z``.
* ``DRW_MARKING`` scores a candidate ``v`` by
  ``alpha * |N(v) & N(W)| + beta * |N(v) & N(N(W))|`` where ``W`` is the set
  of walk members. ``N(W)`` and ``N(N(W))`` are the first- and second-level
  marks, maintained incrementally as nodes join.

Ties go to the smallest node id unless ``tie="random"``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set

import numpy as np

from drw_pubsub.errors import ParameterError, WalkStateError
from drw_pubsub.topology import Topology, neighborhood_of_set, neighbors


class WalkKind(str, enum.Enum):
    PURE_RANDOM = "pure"
    DRW_WEIGHTED = "drw-a"
    DRW_MARKING = "drw-b"

    @classmethod
    def parse(cls, text: str) -> "WalkKind":
        aliases = {
            "pure": cls.PURE_RANDOM,
            "purerandom": cls.PURE_RANDOM,
            "drw-a": cls.DRW_WEIGHTED,
            "drwweighted": cls.DRW_WEIGHTED,
            "drw-b": cls.DRW_MARKING,
            "drwmarking": cls.DRW_MARKING,
        }
        key = text.strip().lower().replace("_", "")
        if key not in aliases:
            raise ParameterError(f"unknown walk kind {text!r}")
        return aliases[key]


class BranchStatus(str, enum.Enum):
    ACTIVE = "active"
    STUCK = "stuck"
    EXHAUSTED = "exhausted"


def default_ttl(n: int) -> int:
    """Default per-branch step budget, ``round(10 * sqrt(n))``."""
    return max(1, round(10 * math.sqrt(n)))


@dataclass(frozen=True)
class WalkConfig:
    """Parameters of one walk.

    ``max_steps`` of None means :func:`default_ttl` of the topology size.
    ``objective`` selects whether DRW scores are minimized (default) or
    maximized. ``pure_unrestricted`` turns the pure random walk into the
    classical memoryless walk; such walks may revisit nodes.
    """

    kind: WalkKind = WalkKind.DRW_MARKING
    branches: int = 1
    alpha: float = 1.0
    beta: float = 1.0
    penalty: float = 1.0
    max_steps: Optional[int] = None
    tie: str = "lowest"
    objective: str = "min"
    pure_unrestricted: bool = False

    def __post_init__(self):
        if not isinstance(self.kind, WalkKind):
            object.__setattr__(self, "kind", WalkKind.parse(str(self.kind)))
        if self.branches not in (1, 2):
            raise ParameterError(f"branches must be 1 or 2, got {self.branches}")
        if self.alpha < 0 or self.beta < 0:
            raise ParameterError("alpha and beta must be nonnegative")
        if self.kind is WalkKind.DRW_MARKING and self.alpha == 0 and self.beta == 0:
            raise ParameterError("alpha and beta cannot both be zero for the marking walk")
        if self.penalty < 0:
            raise ParameterError("penalty must be nonnegative")
        if self.max_steps is not None and self.max_steps < 1:
            raise ParameterError(f"max_steps must be positive, got {self.max_steps}")
        if self.tie not in ("lowest", "random"):
            raise ParameterError(f"tie must be 'lowest' or 'random', got {self.tie!r}")
        if self.objective not in ("min", "max"):
            raise ParameterError(f"objective must be 'min' or 'max', got {self.objective!r}")

    def ttl(self, n: int) -> int:
        return self.max_steps if self.max_steps is not None else default_ttl(n)

    @property
    def self_avoiding(self) -> bool:
        return not (self.kind is WalkKind.PURE_RANDOM and self.pure_unrestricted)


@dataclass
class WalkState:
    """Evolving state of one walk.

    ``joined[v]`` is the walk-wide step index at which ``v`` joined (the
    origin joins at 0), which is what intersection timing is measured in.
    ``penalties`` may be shared between walks of one simulation run.
    """

    origin: int
    config: WalkConfig
    max_steps: int
    branch_paths: List[List[int]]
    member_set: Set[int]
    joined: Dict[int, int]
    steps_taken: List[int]
    status: List[BranchStatus]
    penalties: Dict[int, float] = field(default_factory=dict)
    marked_first: Set[int] = field(default_factory=set)
    marked_second: Set[int] = field(default_factory=set)
    next_branch: int = 0

    @property
    def marked(self) -> Set[int]:
        return self.marked_first | self.marked_second

    @property
    def total_steps(self) -> int:
        return sum(self.steps_taken)

    @property
    def active(self) -> bool:
        return any(s is BranchStatus.ACTIVE for s in self.status)

    def tip(self, branch: int) -> int:
        return self.branch_paths[branch][-1]

    def line(self) -> List[int]:
        """The walk as one node sequence: reversed branch 1, then branch 0."""
        if len(self.branch_paths) == 1:
            return list(self.branch_paths[0])
        return self.branch_paths[1][::-1] + self.branch_paths[0][1:]

    def copy(self) -> "WalkState":
        return WalkState(
            origin=self.origin,
            config=self.config,
            max_steps=self.max_steps,
            branch_paths=[list(p) for p in self.branch_paths],
            member_set=set(self.member_set),
            joined=dict(self.joined),
            steps_taken=list(self.steps_taken),
            status=list(self.status),
            penalties=dict(self.penalties),
            marked_first=set(self.marked_first),
            marked_second=set(self.marked_second),
            next_branch=self.next_branch,
        )


def weight_two_hop(t: Topology, x: int, z: int) -> int:
    """``|N(x) & N(z)|``: neighbors shared by ``x`` and ``z``."""
    return len(neighbors(t, x) & neighbors(t, z))


def cost_marking(t: Topology, v: int, drw_members, alpha: float, beta: float) -> float:
    """``alpha * |N(v) & N(W)| + beta * |N(v) & N(N(W))|`` for member set ``W``."""
    members = set(drw_members)
    if not members:
        raise ParameterError("drw_members must be nonempty")
    first = neighborhood_of_set(t, members)
    second = neighborhood_of_set(t, first)
    nv = neighbors(t, v)
    return alpha * len(nv & first) + beta * len(nv & second)


def _mark(t: Topology, w: WalkState, v: int) -> None:
    fresh = t.adjacency[v] - w.marked_first
    w.marked_first |= fresh
    for u in fresh:
        w.marked_second |= t.adjacency[u]


def start_walk(
    t: Topology,
    origin: int,
    cfg: WalkConfig,
    penalties: Optional[Dict[int, float]] = None,
) -> WalkState:
    """Place a new walk at ``origin`` with every branch at zero steps.

    Pass a dict as ``penalties`` to share DRW-A penalties between walks; it
    is updated in place as nodes join.
    """
    neighbors(t, origin)  # range check
    status = BranchStatus.ACTIVE if t.adjacency[origin] else BranchStatus.STUCK
    w = WalkState(
        origin=origin,
        config=cfg,
        max_steps=cfg.ttl(t.n),
        branch_paths=[[origin] for _ in range(cfg.branches)],
        member_set={origin},
        joined={origin: 0},
        steps_taken=[0] * cfg.branches,
        status=[status] * cfg.branches,
        penalties=penalties if penalties is not None else {},
    )
    if cfg.kind is WalkKind.DRW_MARKING:
        _mark(t, w, origin)
    return w


def candidates(t: Topology, w: WalkState, branch: int) -> List[int]:
    """Sorted nodes the branch may move to next."""
    nb = t.adjacency[w.tip(branch)]
    if w.config.self_avoiding:
        nb = nb - w.member_set
    return sorted(nb)


def score(t: Topology, w: WalkState, branch: int, z: int) -> float:
    """Score of candidate ``z`` for the DRW kinds (lower is better under 'min')."""
    cfg = w.config
    if cfg.kind is WalkKind.DRW_WEIGHTED:
        path = w.branch_paths[branch]
        x = path[-2] if len(path) > 1 else w.origin
        return len(t.adjacency[x] & t.adjacency[z]) + w.penalties.get(z, 0.0)
    if cfg.kind is WalkKind.DRW_MARKING:
        nz = t.adjacency[z]
        return cfg.alpha * len(nz & w.marked_first) + cfg.beta * len(nz & w.marked_second)
    raise ParameterError("pure random walks have no score")


def _pick(scores: List[float], cands: List[int], cfg: WalkConfig, gen) -> int:
    best = min(scores) if cfg.objective == "min" else max(scores)
    tied = [c for c, s in zip(cands, scores) if s == best]
    if len(tied) == 1 or cfg.tie == "lowest":
        return tied[0]
    return tied[int(gen.integers(len(tied)))]


def step_branch(t: Topology, w: WalkState, branch: int, gen: Optional[np.random.Generator]) -> WalkState:
    """Advance one branch by one node, updating ``w`` in place and returning it."""
    if not 0 <= branch < len(w.status):
        raise WalkStateError(f"walk has no branch {branch}")
    if w.status[branch] is not BranchStatus.ACTIVE:
        raise WalkStateError(f"branch {branch} is {w.status[branch].value}, not active")
    cfg = w.config
    cands = candidates(t, w, branch)
    if not cands:
        w.status[branch] = BranchStatus.STUCK
        return w

    if cfg.kind is WalkKind.PURE_RANDOM:
        chosen = cands[int(gen.integers(len(cands)))]
    else:
        chosen = _pick([score(t, w, branch, z) for z in cands], cands, cfg, gen)

    w.branch_paths[branch].append(chosen)
    w.steps_taken[branch] += 1
    if chosen not in w.member_set:
        w.member_set.add(chosen)
        w.joined[chosen] = w.total_steps
    if cfg.kind is WalkKind.DRW_WEIGHTED:
        w.penalties[chosen] = w.penalties.get(chosen, 0.0) + cfg.penalty
    elif cfg.kind is WalkKind.DRW_MARKING:
        _mark(t, w, chosen)
    if w.steps_taken[branch] >= w.max_steps:
        w.status[branch] = BranchStatus.EXHAUSTED
    return w


def advance(t: Topology, w: WalkState, gen: Optional[np.random.Generator]) -> Optional[int]:
    """Take one step on the next active branch in round-robin order.

    Returns the branch that moved, or None if no branch could move. A branch
    that turns out to be stuck does not consume the turn; the next active
    branch moves instead.
    """
    nb = len(w.status)
    for _ in range(nb):
        b = w.next_branch
        w.next_branch = (b + 1) % nb
        if w.status[b] is not BranchStatus.ACTIVE:
            continue
        before = w.steps_taken[b]
        step_branch(t, w, b, gen)
        if w.steps_taken[b] > before:
            return b
    return None


def run_until(
    t: Topology,
    w: WalkState,
    stop: Callable[[WalkState], bool],
    gen: Optional[np.random.Generator],
) -> WalkState:
    """Step branches alternately until ``stop(w)`` holds or nothing can move."""
    while not stop(w):
        if advance(t, w, gen) is None:
            break
    return w


def run_to_end(t: Topology, w: WalkState, gen) -> WalkState:
    return run_until(t, w, lambda _: False, gen)
