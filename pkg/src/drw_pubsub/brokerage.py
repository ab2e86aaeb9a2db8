"""Walk-based information brokerage (double ruling) and the Rumor Routing baseline.

Subscribers replicate a Bloom filter of their subscription along their walk;
publishers carry a notification along theirs and every node holding filters
evaluates it. Nodes where walks of two different principals meet are flagged
as brokers. Broker tables hold only subscription filters and opaque
notification ids: there is no advertisement state.

All state of one simulation run lives in an :class:`Overlay`, which also logs
one load event per message-handling action (a walk passing through a node,
storing a filter, or evaluating filters).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from drw_pubsub import filters
from drw_pubsub.errors import ParameterError
from drw_pubsub.filters import Attribute, SubscriptionFilter
from drw_pubsub.topology import Topology, neighbors
from drw_pubsub.walks import WalkConfig, WalkKind, WalkState, advance, start_walk

_ids = itertools.count()


def _check_attributes(attrs: Sequence[Attribute], unique: bool) -> Tuple[Attribute, ...]:
    attrs = tuple((str(n), str(v)) for n, v in attrs)
    if not attrs:
        raise ParameterError("attribute list must be nonempty")
    if unique:
        names = [n.strip().lower() for n, _ in attrs]
        if len(set(names)) != len(names):
            raise ParameterError(f"duplicate attribute names in {attrs}")
    return attrs


@dataclass(frozen=True)
class Subscription:
    subscriber: int
    attributes: Tuple[Attribute, ...]
    id: str = field(default_factory=lambda: f"s{next(_ids)}")

    def __post_init__(self):
        object.__setattr__(self, "attributes", _check_attributes(self.attributes, unique=True))


@dataclass(frozen=True)
class Notification:
    publisher: int
    attributes: Tuple[Attribute, ...]
    id: str = field(default_factory=lambda: f"n{next(_ids)}")

    def __post_init__(self):
        object.__setattr__(self, "attributes", _check_attributes(self.attributes, unique=False))


@dataclass
class StoredFilter:
    subscription_id: str
    filter: SubscriptionFilter
    walk_id: str


@dataclass
class BrokerTable:
    node: int
    subscription_filters: List[StoredFilter] = field(default_factory=list)
    stored_notifications: List[str] = field(default_factory=list)
    is_broker: bool = False


@dataclass
class DeliveryOutcome:
    notification_id: str
    subscription_id: str
    matched_at: Optional[int] = None
    hops_to_match: Optional[int] = None
    delivered: bool = False
    # exact attribute decision, kept to measure the filter's false-positive impact
    exact: Optional[bool] = None

    def __post_init__(self):
        if self.delivered and self.matched_at is None:
            raise ParameterError("a delivered outcome needs matched_at")


class Overlay:
    """Per-run brokerage state over one topology.

    ``visitors`` records which walks passed each node; it is simulation
    bookkeeping for the broker flag and metrics, not node state.
    """

    def __init__(self, t: Topology, m: int = filters.DEFAULT_M, k: int = filters.DEFAULT_K):
        self.t = t
        self.m = m
        self.k = k
        self.tables: Dict[int, BrokerTable] = {}
        self.visitors: Dict[int, Set[str]] = {}
        self.events: List[Tuple[int, str]] = []
        self.penalties: Dict[int, float] = {}
        self.subscriptions: Dict[str, Subscription] = {}
        self.notifications: Dict[str, Notification] = {}
        self.walks: Dict[str, WalkState] = {}

    def table(self, node: int) -> BrokerTable:
        tab = self.tables.get(node)
        if tab is None:
            tab = self.tables[node] = BrokerTable(node)
        return tab

    def brokers(self) -> Set[int]:
        return {a for a, tab in self.tables.items() if tab.is_broker}

    def _pass_through(self, node: int, walk_id: str) -> None:
        self.events.append((node, "step"))
        seen = self.visitors.setdefault(node, set())
        seen.add(walk_id)
        if len(seen) >= 2 and any(w.startswith("sub:") for w in seen):
            self.table(node).is_broker = True

    def start(self, origin: int, cfg: WalkConfig) -> WalkState:
        shared = self.penalties if cfg.kind is WalkKind.DRW_WEIGHTED else None
        return start_walk(self.t, origin, cfg, penalties=shared)

    # node handlers -------------------------------------------------------

    def store_subscription(self, node: int, sub: Subscription, f: SubscriptionFilter, hop: int) -> List[DeliveryOutcome]:
        """Subscriber walk reaches ``node``: store the filter, then check notifications already there."""
        walk_id = f"sub:{sub.id}"
        self._pass_through(node, walk_id)
        tab = self.table(node)
        tab.subscription_filters.append(StoredFilter(sub.id, f, walk_id))
        self.events.append((node, "store"))
        out = []
        if tab.stored_notifications:
            self.events.append((node, "match"))
            for nid in tab.stored_notifications:
                note = self.notifications[nid]
                if filters.filter_match(f, note.attributes):
                    tab.is_broker = True
                    out.append(self._outcome(note, sub, node, hop))
        return out

    def carry_notification(self, node: int, note: Notification, hop: int, skip: Set[str]) -> List[DeliveryOutcome]:
        """Publisher walk reaches ``node``: record the id and evaluate stored filters."""
        self._pass_through(node, f"pub:{note.id}")
        tab = self.table(node)
        tab.stored_notifications.append(note.id)
        out = []
        if tab.subscription_filters:
            self.events.append((node, "match"))
            for sf in tab.subscription_filters:
                if sf.subscription_id in skip:
                    continue
                if filters.filter_match(sf.filter, note.attributes):
                    tab.is_broker = True
                    out.append(self._outcome(note, self.subscriptions[sf.subscription_id], node, hop))
        return out

    def _outcome(self, note: Notification, sub: Subscription, node: int, hop: int) -> DeliveryOutcome:
        return DeliveryOutcome(
            notification_id=note.id,
            subscription_id=sub.id,
            matched_at=node,
            hops_to_match=hop,
            delivered=True,
            exact=filters.exact_match(sub.attributes, note.attributes),
        )


def _newest(w: WalkState, branch: int) -> int:
    return w.branch_paths[branch][-1]


def deploy_subscription(ov: Overlay, sub: Subscription, cfg: WalkConfig, gen) -> WalkState:
    """Run the subscriber's walk to the end, storing its filter at every node of the path."""
    neighbors(ov.t, sub.subscriber)
    ov.subscriptions[sub.id] = sub
    f = filters.build_filter(sub.attributes, ov.m, ov.k)
    w = ov.start(sub.subscriber, cfg)
    ov.walks[f"sub:{sub.id}"] = w
    ov.store_subscription(sub.subscriber, sub, f, 0)
    while (b := advance(ov.t, w, gen)) is not None:
        node = _newest(w, b)
        if w.joined[node] == w.total_steps:
            ov.store_subscription(node, sub, f, w.total_steps)
        else:
            ov._pass_through(node, f"sub:{sub.id}")
    return w


def publish(
    ov: Overlay,
    note: Notification,
    cfg: WalkConfig,
    gen,
    stop_on_first_match: bool = False,
) -> Tuple[WalkState, List[DeliveryOutcome]]:
    """Walk from the publisher, matching the notification at every node holding filters.

    Each subscription is reported at most once, at the first node where its
    filter matched. The walk runs to its TTL unless ``stop_on_first_match``.
    """
    neighbors(ov.t, note.publisher)
    ov.notifications[note.id] = note
    w = ov.start(note.publisher, cfg)
    ov.walks[f"pub:{note.id}"] = w
    found: Dict[str, DeliveryOutcome] = {}

    def visit(node: int, hop: int) -> None:
        for o in ov.carry_notification(node, note, hop, skip=set(found)):
            found.setdefault(o.subscription_id, o)

    visit(note.publisher, 0)
    while not (stop_on_first_match and found):
        b = advance(ov.t, w, gen)
        if b is None:
            break
        node = _newest(w, b)
        if w.joined[node] == w.total_steps:
            visit(node, w.total_steps)
        else:
            ov._pass_through(node, f"pub:{note.id}")
    return w, list(found.values())


def cooperative_publish_subscribe(
    ov: Overlay,
    sub: Subscription,
    note: Notification,
    cfg: WalkConfig,
    gen_sub,
    gen_pub,
) -> Tuple[Optional[int], DeliveryOutcome]:
    """Advance subscriber and publisher walks in lockstep until their paths share a node.

    Each round the subscriber walk takes one step, then the publisher walk.
    Returns the first round at which the two member sets intersect (None if
    both walks end first) and the delivery outcome for the pair.
    """
    ov.subscriptions[sub.id] = sub
    ov.notifications[note.id] = note
    f = filters.build_filter(sub.attributes, ov.m, ov.k)
    ws = ov.start(sub.subscriber, cfg)
    wp = ov.start(note.publisher, cfg)
    ov.walks[f"sub:{sub.id}"] = ws
    ov.walks[f"pub:{note.id}"] = wp

    matches: List[DeliveryOutcome] = []
    matches += ov.store_subscription(sub.subscriber, sub, f, 0)
    matches += ov.carry_notification(note.publisher, note, 0, skip=set())
    rnd = 0
    met = bool(ws.member_set & wp.member_set)
    while not met:
        rnd += 1
        moved = False
        b = advance(ov.t, ws, gen_sub)
        if b is not None:
            moved = True
            node = _newest(ws, b)
            matches += ov.store_subscription(node, sub, f, rnd)
            met = node in wp.member_set
        if not met:
            b = advance(ov.t, wp, gen_pub)
            if b is not None:
                moved = True
                node = _newest(wp, b)
                matches += ov.carry_notification(node, note, rnd, skip={o.subscription_id for o in matches})
                met = node in ws.member_set
        if not moved:
            break

    if matches:
        return (rnd if met else None), matches[0]
    return (rnd if met else None), DeliveryOutcome(note.id, sub.id, exact=filters.exact_match(sub.attributes, note.attributes))


def rumor_walk(t: Topology, origin: int, steps: int, infinite_memory: bool, gen) -> Iterator[Tuple[int, int]]:
    """Yield ``(hop, node)`` for a Rumor Routing agent, starting with ``(0, origin)``.

    With ``infinite_memory`` the agent remembers every node it has visited and
    moves to a uniformly chosen unvisited neighbor; when none is left it moves
    to a uniformly chosen neighbor, as the original agents do, and keeps going
    until its budget is spent. Without memory every move is uniform.
    """
    neighbors(t, origin)
    yield 0, origin
    seen = {origin}
    here = origin
    for hop in range(1, steps + 1):
        nb = sorted(t.adjacency[here])
        if not nb:
            return
        if infinite_memory:
            fresh = [v for v in nb if v not in seen]
            nb = fresh or nb
        here = nb[int(gen.integers(len(nb)))]
        seen.add(here)
        yield hop, here


def rumor_route(
    t: Topology,
    sub: Subscription,
    note: Notification,
    agent_steps: int,
    query_steps: int,
    infinite_memory: bool,
    gen_agent,
    gen_query,
) -> DeliveryOutcome:
    """Rumor Routing baseline.

    An event agent walks ``agent_steps`` from the publisher leaving the
    notification id on every node it visits; a query agent walks up to
    ``query_steps`` from the subscriber and succeeds at the first node holding
    the id, provided the notification matches the subscription.
    """
    return rumor_route_traced(t, sub, note, agent_steps, query_steps, infinite_memory, gen_agent, gen_query).outcome


@dataclass
class RumorTrace:
    outcome: DeliveryOutcome
    agent_path: List[int]
    query_path: List[int]

    def events(self) -> List[Tuple[int, str]]:
        ev = []
        for v in self.agent_path:
            ev += [(v, "step"), (v, "store")]
        for v in self.query_path:
            ev += [(v, "step"), (v, "match")]
        return ev


def rumor_route_traced(
    t: Topology,
    sub: Subscription,
    note: Notification,
    agent_steps: int,
    query_steps: int,
    infinite_memory: bool,
    gen_agent,
    gen_query,
) -> RumorTrace:
    """:func:`rumor_route` that also returns both agent paths."""
    if agent_steps < 0 or query_steps < 0:
        raise ParameterError("step budgets must be nonnegative")
    agent_path = [v for _, v in rumor_walk(t, note.publisher, agent_steps, infinite_memory, gen_agent)]
    trail = set(agent_path)
    exact = filters.exact_match(sub.attributes, note.attributes)
    matches = filters.filter_match(filters.build_filter(sub.attributes), note.attributes)
    query_path: List[int] = []
    for hop, node in rumor_walk(t, sub.subscriber, query_steps, infinite_memory, gen_query):
        query_path.append(node)
        if matches and node in trail:
            return RumorTrace(DeliveryOutcome(note.id, sub.id, node, hop, True, exact), agent_path, query_path)
    return RumorTrace(DeliveryOutcome(note.id, sub.id, exact=exact), agent_path, query_path)


def rumor_trail(t: Topology, origin: int, steps: int, infinite_memory: bool, gen) -> Set[int]:
    """Nodes holding the event after an agent walk of ``steps`` hops from ``origin``."""
    return {node for _, node in rumor_walk(t, origin, steps, infinite_memory, gen)}
