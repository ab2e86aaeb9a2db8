"""Experiment runner: config parsing, replications, CSV output and summaries.

Config grammar (INI style, parsed with :mod:`configparser`)::

    [experiment]
    name = claim1               # str, required
    replications = 200          # int >= 1
    master_seed = 1             # int
    output = out.csv            # str, optional (CLI --out wins)

    [topology]
    n = 1000                    # int, unit-disk generation ...
    radius = 0.07               # float
    edge_list = graph.txt       # ... or a fixed edge list (relative to the config)
    positions = graph.pos       # optional companion of edge_list

    [workload]
    publishers = 1              # int >= 1
    subscribers = 1             # int >= 1
    subscription = temp=21      # attribute pairs, comma separated
    notification = temp=21      # attribute pairs, comma separated
    mode = sequential           # sequential | cooperative
    stop_on_first_match = false # bool
    connected = true            # draw principals inside one component

    [variant.<label>]           # one section per walk variant, >= 1
    kind = drw-b                # pure | drw-a | drw-b | rumor
    branches = 1
    alpha = 1.0
    beta = 1.0
    penalty = 1.0
    max_steps = 316             # optional, default round(10 sqrt(n))
    tie = lowest                # lowest | random
    objective = min             # min | max
    pure_unrestricted = false
    infinite_memory = true      # rumor only

Replication ``i`` uses seed ``master_seed + i``; see :mod:`drw_pubsub.rng`
for how that seed is split into topology, walk and workload streams. The
rumor variant spends ``max_steps`` on the event agent and the same on the
query agent. Cooperative mode and the rumor variant take exactly one
publisher and one subscriber.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from drw_pubsub import __version__
from drw_pubsub import rng as rngmod
from drw_pubsub.brokerage import (
    Notification,
    Overlay,
    Subscription,
    cooperative_publish_subscribe,
    deploy_subscription,
    publish,
    rumor_route_traced,
)
from drw_pubsub.errors import ConfigError, ParameterError, ParseError
from drw_pubsub.filters import Attribute, exact_match, parse_attributes
from drw_pubsub.metrics import LoadProfile, euclidean_displacement, load_profile
from drw_pubsub.topology import Topology, connected_component, generate_unit_disk, load_edge_list
from drw_pubsub.walks import WalkConfig, WalkKind, WalkState, default_ttl

CSV_COLUMNS = [
    "seed", "n", "radius", "kind", "branches", "alpha", "beta", "penalty", "ttl",
    "cooperative", "intersection_step", "hops_to_match", "delivered",
    "path_hops_a", "path_hops_b", "euclid_a", "euclid_b",
    "nodes_used", "max_load", "gini", "broker_count",
]
HEADER = f"# drw-pubsub {__version__}"
RUMOR = "rumor"


@dataclass(frozen=True)
class Variant:
    label: str
    kind: str
    walk: Optional[WalkConfig] = None
    max_steps: Optional[int] = None
    infinite_memory: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    replications: int
    master_seed: int
    variants: Tuple[Variant, ...]
    n: Optional[int] = None
    radius: Optional[float] = None
    edge_list: Optional[str] = None
    positions: Optional[str] = None
    publishers: int = 1
    subscribers: int = 1
    subscription: Tuple[Attribute, ...] = (("temp", "21"),)
    notification: Tuple[Attribute, ...] = (("temp", "21"),)
    cooperative: bool = False
    stop_on_first_match: bool = False
    connected: bool = True
    output: Optional[str] = None


@dataclass
class MetricsRecord:
    seed: int
    n: int
    radius: Optional[float]
    variant: int
    kind: str
    branches: int
    alpha: Optional[float]
    beta: Optional[float]
    penalty: Optional[float]
    ttl: int
    cooperative: bool
    intersection_step: Optional[int]
    hops_to_match: Optional[int]
    delivered: bool
    path_hops_a: int
    path_hops_b: int
    euclid_a: Optional[float]
    euclid_b: Optional[float]
    load: LoadProfile = field(repr=False)
    broker_count: int = 0

    @property
    def nodes_used(self) -> int:
        return self.load.nodes_used

    @property
    def max_load(self) -> int:
        return self.load.max_load

    @property
    def gini(self) -> float:
        return self.load.gini

    def row(self) -> List[str]:
        vals = {
            **{c: getattr(self, c) for c in CSV_COLUMNS if c not in ("nodes_used", "max_load", "gini")},
            "nodes_used": self.nodes_used,
            "max_load": self.max_load,
            "gini": self.gini,
        }
        return [_fmt(vals[c]) for c in CSV_COLUMNS]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


# config parsing ---------------------------------------------------------------

_SCHEMA = {
    "experiment": {"name": str, "replications": int, "master_seed": int, "output": str},
    "topology": {"n": int, "radius": float, "edge_list": str, "positions": str},
    "workload": {
        "publishers": int, "subscribers": int, "subscription": str, "notification": str,
        "mode": str, "stop_on_first_match": bool, "connected": bool,
    },
    "variant": {
        "kind": str, "branches": int, "alpha": float, "beta": float, "penalty": float,
        "max_steps": int, "tie": str, "objective": str, "pure_unrestricted": bool,
        "infinite_memory": bool,
    },
}


def _typed(section: configparser.SectionProxy, schema: dict) -> dict:
    out = {}
    for key in section:
        if key not in schema:
            raise ConfigError(f"[{section.name}] unknown key {key!r}")
        typ = schema[key]
        try:
            out[key] = section.getboolean(key) if typ is bool else typ(section[key])
        except ValueError:
            raise ConfigError(f"[{section.name}] {key} must be {typ.__name__}, got {section[key]!r}") from None
    return out


def parse_config(text: str, base_dir: str = ".") -> ExperimentConfig:
    """Parse and validate an experiment config document."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(str(e)) from None

    for name in cp.sections():
        if name not in ("experiment", "topology", "workload") and not name.startswith("variant."):
            raise ConfigError(f"unknown section [{name}]")
    for name in ("experiment", "topology"):
        if name not in cp:
            raise ConfigError(f"missing section [{name}]")

    exp = _typed(cp["experiment"], _SCHEMA["experiment"])
    topo = _typed(cp["topology"], _SCHEMA["topology"])
    work = _typed(cp["workload"], _SCHEMA["workload"]) if "workload" in cp else {}

    if "name" not in exp:
        raise ConfigError("[experiment] name is required")
    reps = exp.get("replications", 1)
    if reps < 1:
        raise ConfigError("replications must be >= 1")

    if "edge_list" in topo:
        if "n" in topo or "radius" in topo:
            raise ConfigError("[topology] takes either edge_list or n/radius, not both")
        for key in ("edge_list", "positions"):
            if key in topo:
                path = os.path.join(base_dir, topo[key])
                if not os.path.exists(path):
                    raise ConfigError(f"[topology] {key} file not found: {path}")
                topo[key] = path
    else:
        if "n" not in topo or "radius" not in topo:
            raise ConfigError("[topology] needs n and radius (or edge_list)")
        if topo["n"] < 1 or not 0 < topo["radius"] <= math.sqrt(2):
            raise ConfigError("[topology] n must be >= 1 and radius in (0, sqrt(2)]")
    if "positions" in topo and "edge_list" not in topo:
        raise ConfigError("[topology] positions requires edge_list")

    mode = work.get("mode", "sequential")
    if mode not in ("sequential", "cooperative"):
        raise ConfigError(f"[workload] mode must be sequential or cooperative, got {mode!r}")
    try:
        sub_attrs = tuple(parse_attributes(work.get("subscription", "temp=21")))
        note_attrs = tuple(parse_attributes(work.get("notification", "temp=21")))
    except ParseError as e:
        raise ConfigError(f"[workload] {e}") from None
    if not sub_attrs or not note_attrs:
        raise ConfigError("[workload] attribute lists must be nonempty")
    pubs, subs = work.get("publishers", 1), work.get("subscribers", 1)
    if pubs < 1 or subs < 1:
        raise ConfigError("[workload] needs at least one publisher and one subscriber")

    variants = []
    for name in cp.sections():
        if not name.startswith("variant."):
            continue
        v = _typed(cp[name], _SCHEMA["variant"])
        kind = v.pop("kind", "drw-b").strip().lower()
        label = name.split(".", 1)[1]
        if kind == RUMOR:
            extra = set(v) - {"max_steps", "infinite_memory"}
            if extra:
                raise ConfigError(f"[{name}] keys not valid for rumor: {sorted(extra)}")
            if v.get("max_steps", 1) < 0:
                raise ConfigError(f"[{name}] max_steps must be nonnegative")
            variants.append(Variant(label, RUMOR, None, v.get("max_steps"), v.get("infinite_memory", True)))
            continue
        v.pop("infinite_memory", None)
        try:
            cfg = WalkConfig(WalkKind.parse(kind), **v)
        except ParameterError as e:
            raise ConfigError(f"[{name}] {e}") from None
        variants.append(Variant(label, cfg.kind.value, cfg))
    if not variants:
        raise ConfigError("at least one [variant.<label>] section is required")

    single = mode == "cooperative" or any(v.kind == RUMOR for v in variants)
    if single and (pubs != 1 or subs != 1):
        raise ConfigError("cooperative mode and rumor variants take exactly one publisher and one subscriber")

    return ExperimentConfig(
        name=exp["name"],
        replications=reps,
        master_seed=exp.get("master_seed", 0),
        variants=tuple(variants),
        n=topo.get("n"),
        radius=topo.get("radius"),
        edge_list=topo.get("edge_list"),
        positions=topo.get("positions"),
        publishers=pubs,
        subscribers=subs,
        subscription=sub_attrs,
        notification=note_attrs,
        cooperative=mode == "cooperative",
        stop_on_first_match=work.get("stop_on_first_match", False),
        connected=work.get("connected", True),
        output=exp.get("output"),
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))


# running ----------------------------------------------------------------------

def choose_principals(t: Topology, count: int, connected: bool, gen, max_tries: int = 1000) -> List[int]:
    """Draw ``count`` distinct nodes; with ``connected`` they share one component.

    Only the endpoints are resampled, never the graph.
    """
    if count > t.n:
        raise ConfigError(f"workload needs {count} principals but the topology has {t.n} nodes")
    if not connected:
        return [int(x) for x in gen.choice(t.n, count, replace=False)]
    for _ in range(max_tries):
        anchor = int(gen.integers(t.n))
        comp = sorted(connected_component(t, anchor) - {anchor})
        if len(comp) + 1 >= count:
            rest = [comp[int(i)] for i in gen.choice(len(comp), count - 1, replace=False)] if count > 1 else []
            return [anchor] + rest
    raise ConfigError(f"no component holds {count} principals after {max_tries} draws")


def _topology(cfg: ExperimentConfig, seed: int, cache: dict) -> Topology:
    if cfg.edge_list is None:
        return generate_unit_disk(cfg.n, cfg.radius, seed)
    if "fixed" not in cache:
        try:
            with open(cfg.edge_list, encoding="utf-8") as fh:
                text = fh.read()
            pos = None
            if cfg.positions:
                with open(cfg.positions, encoding="utf-8") as fh:
                    pos = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read topology file: {e}") from None
        cache["fixed"] = load_edge_list(text, pos)
    return cache["fixed"]


def _displacement(t: Topology, path: Sequence[int]) -> Optional[float]:
    return euclidean_displacement(t, path) if path else None


def run_replication(cfg: ExperimentConfig, index: int, _cache: Optional[dict] = None) -> List[MetricsRecord]:
    """All variant records of one replication. A pure function of (cfg, index)."""
    seed = rngmod.replication_seed(cfg.master_seed, index)
    t = _topology(cfg, seed, _cache if _cache is not None else {})
    principals = choose_principals(
        t, cfg.publishers + cfg.subscribers, cfg.connected, rngmod.stream(seed, rngmod.WORKLOAD)
    )
    subs = [Subscription(a, cfg.subscription, id=f"s{i}") for i, a in enumerate(principals[: cfg.subscribers])]
    notes = [Notification(a, cfg.notification, id=f"n{i}") for i, a in enumerate(principals[cfg.subscribers:])]
    return [_run_variant(cfg, t, seed, vi, var, subs, notes) for vi, var in enumerate(cfg.variants)]


def _run_variant(cfg, t, seed, vi, var: Variant, subs, notes) -> MetricsRecord:
    gen_a = rngmod.stream(seed, rngmod.WALK_A)
    gen_b = rngmod.stream(seed, rngmod.WALK_B)
    radius = t.radius if cfg.edge_list is None else None
    common = dict(seed=seed, n=t.n, radius=radius, variant=vi, kind=var.kind, cooperative=cfg.cooperative)

    if var.kind == RUMOR:
        ttl = var.max_steps if var.max_steps is not None else default_ttl(t.n)
        trace = rumor_route_traced(
            t, subs[0], notes[0], ttl, ttl, var.infinite_memory,
            rngmod.stream(seed, rngmod.RUMOR_AGENT), rngmod.stream(seed, rngmod.RUMOR_QUERY),
        )
        o = trace.outcome
        return MetricsRecord(
            **common, branches=1, alpha=None, beta=None, penalty=None, ttl=ttl,
            intersection_step=None, hops_to_match=o.hops_to_match,
            delivered=o.delivered or not exact_match(subs[0].attributes, notes[0].attributes),
            path_hops_a=len(trace.query_path) - 1, path_hops_b=len(trace.agent_path) - 1,
            euclid_a=_displacement(t, trace.query_path), euclid_b=_displacement(t, trace.agent_path),
            load=load_profile(trace.events()), broker_count=int(o.delivered),
        )

    wc = var.walk
    ov = Overlay(t)
    inter = None
    if cfg.cooperative:
        inter, o = cooperative_publish_subscribe(ov, subs[0], notes[0], wc, gen_a, gen_b)
        outcomes = {(o.notification_id, o.subscription_id): o} if o.delivered else {}
    else:
        for s in subs:
            deploy_subscription(ov, s, wc, gen_a)
        outcomes = {}
        for nt in notes:
            _, found = publish(ov, nt, wc, gen_b, cfg.stop_on_first_match)
            outcomes.update({(x.notification_id, x.subscription_id): x for x in found})

    expected = [(nt.id, s.id) for nt in notes for s in subs if exact_match(s.attributes, nt.attributes)]
    first = outcomes.get((notes[0].id, subs[0].id))
    wa: WalkState = ov.walks[f"sub:{subs[0].id}"]
    wb: WalkState = ov.walks[f"pub:{notes[0].id}"]
    return MetricsRecord(
        **common, branches=wc.branches, alpha=wc.alpha, beta=wc.beta, penalty=wc.penalty, ttl=wc.ttl(t.n),
        intersection_step=inter,
        hops_to_match=first.hops_to_match if first else None,
        delivered=all(k in outcomes for k in expected),
        path_hops_a=wa.total_steps, path_hops_b=wb.total_steps,
        euclid_a=_displacement(t, wa.line()), euclid_b=_displacement(t, wb.line()),
        load=load_profile(ov.events), broker_count=len(ov.brokers()),
    )


def _replication_worker(args):
    cfg, index = args
    return run_replication(cfg, index)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> List[MetricsRecord]:
    """Run every replication and return records sorted by (seed, variant)."""
    if jobs > 1 and cfg.replications > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_replication_worker, [(cfg, i) for i in range(cfg.replications)]))
    else:
        cache: dict = {}
        batches = [run_replication(cfg, i, cache) for i in range(cfg.replications)]
    records = [r for batch in batches for r in batch]
    records.sort(key=lambda r: (r.seed, r.variant))
    return records


# output -----------------------------------------------------------------------

def records_to_csv(records: Sequence[MetricsRecord]) -> str:
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def write_csv(records: Sequence[MetricsRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records))


def read_csv(text: str) -> List[Dict[str, str]]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _number(v) -> Optional[float]:
    if v is None or v == "":
        return None
    if isinstance(v, bool):
        return float(v)
    if v in ("true", "false"):
        return 1.0 if v == "true" else 0.0
    try:
        return float(v)
    except (TypeError, ValueError):
        return None


@dataclass
class SummaryRow:
    group: Tuple[str, ...]
    field: str
    count: int
    excluded: int
    mean: Optional[float]
    sd: Optional[float]
    ci95: Optional[float]


def summarize(rows: Sequence, group_by: Sequence[str]) -> List[SummaryRow]:
    """Per-group mean, sample sd, count and 95% normal half-width of each numeric field.

    ``rows`` are CSV dicts or :class:`MetricsRecord` objects. Empty values are
    left out of a field's statistics and counted in ``excluded``.
    """
    if not rows:
        raise ValueError("summarize needs at least one record")
    dicts = [dict(zip(CSV_COLUMNS, r.row())) if isinstance(r, MetricsRecord) else dict(r) for r in rows]
    for g in group_by:
        if g not in dicts[0]:
            raise ValueError(f"unknown group-by column {g!r}")
    numeric = [c for c in dicts[0] if c not in group_by and c != "seed"
               and all(d.get(c) in ("", None) or _number(d.get(c)) is not None for d in dicts)]
    groups: Dict[Tuple[str, ...], List[dict]] = {}
    for d in dicts:
        groups.setdefault(tuple(d[g] for g in group_by), []).append(d)

    out = []
    for key in sorted(groups):
        members = groups[key]
        for c in numeric:
            xs = [x for x in (_number(d.get(c)) for d in members) if x is not None]
            excluded = len(members) - len(xs)
            if not xs:
                out.append(SummaryRow(key, c, 0, excluded, None, None, None))
                continue
            mean = statistics.fmean(xs)
            sd = statistics.stdev(xs) if len(xs) > 1 else 0.0
            out.append(SummaryRow(key, c, len(xs), excluded, mean, sd, 1.96 * sd / math.sqrt(len(xs))))
    return out


def summary_to_csv(summary: Sequence[SummaryRow], group_by: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(group_by) + ["field", "count", "excluded", "mean", "sd", "ci95"])
    for s in summary:
        w.writerow(list(s.group) + [s.field, s.count, s.excluded, _fmt(s.mean), _fmt(s.sd), _fmt(s.ci95)])
    return buf.getvalue()
