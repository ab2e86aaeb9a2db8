"""Directional random walks for a merged network/overlay publish/subscribe layer."""

__version__ = "0.1.0"

from drw_pubsub.topology import Topology, generate_unit_disk, load_edge_list
from drw_pubsub.walks import WalkConfig, WalkKind, WalkState
from drw_pubsub.filters import SubscriptionFilter

__all__ = [
    "Topology",
    "generate_unit_disk",
    "load_edge_list",
    "WalkConfig",
    "WalkKind",
    "WalkState",
    "SubscriptionFilter",
    "__version__",
]
