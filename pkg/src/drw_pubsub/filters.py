"""Bloom filters over subscription attribute pairs.

Bit positions use double hashing, ``(h1 + i * h2) mod m`` for ``i < k``,
where ``h1`` and ``h2`` are the two 64-bit words of MurmurHash3 x64_128
(seed 0) over the canonical UTF-8 bytes of the element, and ``h2`` is forced
odd. Filters are immutable; :meth:`SubscriptionFilter.insert` returns a new
filter.

Serialized layout: ``m`` as 4-byte little-endian, ``k`` as 1 byte, the
inserted count as 4-byte little-endian, then ``m / 8`` bytes where bit ``j``
lives in byte ``j // 8`` at bit ``j % 8``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import mmh3

from drw_pubsub.errors import ParameterError, ParseError

DEFAULT_M = 1024
DEFAULT_K = 7
_MASK64 = (1 << 64) - 1
_HEADER = struct.Struct("<IBI")

Attribute = Tuple[str, str]


def canonical_attribute(name: str, value: str) -> bytes:
    """``lower(name.strip()) + '=' + value.strip()`` as UTF-8."""
    return f"{name.strip().lower()}={value.strip()}".encode("utf-8")


def parse_attributes(text: str) -> List[Attribute]:
    """Parse ``"a=1, b=2"`` into ``[("a", "1"), ("b", "2")]``."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ParseError(f"attribute {item!r} is not name=value")
        name, value = item.split("=", 1)
        out.append((name.strip(), value.strip()))
    return out


def hash_pair(element: bytes) -> Tuple[int, int]:
    h1, h2 = mmh3.hash64(element, 0, True, signed=False)
    return h1, h2 | 1


def bit_positions(element: bytes, m: int, k: int) -> List[int]:
    h1, h2 = hash_pair(element)
    return [((h1 + i * h2) & _MASK64) % m for i in range(k)]


@dataclass(frozen=True)
class SubscriptionFilter:
    """Fixed-size Bloom filter. ``bits`` is an int whose bit ``j`` is position ``j``."""

    m: int = DEFAULT_M
    k: int = DEFAULT_K
    bits: int = 0
    inserted: int = 0

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 8 or self.m % 8:
            raise ParameterError(f"m must be a positive multiple of 8, got {self.m}")
        if not isinstance(self.k, int) or not 1 <= self.k <= 16:
            raise ParameterError(f"k must be in [1, 16], got {self.k}")
        if self.bits < 0 or self.bits >> self.m:
            raise ParameterError("bit array does not fit in m bits")

    def insert(self, element: bytes) -> "SubscriptionFilter":
        bits = self.bits
        for p in bit_positions(element, self.m, self.k):
            bits |= 1 << p
        return SubscriptionFilter(self.m, self.k, bits, self.inserted + 1)

    def query(self, element: bytes) -> bool:
        bits = self.bits
        return all(bits >> p & 1 for p in bit_positions(element, self.m, self.k))

    __contains__ = query

    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def set_positions(self) -> List[int]:
        return [j for j in range(self.m) if self.bits >> j & 1]

    def expected_fpr(self, n: int | None = None) -> float:
        """``(1 - exp(-k n / m)) ** k`` for ``n`` elements (default: inserted count)."""
        n = self.inserted if n is None else n
        return (1.0 - math.exp(-self.k * n / self.m)) ** self.k

    def to_bytes(self) -> bytes:
        return _HEADER.pack(self.m, self.k, self.inserted) + self.bits.to_bytes(self.m // 8, "little")

    @classmethod
    def from_bytes(cls, data: bytes) -> "SubscriptionFilter":
        if len(data) < _HEADER.size:
            raise ParseError("serialized filter is truncated")
        m, k, inserted = _HEADER.unpack_from(data)
        body = data[_HEADER.size:]
        if m % 8 or len(body) != m // 8:
            raise ParseError(f"expected {m // 8} bit-array bytes, got {len(body)}")
        return cls(m, k, int.from_bytes(body, "little"), inserted)


def filter_new(m: int = DEFAULT_M, k: int = DEFAULT_K) -> SubscriptionFilter:
    return SubscriptionFilter(m, k)


def filter_insert(f: SubscriptionFilter, element: bytes) -> SubscriptionFilter:
    return f.insert(element)


def filter_query(f: SubscriptionFilter, element: bytes) -> bool:
    return f.query(element)


def build_filter(attrs: Iterable[Attribute], m: int = DEFAULT_M, k: int = DEFAULT_K) -> SubscriptionFilter:
    f = SubscriptionFilter(m, k)
    for name, value in attrs:
        f = f.insert(canonical_attribute(name, value))
    return f


def _canonical_set(attrs: Sequence[Attribute]) -> set:
    return {canonical_attribute(n, v) for n, v in attrs}


def filter_match(f: SubscriptionFilter, note_attrs: Sequence[Attribute]) -> bool:
    """Filter-only decision for a filter built from a single subscription.

    Each notification pair is queried against the filter; the subscription
    matches when the number of hits reaches the filter's insert count. With no
    false positives this is exactly "every subscription pair is present in the
    notification".
    """
    hits = sum(1 for e in _canonical_set(note_attrs) if f.query(e))
    return hits >= f.inserted


def exact_match(sub_attrs: Sequence[Attribute], note_attrs: Sequence[Attribute]) -> bool:
    """Every subscription pair appears verbatim (after canonicalization) in the notification."""
    return _canonical_set(sub_attrs) <= _canonical_set(note_attrs)


def match_subscription(f: SubscriptionFilter, sub_attrs: Sequence[Attribute], note_attrs: Sequence[Attribute]) -> bool:
    """Conjunctive equality match gated by the filter.

    Every subscription pair must be reported present by the filter and also be
    among the notification's pairs.
    """
    note = _canonical_set(note_attrs)
    for name, value in sub_attrs:
        e = canonical_attribute(name, value)
        if e not in note or not f.query(e):
            return False
    return True
