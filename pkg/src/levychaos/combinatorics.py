"""Index sets for iterated integrals: compositions, partitions, multinomials.

Tuples are plain ``tuple[int, ...]`` of positive integers.  All enumeration
orders are deterministic so serialized coefficient tables are byte-stable:
compositions sort by (sum, length, lexicographic), exact-sum compositions
lexicographically, partitions in descending lexicographic order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import OrderError

# Default cap on the expansion order; factorials and 2^k set sizes stay
# desk-scale below this.  Overridable per call (CLI: LEVY_CHAOS_KMAX).
DEFAULT_ORDER_CAP = 12

IndexTuple = tuple[int, ...]


def _compositions_of(total: int) -> Iterator[IndexTuple]:
    """All compositions of ``total`` into positive parts, lexicographic."""
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in _compositions_of(total - first):
            yield (first,) + rest


def index_set(k: int, *, k_max: int = DEFAULT_ORDER_CAP) -> list[IndexTuple]:
    """All tuples of positive integers with sum <= k.

    Ordered by (sum, length, lexicographic); the count is exactly 2^k - 1.
    """
    if k < 1:
        raise OrderError("order must be >= 1")
    if k > k_max:
        raise OrderError(f"order too large: {k} > cap {k_max}")
    out: list[IndexTuple] = []
    for s in range(1, k + 1):
        group = sorted(_compositions_of(s), key=lambda tup: (len(tup), tup))
        out.extend(group)
    return out


def exact_sum_compositions(n: int, p: int) -> list[IndexTuple]:
    """All length-``p`` tuples of positive integers summing exactly to ``n``.

    Returns an empty list when p > n (no compositions exist).
    """
    if n < 1 or p < 1:
        raise OrderError("n and p must be >= 1")
    if p > n:
        return []

    def gen(total: int, parts: int) -> Iterator[IndexTuple]:
        if parts == 1:
            yield (total,)
            return
        for first in range(1, total - parts + 2):
            for rest in gen(total - first, parts - 1):
                yield (first,) + rest

    return list(gen(n, p))


@dataclass(frozen=True)
class Partition:
    """Weakly decreasing parts of k plus the multiplicity vector p_1..p_k."""

    parts: IndexTuple
    multiplicities: tuple[int, ...]

    @staticmethod
    def from_parts(parts: Sequence[int], k: int) -> "Partition":
        parts = tuple(parts)
        if sum(parts) != k or any(x < 1 for x in parts):
            raise OrderError(f"not a partition of {k}: {parts}")
        if list(parts) != sorted(parts, reverse=True):
            raise OrderError(f"parts must be weakly decreasing: {parts}")
        mult = [0] * k
        for x in parts:
            mult[x - 1] += 1
        return Partition(parts, tuple(mult))

    @property
    def length(self) -> int:
        return len(self.parts)


def partitions(k: int) -> list[Partition]:
    """All integer partitions of k, descending lexicographic order."""
    if k < 1:
        raise OrderError("k must be >= 1")

    def gen(total: int, cap: int) -> Iterator[IndexTuple]:
        if total == 0:
            yield ()
            return
        for first in range(min(cap, total), 0, -1):
            for rest in gen(total - first, first):
                yield (first,) + rest

    return [Partition.from_parts(p, k) for p in gen(k, k)]


def multinomial(parts: Sequence[int]) -> int:
    """(sum parts)! / prod(parts!), exact arbitrary-precision integer."""
    parts = tuple(parts)
    if not parts:
        raise OrderError("multinomial of empty sequence")
    if any(x < 0 for x in parts):
        raise OrderError(f"negative multinomial part: {parts}")
    num = math.factorial(sum(parts))
    den = 1
    for x in parts:
        den *= math.factorial(x)
    return num // den
