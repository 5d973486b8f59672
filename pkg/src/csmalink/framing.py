"""Resource-block geometry and slot scheduling.

One resource block is a grid of subcarriers by OFDM symbols; users take
turns owning whole symbols within a slot, so sharing in time composes with
sharing of the constellation.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .mapping import AllocationPlan, map_symbol


@dataclass(frozen=True)
class RbGeometry:
    """Resource-block and transform dimensions.

    Defaults give a 12-subcarrier block inside a 256-point transform with a
    32-sample cyclic prefix, 14 symbols per slot.
    """

    subcarriers: int = 12
    symbols_per_slot: int = 14
    fft_size: int = 256
    subcarrier_offset: int = 16
    cp_length: int = 32

    def __post_init__(self) -> None:
        if self.subcarriers < 1:
            raise ValueError("subcarriers must be >= 1")
        if self.symbols_per_slot not in (7, 14):
            raise ValueError(
                f"symbols_per_slot must be 7 or 14, got {self.symbols_per_slot}"
            )
        n = self.fft_size
        if n < 2 or n & (n - 1) or n > 4096:
            raise ValueError(f"fft_size {n} is not a power of two <= 4096")
        if self.subcarrier_offset < 1:
            raise ValueError("subcarrier_offset must be >= 1 (bin 0 stays empty)")
        if self.subcarrier_offset + self.subcarriers > n // 2:
            raise ValueError(
                f"subcarriers {self.subcarrier_offset}..{self.subcarrier_offset + self.subcarriers - 1} "
                f"exceed the lower half of a {n}-point transform"
            )
        if not 0 <= self.cp_length < n:
            raise ValueError(f"cp_length {self.cp_length} outside [0, {n})")


@dataclass(frozen=True)
class SlotSchedule:
    """Owner user id of each OFDM symbol in a slot."""

    assignments: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.assignments:
            raise ValueError("schedule has no symbols")

    def symbols_of(self, user_id: int) -> int:
        return sum(1 for a in self.assignments if a == user_id)


def round_robin_schedule(users: Sequence[int], symbols_per_slot: int) -> SlotSchedule:
    """Cycle through users in order: symbol k goes to users[k mod n]."""
    if not users:
        raise ValueError("no users to schedule")
    if symbols_per_slot < 1:
        raise ValueError("symbols_per_slot must be >= 1")
    return SlotSchedule(
        assignments=tuple(users[k % len(users)] for k in range(symbols_per_slot))
    )


def weighted_schedule(
    users: Sequence[int], weights: Sequence[int], symbols_per_slot: int
) -> SlotSchedule:
    """Share symbols proportionally to integer weights.

    Counts come from largest-remainder rounding (ties to the lower user
    index); the sequence interleaves by smoothed weighted round-robin so no
    user's symbols bunch together when avoidable.
    """
    if not users:
        raise ValueError("no users to schedule")
    if len(weights) != len(users):
        raise ValueError(f"{len(weights)} weights for {len(users)} users")
    if any(w < 1 for w in weights):
        raise ValueError(f"weights {list(weights)} must all be >= 1")
    if symbols_per_slot < 1:
        raise ValueError("symbols_per_slot must be >= 1")

    total = sum(weights)
    quotas = [symbols_per_slot * w / total for w in weights]
    counts = [int(q) for q in quotas]
    leftover = symbols_per_slot - sum(counts)
    remainders = sorted(
        range(len(users)), key=lambda i: (-(quotas[i] - counts[i]), i)
    )
    for i in remainders[:leftover]:
        counts[i] += 1

    # smoothed round-robin: growing credit, highest credit transmits
    credits = [0] * len(users)
    order: list[int] = []
    for _ in range(symbols_per_slot):
        for i, c in enumerate(counts):
            credits[i] += c
        pick = max(range(len(users)), key=lambda i: (credits[i], -i))
        credits[pick] -= symbols_per_slot
        order.append(pick)
    assert all(order.count(i) == counts[i] for i in range(len(users)))
    return SlotSchedule(assignments=tuple(users[i] for i in order))


def frame_user_data(
    plan: AllocationPlan,
    schedule: SlotSchedule,
    geometry: RbGeometry,
    streams: Mapping[int, Sequence[int]],
) -> np.ndarray:
    """Fill one slot's label grid from per-user data words.

    Data words are consumed subcarrier-major within each symbol, in symbol
    order, so each scheduled user reads exactly
    ``symbols_owned * geometry.subcarriers`` words from its stream.

    Returns:
        int array of labels, shape (symbols_per_slot, subcarriers).
    """
    if len(schedule.assignments) != geometry.symbols_per_slot:
        raise ValueError(
            f"schedule covers {len(schedule.assignments)} symbols, "
            f"geometry expects {geometry.symbols_per_slot}"
        )
    known = {u.user_id for u in plan.users}
    for user_id in schedule.assignments:
        if user_id not in known:
            raise ValueError(f"scheduled user {user_id} is not in the plan")
        if user_id not in streams:
            raise ValueError(f"no data stream for scheduled user {user_id}")
    grid = np.empty((geometry.symbols_per_slot, geometry.subcarriers), dtype=np.int64)
    cursor = {user_id: 0 for user_id in streams}
    for k, user_id in enumerate(schedule.assignments):
        stream = streams[user_id]
        at = cursor[user_id]
        if at + geometry.subcarriers > len(stream):
            raise ValueError(
                f"user {user_id} stream exhausted at symbol {k}: "
                f"have {len(stream)}, need {at + geometry.subcarriers}"
            )
        for c in range(geometry.subcarriers):
            grid[k, c] = map_symbol(plan, user_id, stream[at + c])
        cursor[user_id] = at + geometry.subcarriers
    return grid
