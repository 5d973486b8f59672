"""Allocation plans: partitioning one QAM label space among several users.

Each user owns a disjoint set of labels (codewords); position k of the set
encodes data word k. Plans come in two flavors: address-bit plans embed a
user address at fixed bit positions of every label, lookup plans enumerate
codewords explicitly (from a table file or a quality-of-service split).
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .constellation import SUPPORTED_ORDERS

SCHEME_KINDS = ("address-bit", "lookup-table")


def _log2_order(order: int) -> int:
    """Bit width of a supported order; rejects anything else."""
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported order {order}; expected one of {SUPPORTED_ORDERS}")
    return order.bit_length() - 1


@dataclass(frozen=True)
class AddressBitLayout:
    """Which label bit positions carry the user address.

    Positions are numbered 0 (LSB) to D-1 (MSB). The most significant
    address bit sits at the highest address position; the data word fills
    the remaining positions the same way.
    """

    order: int
    address_positions: tuple[int, ...]

    def __post_init__(self) -> None:
        d = _log2_order(self.order)
        pos = tuple(sorted(self.address_positions, reverse=True))
        if len(pos) != len(set(pos)):
            raise ValueError(f"duplicate address positions {self.address_positions}")
        if not pos or len(pos) >= d:
            raise ValueError(
                f"need between 1 and {d - 1} address positions, got {len(pos)}"
            )
        if pos[0] >= d or pos[-1] < 0:
            raise ValueError(f"address positions {pos} outside bit range 0..{d - 1}")
        object.__setattr__(self, "address_positions", pos)

    @property
    def address_bits(self) -> int:
        return len(self.address_positions)

    @property
    def data_bits(self) -> int:
        return _log2_order(self.order) - self.address_bits

    @property
    def data_positions(self) -> tuple[int, ...]:
        d = _log2_order(self.order)
        taken = set(self.address_positions)
        return tuple(p for p in range(d - 1, -1, -1) if p not in taken)

    def compose(self, address_value: int, data_word: int) -> int:
        """Label carrying the given address and data word."""
        a = self.address_bits
        b = self.data_bits
        if not 0 <= address_value < (1 << a):
            raise ValueError(f"address value {address_value} outside [0, {1 << a})")
        if not 0 <= data_word < (1 << b):
            raise ValueError(f"data word {data_word} outside [0, {1 << b})")
        label = 0
        for i, p in enumerate(self.address_positions):
            label |= ((address_value >> (a - 1 - i)) & 1) << p
        for i, p in enumerate(self.data_positions):
            label |= ((data_word >> (b - 1 - i)) & 1) << p
        return label

    def address_of(self, label: int) -> int:
        a = self.address_bits
        value = 0
        for i, p in enumerate(self.address_positions):
            value |= ((label >> p) & 1) << (a - 1 - i)
        return value

    def word_of(self, label: int) -> int:
        b = self.data_bits
        value = 0
        for i, p in enumerate(self.data_positions):
            value |= ((label >> p) & 1) << (b - 1 - i)
        return value


@dataclass(frozen=True)
class UserAllocation:
    """One user's share of the label space.

    ``codewords[k]`` is the label that encodes data word k.
    """

    user_id: int
    data_bits: int
    codewords: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.data_bits < 1:
            raise ValueError(f"user {self.user_id}: data_bits must be >= 1")
        expected = 1 << self.data_bits
        if len(self.codewords) != expected:
            raise ValueError(
                f"user {self.user_id}: {len(self.codewords)} codewords for "
                f"{self.data_bits}-bit words, expected {expected}"
            )
        if len(set(self.codewords)) != len(self.codewords):
            raise ValueError(f"user {self.user_id}: duplicate codewords")


@dataclass(frozen=True)
class AllocationPlan:
    """A validated, non-overlapping assignment of labels to users.

    ``owner_of_label[l]`` is the index into ``users`` owning label l (-1 if
    unallocated); ``word_of_label[l]`` the data word that label encodes for
    its owner. Address-bit plans keep their layout so the data word of any
    label, including another user's, stays positionally defined.
    """

    order: int
    users: tuple[UserAllocation, ...]
    scheme_kind: str
    layout: AddressBitLayout | None = None
    owner_of_label: np.ndarray = field(init=False, repr=False, compare=False)
    word_of_label: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        _log2_order(self.order)
        if self.scheme_kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.scheme_kind!r}")
        if not self.users:
            raise ValueError("plan has no users")
        ids = [u.user_id for u in self.users]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate user ids {ids}")
        owner = np.full(self.order, -1, dtype=np.int32)
        word = np.full(self.order, -1, dtype=np.int64)
        for idx, user in enumerate(self.users):
            for w, label in enumerate(user.codewords):
                if not 0 <= label < self.order:
                    raise ValueError(
                        f"user {user.user_id}: codeword {label} outside [0, {self.order})"
                    )
                if owner[label] != -1:
                    raise ValueError(
                        f"label {label} allocated to both user "
                        f"{self.users[owner[label]].user_id} and user {user.user_id}"
                    )
                owner[label] = idx
                word[label] = w
        if self.layout is not None:
            if self.layout.order != self.order:
                raise ValueError("layout order does not match plan order")
            # positional data word is defined for every label
            word = np.fromiter(
                (self.layout.word_of(int(l)) for l in range(self.order)),
                dtype=np.int64,
                count=self.order,
            )
        owner.flags.writeable = False
        word.flags.writeable = False
        object.__setattr__(self, "owner_of_label", owner)
        object.__setattr__(self, "word_of_label", word)

    def user_index(self, user_id: int) -> int:
        for idx, u in enumerate(self.users):
            if u.user_id == user_id:
                return idx
        raise ValueError(f"unknown user id {user_id}")


def map_symbol(plan: AllocationPlan, user_id: int, data_word: int) -> int:
    """Label transmitted by ``user_id`` for ``data_word``."""
    user = plan.users[plan.user_index(user_id)]
    if not 0 <= data_word < (1 << user.data_bits):
        raise ValueError(
            f"data word {data_word} outside [0, {1 << user.data_bits}) for user {user_id}"
        )
    return user.codewords[data_word]


def demap_symbol(plan: AllocationPlan, label: int) -> tuple[int, int] | None:
    """(user_id, data_word) owning ``label``, or None if unallocated."""
    if not 0 <= label < plan.order:
        raise ValueError(f"label {label} outside [0, {plan.order})")
    idx = int(plan.owner_of_label[label])
    if idx < 0:
        return None
    user = plan.users[idx]
    if plan.layout is not None:
        return user.user_id, plan.layout.word_of(label)
    return user.user_id, int(plan.word_of_label[label])


def capacity_enhancement(order: int, data_bits: int) -> int:
    """Users that can share one resource block at ``data_bits`` each.

    Shrinking every user's word from log2(order) to data_bits frees the
    remaining label bits as addresses, multiplying occupancy by their count.
    """
    d = _log2_order(order)
    if not 1 <= data_bits <= d:
        raise ValueError(f"data_bits {data_bits} outside [1, {d}] for order {order}")
    return 1 << (d - data_bits)


def throughput_reduction(order: int, address_bits: int) -> Fraction:
    """Per-user throughput relative to sole occupancy, as an exact ratio.

    Each user keeps (D - A) of its D bits and transmits one symbol in every
    2^A, D = log2(order).
    """
    d = _log2_order(order)
    if not 0 <= address_bits < d:
        raise ValueError(f"address_bits {address_bits} outside [0, {d - 1}] for order {order}")
    return Fraction(d - address_bits, d * (1 << address_bits))


def build_address_bit_plan(order: int, address_positions: Sequence[int]) -> AllocationPlan:
    """Plan with one user per address value at the given bit positions."""
    layout = AddressBitLayout(order=order, address_positions=tuple(address_positions))
    users = []
    for address in range(1 << layout.address_bits):
        codewords = tuple(
            layout.compose(address, w) for w in range(1 << layout.data_bits)
        )
        users.append(
            UserAllocation(user_id=address, data_bits=layout.data_bits, codewords=codewords)
        )
    return AllocationPlan(
        order=order, users=tuple(users), scheme_kind="address-bit", layout=layout
    )


def centered_address_positions(order: int, address_bits: int) -> tuple[int, ...]:
    """Contiguous address positions straddling the label midpoint.

    With an even split this places half the address bits at the bottom of
    the I half and half at the top of the Q half, e.g. order 64 with 2
    address bits gives positions (3, 2).
    """
    d = _log2_order(order)
    if not 1 <= address_bits < d:
        raise ValueError(f"address_bits {address_bits} outside [1, {d - 1}]")
    start = (d + address_bits - 1) // 2
    return tuple(range(start, start - address_bits, -1))


def build_lookup_plan(
    order: int, rows: Iterable[tuple[int, int, int]]
) -> AllocationPlan:
    """Plan from explicit (user_id, data_word, codeword) triples.

    Every user's rows must cover data words 0 .. 2^B - 1 exactly once; B may
    differ between users.
    """
    by_user: dict[int, dict[int, int]] = {}
    for user_id, data_word, codeword in rows:
        table = by_user.setdefault(user_id, {})
        if data_word in table:
            raise ValueError(f"user {user_id}: data word {data_word} listed twice")
        table[data_word] = codeword
    if not by_user:
        raise ValueError("empty lookup table")
    users = []
    for user_id, table in by_user.items():
        count = len(table)
        if count & (count - 1) or count < 2:
            raise ValueError(
                f"user {user_id}: {count} rows do not form a full power-of-two table"
            )
        bits = count.bit_length() - 1
        missing = [w for w in range(count) if w not in table]
        if missing:
            raise ValueError(f"user {user_id}: missing data words {missing}")
        users.append(
            UserAllocation(
                user_id=user_id,
                data_bits=bits,
                codewords=tuple(table[w] for w in range(count)),
            )
        )
    return AllocationPlan(order=order, users=tuple(users), scheme_kind="lookup-table")


def build_qos_plan(order: int, bits_per_user: Sequence[int]) -> AllocationPlan:
    """Plan giving user i a 2^bits_per_user[i]-point share of the grid.

    Labels 0, 1, 2, ... are dealt round-robin to users that still need
    codewords, which interleaves every user's set across the grid. Leftover
    labels stay unallocated.
    """
    if not bits_per_user:
        raise ValueError("bits_per_user is empty")
    if any(b < 1 for b in bits_per_user):
        raise ValueError(f"bits_per_user {list(bits_per_user)} must all be >= 1")
    sizes = [1 << b for b in bits_per_user]
    if sum(sizes) > order:
        raise ValueError(
            f"requested {sum(sizes)} codewords exceed the {order}-point constellation"
        )
    codewords: list[list[int]] = [[] for _ in sizes]
    label = 0
    while any(len(c) < s for c, s in zip(codewords, sizes)):
        for i, (c, s) in enumerate(zip(codewords, sizes)):
            if len(c) < s:
                c.append(label)
                label += 1
    users = tuple(
        UserAllocation(user_id=i, data_bits=b, codewords=tuple(c))
        for i, (b, c) in enumerate(zip(bits_per_user, codewords))
    )
    return AllocationPlan(order=order, users=users, scheme_kind="lookup-table")


def single_user_plan(order: int, user_id: int = 0) -> AllocationPlan:
    """Degenerate plan: one user owns every label, data word == label."""
    d = _log2_order(order)
    user = UserAllocation(
        user_id=user_id, data_bits=d, codewords=tuple(range(order))
    )
    return AllocationPlan(order=order, users=(user,), scheme_kind="lookup-table")


def parse_lookup_table(
    lines: Iterable[str], source: str = "<lookup>"
) -> tuple[int, list[tuple[int, int, int]]]:
    """Parse ``user_id,data_word_binary,codeword_binary`` lines.

    '#' starts a comment; blank lines are skipped. The constellation order
    is inferred from the codeword width, which must be consistent.

    Returns:
        (order, rows) suitable for build_lookup_plan.
    """
    rows: list[tuple[int, int, int]] = []
    word_width: dict[int, int] = {}
    code_width: int | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ValueError(
                f"{source}:{lineno}: expected 'user_id,data_word,codeword', got {raw.strip()!r}"
            )
        user_part, word_part, code_part = parts
        try:
            user_id = int(user_part)
        except ValueError:
            raise ValueError(f"{source}:{lineno}: bad user id {user_part!r}") from None
        word = _parse_binary(word_part, source, lineno)
        code = _parse_binary(code_part, source, lineno)
        if word_width.setdefault(user_id, len(word_part)) != len(word_part):
            raise ValueError(
                f"{source}:{lineno}: user {user_id} mixes data word widths"
            )
        if code_width is None:
            code_width = len(code_part)
        elif code_width != len(code_part):
            raise ValueError(
                f"{source}:{lineno}: codeword width {len(code_part)} != {code_width}"
            )
        rows.append((user_id, word, code))
    if code_width is None:
        raise ValueError(f"{source}: no table rows found")
    return 1 << code_width, rows


def _parse_binary(text: str, source: str, lineno: int) -> int:
    if not text or any(ch not in "01" for ch in text):
        raise ValueError(f"{source}:{lineno}: {text!r} is not a binary string")
    return int(text, 2)


def lookup_plan_from_file(path: str | Path, order: int | None = None) -> AllocationPlan:
    """Build a lookup plan from a table file; see parse_lookup_table."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        inferred, rows = parse_lookup_table(handle, source=str(path))
    if order is not None and order != inferred:
        raise ValueError(
            f"{path}: codeword width implies order {inferred}, expected {order}"
        )
    return build_lookup_plan(inferred, rows)


def format_lookup_table(plan: AllocationPlan) -> str:
    """Render a plan as table-file text (inverse of parse_lookup_table)."""
    d = _log2_order(plan.order)
    lines = ["# user_id,data_word_binary,codeword_binary"]
    for user in plan.users:
        for w, label in enumerate(user.codewords):
            lines.append(f"{user.user_id},{w:0{user.data_bits}b},{label:0{d}b}")
    return "\n".join(lines) + "\n"
