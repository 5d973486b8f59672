"""Monte Carlo harness: full transmit/receive chain with seeded sharding.

Work is split into shards of whole slots. Shard t of sweep point p draws
from an RNG stream keyed by (seed, p, t), and results merge by summing
integer counters, so reports are byte-identical for any worker count.

Error accounting per resource-block cell: a symbol error is any decoded
label different from the transmitted one. When the decoded label belongs to
another user (or none) the event is also a user confusion. Data-bit errors
compare data words: for address-embedded plans (and the single-user plan)
the decoded label's data-bit positions are read directly, modeling a
receiver that knows its own schedule and treats address bits purely as
identifiers; for lookup plans a foreign label carries no comparable data
word, so all of the cell's data bits count as errors (worst case).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analytics import ber_gray_approx, ser_mqam
from .channel import SnrSpec, add_awgn, resolve_symbol_snr
from .constellation import Constellation, build_qam
from .framing import RbGeometry, SlotSchedule, round_robin_schedule, weighted_schedule
from .mapping import (
    AllocationPlan,
    build_address_bit_plan,
    build_lookup_plan,
    build_qos_plan,
    centered_address_positions,
    single_user_plan,
)
from .ofdm import TimeDomainSignal, ofdm_demodulate, ofdm_modulate

PLAN_KINDS = ("single-user", "address-bit", "lookup-table", "qos")
SCHEDULE_KINDS = ("round-robin", "weighted")

# shards per point before the minimum symbol count is reached
_SHARDS_TO_MINIMUM = 8


@dataclass(frozen=True)
class PlanSpec:
    """Declarative description of an allocation plan."""

    kind: str
    address_positions: tuple[int, ...] | None = None
    qos_bits: tuple[int, ...] | None = None
    lookup_rows: tuple[tuple[int, int, int], ...] | None = None
    lookup_order: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in PLAN_KINDS:
            raise ValueError(f"plan kind must be one of {PLAN_KINDS}, got {self.kind!r}")
        if self.kind == "address-bit" and not self.address_positions:
            raise ValueError("address-bit plan needs address_positions")
        if self.kind == "qos" and not self.qos_bits:
            raise ValueError("qos plan needs qos_bits")
        if self.kind == "lookup-table" and not self.lookup_rows:
            raise ValueError("lookup-table plan needs lookup_rows")

    def build(self, order: int) -> AllocationPlan:
        if self.kind == "single-user":
            return single_user_plan(order)
        if self.kind == "address-bit":
            return build_address_bit_plan(order, self.address_positions)
        if self.kind == "qos":
            return build_qos_plan(order, self.qos_bits)
        if self.lookup_order is not None and self.lookup_order != order:
            raise ValueError(
                f"lookup table is for order {self.lookup_order}, experiment uses {order}"
            )
        return build_lookup_plan(order, self.lookup_rows)


@dataclass(frozen=True)
class ScheduleSpec:
    """How plan users share a slot's OFDM symbols."""

    kind: str = "round-robin"
    weights: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(
                f"schedule kind must be one of {SCHEDULE_KINDS}, got {self.kind!r}"
            )
        if self.kind == "weighted" and not self.weights:
            raise ValueError("weighted schedule needs weights")

    def build(self, user_ids: Sequence[int], symbols_per_slot: int) -> SlotSchedule:
        if self.kind == "round-robin":
            return round_robin_schedule(user_ids, symbols_per_slot)
        return weighted_schedule(user_ids, self.weights, symbols_per_slot)


@dataclass(frozen=True)
class SweepSpec:
    """SNR sweep axis. start == stop == inf runs a noiseless point."""

    mode: str = "symbol"
    start_db: float = 0.0
    stop_db: float = 18.0
    step_db: float = 2.0
    data_bits: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("symbol", "databit"):
            raise ValueError(f"snr mode must be symbol or databit, got {self.mode!r}")
        for name, v in (("start_db", self.start_db), ("stop_db", self.stop_db)):
            if math.isnan(v) or v == -math.inf:
                raise ValueError(f"{name} is {v}")
        if math.isinf(self.start_db) or math.isinf(self.stop_db):
            if self.start_db != self.stop_db:
                raise ValueError("infinite sweep bounds must be a single point")
        elif self.start_db > self.stop_db:
            raise ValueError(f"start_db {self.start_db} > stop_db {self.stop_db}")
        if not self.step_db > 0:
            raise ValueError(f"step_db must be > 0, got {self.step_db}")
        if self.data_bits is not None and self.data_bits < 1:
            raise ValueError("data_bits must be >= 1")

    def points(self) -> tuple[float, ...]:
        if math.isinf(self.start_db):
            return (self.start_db,)
        count = int(math.floor((self.stop_db - self.start_db) / self.step_db + 1e-9)) + 1
        return tuple(self.start_db + k * self.step_db for k in range(count))


@dataclass(frozen=True)
class StopRule:
    """Per-point stop: min_symbols reached AND (min_errors reached OR cap hit)."""

    min_symbols: int = 200_000
    min_errors: int = 200
    symbol_cap: int = 10_000_000

    def __post_init__(self) -> None:
        if self.min_symbols < 10_000:
            raise ValueError(f"min_symbols must be >= 10000, got {self.min_symbols}")
        if self.min_errors < 0:
            raise ValueError("min_errors must be >= 0")
        if self.symbol_cap < self.min_symbols:
            raise ValueError(
                f"symbol_cap {self.symbol_cap} below min_symbols {self.min_symbols}"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one sweep."""

    order: int
    plan: PlanSpec
    sweep: SweepSpec
    geometry: RbGeometry = RbGeometry()
    schedule: ScheduleSpec = ScheduleSpec()
    stop: StopRule = StopRule()
    seed: int = 0
    groups: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed {self.seed} outside unsigned 64-bit range")
        if self.groups < 1:
            raise ValueError(f"groups must be >= 1, got {self.groups}")


@dataclass(frozen=True)
class ReportRow:
    """Counts and rates for one (sweep point, user); user_id -1 aggregates."""

    snr_db: float
    snr_mode: str
    user_id: int
    symbols_sent: int
    symbol_errors: int
    data_bits_sent: int
    data_bit_errors: int
    user_confusions: int
    theory_ser: float
    theory_ber: float

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.symbols_sent if self.symbols_sent else 0.0

    @property
    def ber(self) -> float:
        return self.data_bit_errors / self.data_bits_sent if self.data_bits_sent else 0.0


@dataclass(frozen=True)
class BerReport:
    """All rows of one experiment, sweep-point major, aggregate row last."""

    rows: tuple[ReportRow, ...]

    def aggregate_rows(self) -> list[ReportRow]:
        return [r for r in self.rows if r.user_id == -1]

    def user_rows(self, user_id: int) -> list[ReportRow]:
        return [r for r in self.rows if r.user_id == user_id]

    def snr_points(self) -> list[float]:
        seen: list[float] = []
        for r in self.rows:
            if r.snr_db not in seen:
                seen.append(r.snr_db)
        return seen


@dataclass
class _Counters:
    symbols: np.ndarray
    symbol_errors: np.ndarray
    bit_errors: np.ndarray
    confusions: np.ndarray

    @staticmethod
    def zeros(n_users: int) -> "_Counters":
        return _Counters(
            symbols=np.zeros(n_users, dtype=np.int64),
            symbol_errors=np.zeros(n_users, dtype=np.int64),
            bit_errors=np.zeros(n_users, dtype=np.int64),
            confusions=np.zeros(n_users, dtype=np.int64),
        )

    def merge(self, other: "_Counters") -> None:
        self.symbols += other.symbols
        self.symbol_errors += other.symbol_errors
        self.bit_errors += other.bit_errors
        self.confusions += other.confusions


@dataclass
class _EngineContext:
    """Precomputed, picklable state shared by every shard."""

    order: int
    constellation: Constellation
    geometry: RbGeometry
    user_ids: tuple[int, ...]
    user_bits: np.ndarray
    codewords: tuple[np.ndarray, ...]
    owner_of_label: np.ndarray
    word_of_label: np.ndarray
    positional_words: bool
    popcount: np.ndarray
    schedule_cycle: np.ndarray
    slots_per_shard: int
    snr_mode: str
    snr_db: tuple[float, ...]
    snr_linear: tuple[float, ...]
    stop: StopRule
    seed: int


def _schedule_cycle(weights: tuple[int, ...]) -> np.ndarray:
    """One full period of smoothed weighted round-robin picks.

    Credits return to zero after sum(weights) picks, so tiling this cycle
    serves users in exact proportion over any whole number of periods.
    """
    total = sum(weights)
    credits = [0] * len(weights)
    picks = np.empty(total, dtype=np.int64)
    for step in range(total):
        for i, w in enumerate(weights):
            credits[i] += w
        pick = max(range(len(weights)), key=lambda i: (credits[i], -i))
        credits[pick] -= total
        picks[step] = pick
    return picks


def _build_context(config: ExperimentConfig) -> _EngineContext:
    plan = config.plan.build(config.order)
    constellation = build_qam(config.order)
    user_ids = tuple(u.user_id for u in plan.users)
    config.schedule.build(user_ids, config.geometry.symbols_per_slot)
    if config.schedule.kind == "weighted":
        weights = tuple(config.schedule.weights)
    else:
        weights = (1,) * len(user_ids)
    schedule_cycle = _schedule_cycle(weights)

    data_bits = config.sweep.data_bits
    if config.sweep.mode == "databit" and data_bits is None:
        widths = {u.data_bits for u in plan.users}
        if len(widths) != 1:
            raise ValueError(
                "per-data-bit sweep over mixed word widths needs an explicit data_bits"
            )
        data_bits = widths.pop()

    points = config.sweep.points()
    linear = tuple(
        resolve_symbol_snr(
            SnrSpec(mode=config.sweep.mode, value_db=db, data_bits_per_symbol=data_bits)
        )
        for db in points
    )

    max_bits = max(u.data_bits for u in plan.users)
    popcount = np.array(
        [bin(x).count("1") for x in range(1 << max_bits)], dtype=np.int64
    )
    slot_cells = config.geometry.symbols_per_slot * config.geometry.subcarriers
    slots_per_shard = max(
        1, -(-config.stop.min_symbols // (_SHARDS_TO_MINIMUM * slot_cells))
    )
    return _EngineContext(
        order=config.order,
        constellation=constellation,
        geometry=config.geometry,
        user_ids=user_ids,
        user_bits=np.array([u.data_bits for u in plan.users], dtype=np.int64),
        codewords=tuple(np.array(u.codewords, dtype=np.int64) for u in plan.users),
        owner_of_label=np.asarray(plan.owner_of_label, dtype=np.int64),
        word_of_label=np.asarray(plan.word_of_label, dtype=np.int64),
        positional_words=plan.layout is not None or len(plan.users) == 1,
        popcount=popcount,
        schedule_cycle=schedule_cycle,
        slots_per_shard=slots_per_shard,
        snr_mode=config.sweep.mode,
        snr_db=points,
        snr_linear=linear,
        stop=config.stop,
        seed=config.seed,
    )


def _shard_counts(ctx: _EngineContext, point_idx: int, shard_idx: int) -> _Counters:
    """Transmit and receive one shard of slots at one sweep point."""
    rng = np.random.default_rng(
        np.random.SeedSequence([ctx.seed, point_idx, shard_idx])
    )
    n_users = len(ctx.user_ids)
    subcarriers = ctx.geometry.subcarriers
    # The schedule cycle continues across slot and shard boundaries so every
    # user's long-run symbol share tracks its weight exactly.
    total_symbols = ctx.slots_per_shard * ctx.geometry.symbols_per_slot
    start = shard_idx * total_symbols
    owner = ctx.schedule_cycle[
        (start + np.arange(total_symbols)) % len(ctx.schedule_cycle)
    ]
    grid = np.empty((len(owner), subcarriers), dtype=np.int64)
    tx_word = np.empty_like(grid)
    for ui in range(n_users):
        rows = owner == ui
        count = int(rows.sum())
        if count == 0:
            continue
        words = rng.integers(0, 1 << int(ctx.user_bits[ui]), size=count * subcarriers)
        grid[rows] = ctx.codewords[ui][words].reshape(count, subcarriers)
        tx_word[rows] = words.reshape(count, subcarriers)

    signal = ofdm_modulate(grid, ctx.constellation, ctx.geometry)
    snr = ctx.snr_linear[point_idx]
    samples = add_awgn(signal.samples, snr, rng) if math.isfinite(snr) else signal.samples
    received = ofdm_demodulate(
        TimeDomainSignal(samples, signal.samples_per_symbol, signal.symbol_count),
        ctx.constellation,
        ctx.geometry,
    )

    cell_user = np.repeat(owner, subcarriers)
    tx_labels = grid.reshape(-1)
    rx_labels = received.reshape(-1)
    tx_words = tx_word.reshape(-1)
    errors = rx_labels != tx_labels
    confusions = errors & (ctx.owner_of_label[rx_labels] != cell_user)
    bit_errors = np.zeros(len(tx_labels), dtype=np.int64)
    if ctx.positional_words:
        e = errors
        bit_errors[e] = ctx.popcount[tx_words[e] ^ ctx.word_of_label[rx_labels[e]]]
    else:
        same = errors & ~confusions
        bit_errors[same] = ctx.popcount[
            tx_words[same] ^ ctx.word_of_label[rx_labels[same]]
        ]
        bit_errors[confusions] = ctx.user_bits[cell_user[confusions]]

    return _Counters(
        symbols=np.bincount(cell_user, minlength=n_users),
        symbol_errors=np.bincount(cell_user[errors], minlength=n_users),
        bit_errors=np.bincount(cell_user, weights=bit_errors, minlength=n_users).astype(
            np.int64
        ),
        confusions=np.bincount(cell_user[confusions], minlength=n_users),
    )


def _stop_met(ctx: _EngineContext, point_idx: int, acc: _Counters) -> bool:
    symbols = int(acc.symbols.sum())
    errors = int(acc.symbol_errors.sum())
    if symbols < ctx.stop.min_symbols:
        return False
    if math.isinf(ctx.snr_linear[point_idx]):
        return True  # noiseless: no error count will ever accumulate
    return errors >= ctx.stop.min_errors or symbols >= ctx.stop.symbol_cap


_WORKER_CTX: _EngineContext | None = None


def _init_worker(ctx: _EngineContext) -> None:
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _worker_shard(point_idx: int, shard_idx: int) -> _Counters:
    return _shard_counts(_WORKER_CTX, point_idx, shard_idx)


def _run_point_serial(ctx: _EngineContext, point_idx: int) -> _Counters:
    acc = _Counters.zeros(len(ctx.user_ids))
    shard = 0
    while True:
        acc.merge(_shard_counts(ctx, point_idx, shard))
        shard += 1
        if _stop_met(ctx, point_idx, acc):
            return acc


def _run_point_pool(
    ctx: _EngineContext, point_idx: int, pool: ProcessPoolExecutor, window: int
) -> _Counters:
    """Same shard sequence as the serial path, evaluated speculatively.

    The stop rule is applied to shard prefixes in index order, so the set of
    shards contributing to the result is identical to the serial run; extra
    speculative shards are discarded.
    """
    acc = _Counters.zeros(len(ctx.user_ids))
    futures = {}
    next_submit = 0
    prefix = 0
    while True:
        while next_submit < prefix + window:
            futures[next_submit] = pool.submit(_worker_shard, point_idx, next_submit)
            next_submit += 1
        acc.merge(futures.pop(prefix).result())
        prefix += 1
        if _stop_met(ctx, point_idx, acc):
            for leftover in futures.values():
                leftover.cancel()
            return acc


def run_experiment(config: ExperimentConfig, workers: int = 1) -> BerReport:
    """Run the configured sweep; byte-identical for any worker count."""
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    ctx = _build_context(config)
    per_point: list[_Counters] = []
    if workers == 1:
        for point_idx in range(len(ctx.snr_db)):
            per_point.append(_run_point_serial(ctx, point_idx))
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(ctx,)
        ) as pool:
            for point_idx in range(len(ctx.snr_db)):
                per_point.append(
                    _run_point_pool(ctx, point_idx, pool, window=2 * workers)
                )

    rows: list[ReportRow] = []
    for point_idx, db in enumerate(ctx.snr_db):
        acc = per_point[point_idx]
        snr = ctx.snr_linear[point_idx]
        t_ser = float(ser_mqam(ctx.order, snr))
        t_ber = float(ber_gray_approx(ctx.order, snr))
        for ui, uid in enumerate(ctx.user_ids):
            rows.append(
                ReportRow(
                    snr_db=db,
                    snr_mode=ctx.snr_mode,
                    user_id=uid,
                    symbols_sent=int(acc.symbols[ui]),
                    symbol_errors=int(acc.symbol_errors[ui]),
                    data_bits_sent=int(acc.symbols[ui] * ctx.user_bits[ui]),
                    data_bit_errors=int(acc.bit_errors[ui]),
                    user_confusions=int(acc.confusions[ui]),
                    theory_ser=t_ser,
                    theory_ber=t_ber,
                )
            )
        rows.append(
            ReportRow(
                snr_db=db,
                snr_mode=ctx.snr_mode,
                user_id=-1,
                symbols_sent=int(acc.symbols.sum()),
                symbol_errors=int(acc.symbol_errors.sum()),
                data_bits_sent=int((acc.symbols * ctx.user_bits).sum()),
                data_bit_errors=int(acc.bit_errors.sum()),
                user_confusions=int(acc.confusions.sum()),
                theory_ser=t_ser,
                theory_ber=t_ber,
            )
        )
    return BerReport(rows=tuple(rows))


def compare_user_scaling(
    config: ExperimentConfig,
    user_counts: Sequence[int] = (1, 4, 8),
    workers: int = 1,
) -> dict[int, BerReport]:
    """Rerun one sweep template with 1..n users sharing the constellation.

    A count of 1 uses the whole label space for one user; a count of 2^A
    replaces the plan with A centered address bits, shrinking every user's
    data word accordingly. All runs share the template's seed, geometry,
    sweep, and stop rule.
    """
    bits = config.order.bit_length() - 1
    reports: dict[int, BerReport] = {}
    for count in user_counts:
        if count < 1 or count & (count - 1):
            raise ValueError(f"user count {count} is not a power of two")
        if count == 1:
            plan_spec = PlanSpec(kind="single-user")
        else:
            address_bits = count.bit_length() - 1
            if address_bits >= bits:
                raise ValueError(
                    f"{count} users do not fit an order-{config.order} constellation"
                )
            plan_spec = PlanSpec(
                kind="address-bit",
                address_positions=centered_address_positions(config.order, address_bits),
            )
        reports[count] = run_experiment(replace(config, plan=plan_spec), workers=workers)
    return reports
