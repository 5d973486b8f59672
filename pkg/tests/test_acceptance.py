"""Acceptance gate: nine end-to-end checks, one printed verdict line each."""

import contextlib
import math
import os
import time
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

import csmalink
from csmalink import (
    ExperimentConfig,
    PlanSpec,
    RbGeometry,
    StopRule,
    SweepSpec,
    add_awgn,
    ber_gray_approx,
    build_qam,
    compare_user_scaling,
    load_config,
    ofdm_demodulate,
    ofdm_modulate,
    parse_config,
    run_experiment,
    ser_data_width,
    ser_mqam,
    ser_shared,
    throughput_reduction,
)
from csmalink.cli import main
from csmalink.report import report_csv

FIXTURES = os.path.join(os.path.dirname(csmalink.__file__), "fixtures")


@contextlib.contextmanager
def criterion(number, label, cap):
    """Run one acceptance check and print its verdict past pytest's capture."""
    outcome = "FAIL"
    try:
        yield
        outcome = "PASS"
    finally:
        with cap.disabled():
            print(
                f"ACCEPTANCE: criterion {number} ({label}) ... {outcome}",
                flush=True,
            )


def db_at_ber(rows, target):
    """Interpolate the dB point where a falling BER curve crosses target."""
    points = sorted((r.snr_db, r.ber) for r in rows)
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if y0 > 0.0 and y1 > 0.0 and y0 >= target >= y1:
            span = math.log10(y1) - math.log10(y0)
            t = (math.log10(target) - math.log10(y0)) / span
            return x0 + t * (x1 - x0)
    raise AssertionError(f"no crossing of {target} in {points}")


def test_criterion_1_capacity_table(capsys):
    with criterion(1, "capacity table", capsys):
        start = time.perf_counter()
        assert main(["capacity-table"]) == 0
        elapsed = time.perf_counter() - start
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines == [
            "64-QAM, B=4 -> 4",
            "64-QAM, B=3 -> 8",
            "64-QAM, B=2 -> 16",
            "256-QAM, B=6 -> 4",
            "256-QAM, B=4 -> 16",
            "256-QAM, B=2 -> 64",
            "1024-QAM, B=8 -> 4",
            "1024-QAM, B=6 -> 16",
            "1024-QAM, B=4 -> 64",
        ]
        assert elapsed < 1.0


def test_criterion_2_simulation_matches_closed_form(capsys):
    with criterion(2, "simulated SER tracks the closed form", capsys):
        start = time.perf_counter()
        for order in (4, 16, 64):
            config = ExperimentConfig(
                order=order,
                plan=PlanSpec(kind="single-user"),
                sweep=SweepSpec(mode="symbol", start_db=0.0, stop_db=18.0,
                                step_db=2.0),
                stop=StopRule(min_symbols=200_000, min_errors=200,
                              symbol_cap=200_000),
                seed=42,
            )
            report = run_experiment(config)
            for row in report.aggregate_rows():
                p = ser_mqam(order, 10.0 ** (row.snr_db / 10.0))
                if p * row.symbols_sent < 100.0:
                    continue
                sigma = math.sqrt(p * (1.0 - p) / row.symbols_sent)
                assert abs(row.ser - p) <= 3.0 * sigma, (
                    f"{order}-QAM at {row.snr_db} dB: "
                    f"{row.ser} vs {p} (sigma {sigma})"
                )
        assert time.perf_counter() - start < 120.0


def test_criterion_3_noiseless_chain_is_exact(capsys):
    with criterion(3, "noise-free end-to-end identity", capsys):
        from csmalink import parse_lookup_table

        plans = []
        for name in ("uniform4_16qam.map", "qos3_16qam.map"):
            with open(os.path.join(FIXTURES, name)) as handle:
                order, rows = parse_lookup_table(handle, source=name)
            plans.append((order, PlanSpec(kind="lookup-table",
                                          lookup_rows=tuple(rows),
                                          lookup_order=order)))
        plans.insert(1, (64, PlanSpec(kind="address-bit",
                                      address_positions=(3, 2))))

        for order, plan in plans:
            config = ExperimentConfig(
                order=order,
                plan=plan,
                sweep=SweepSpec(mode="symbol", start_db=math.inf,
                                stop_db=math.inf),
                stop=StopRule(min_symbols=100_000, min_errors=1,
                              symbol_cap=10_000_000),
                seed=7,
            )
            report = run_experiment(config)
            for row in report.rows:
                assert row.symbols_sent >= 100_000 or row.user_id != -1
                assert row.symbol_errors == 0
                assert row.data_bit_errors == 0
                assert row.user_confusions == 0


def test_criterion_4_shared_vs_exclusive_gap(capsys):
    with criterion(4, "shared 64-QAM vs exclusive 16-QAM BER gap", capsys):
        start = time.perf_counter()
        loaded = load_config(os.path.join(FIXTURES, "shared_vs_exclusive.cfg"))
        reports = {name: run_experiment(config)
                   for name, config in loaded.runs.items()}
        exclusive = {r.snr_db: r for r in reports["exclusive"].aggregate_rows()}
        shared = {r.snr_db: r for r in reports["shared"].aggregate_rows()}

        qualifying = 0
        for db in exclusive:
            rows = (exclusive[db], shared[db])
            if all(r.theory_ber * r.data_bits_sent >= 100.0 for r in rows):
                qualifying += 1
                assert shared[db].ber > exclusive[db].ber, f"at {db} dB"
        assert qualifying >= 5

        target = 1e-3
        measured_gap = (db_at_ber(shared.values(), target)
                        - db_at_ber(exclusive.values(), target))

        def crossing(order):
            return brentq(
                lambda db: ber_gray_approx(order, 4.0 * 10.0 ** (db / 10.0))
                - target,
                0.0, 30.0,
            )

        predicted_gap = crossing(64) - crossing(16)
        assert abs(measured_gap - predicted_gap) <= 0.5, (
            f"measured {measured_gap:.3f} dB vs predicted {predicted_gap:.3f} dB"
        )
        assert time.perf_counter() - start < 180.0


def test_criterion_5_user_scaling_ordering(capsys):
    with criterion(5, "1/4/8-user BER ordering and shared-grid SER", capsys):
        loaded = load_config(os.path.join(FIXTURES, "user_scaling.cfg"))
        reports = {name: run_experiment(config)
                   for name, config in loaded.runs.items()}
        by_db = {
            name: {r.snr_db: r for r in report.aggregate_rows()}
            for name, report in reports.items()
        }
        for db in by_db["users1"]:
            rows = [by_db[name][db] for name in ("users1", "users4", "users8")]
            if not all(r.theory_ber * r.data_bits_sent >= 100.0 for r in rows):
                continue
            assert rows[0].ber <= rows[1].ber <= rows[2].ber, f"at {db} dB"

        base = ExperimentConfig(
            order=64,
            plan=PlanSpec(kind="single-user"),
            sweep=SweepSpec(mode="symbol", start_db=6.0, stop_db=14.0,
                            step_db=4.0),
            stop=StopRule(min_symbols=200_000, min_errors=200,
                          symbol_cap=200_000),
            seed=13,
        )
        scaled = compare_user_scaling(base, user_counts=(1, 4, 8))
        rates = {
            count: {r.snr_db: r for r in report.aggregate_rows()}
            for count, report in scaled.items()
        }
        for db in rates[1]:
            for a, b in ((1, 4), (1, 8), (4, 8)):
                ra, rb = rates[a][db], rates[b][db]
                pooled = ((ra.symbol_errors + rb.symbol_errors)
                          / (ra.symbols_sent + rb.symbols_sent))
                sigma = math.sqrt(
                    pooled * (1.0 - pooled)
                    * (1.0 / ra.symbols_sent + 1.0 / rb.symbols_sent)
                )
                assert abs(ra.ser - rb.ser) <= 3.0 * sigma, (
                    f"{a} vs {b} users at {db} dB"
                )


def test_criterion_6_throughput_spot_values(capsys):
    with criterion(6, "throughput reduction exact rationals", capsys):
        assert throughput_reduction(64, 2) == Fraction(1, 6)
        assert throughput_reduction(256, 4) == Fraction(1, 32)
        assert isinstance(throughput_reduction(64, 2), Fraction)


def test_criterion_7_invariant_suites(capsys):
    with criterion(7, "allocation, labeling, and numeric invariants", capsys):
        from csmalink import AllocationPlan, centered_address_positions, gray_encode

        # disjoint ownership and word round-trip, exhaustive per plan
        def check_plan(plan):
            owners = np.full(plan.order, -2, dtype=np.int64)
            for uid, user in enumerate(plan.users):
                codewords = np.asarray(user.codewords, dtype=np.int64)
                assert owners[codewords].max() == -2  # no double ownership
                owners[codewords] = uid
                np.testing.assert_array_equal(
                    plan.owner_of_label[codewords], uid
                )
                np.testing.assert_array_equal(
                    plan.word_of_label[codewords],
                    np.arange(len(codewords)),
                )

        for order in (4, 16, 64, 256, 1024):
            depth = order.bit_length() - 1
            check_plan(PlanSpec(kind="single-user").build(order))
            for address_bits in range(1, min(depth, 5)):
                positions = centered_address_positions(order, address_bits)
                plan = PlanSpec(kind="address-bit",
                                address_positions=positions).build(order)
                check_plan(plan)
                assert len(plan.users) == 2 ** address_bits

        rng = np.random.default_rng(2026)
        for _ in range(1000):
            order = int(rng.choice((4, 16, 64, 256)))
            labels = rng.permutation(order)
            rows = []
            cursor = 0
            uid = 1
            while cursor < order:
                width = int(rng.integers(1, order.bit_length()))
                take = min(1 << width, order - cursor)
                take = 1 << (take.bit_length() - 1)  # largest power of two
                chunk = labels[cursor:cursor + take]
                rows.extend(
                    (uid, word, int(label))
                    for word, label in enumerate(chunk)
                )
                cursor += take
                uid += 1
                if rng.random() < 0.2:
                    break  # leave the rest unallocated
            plan = PlanSpec(kind="lookup-table", lookup_rows=tuple(rows),
                            lookup_order=order).build(order)
            check_plan(plan)

        # axis-adjacent labels differ in exactly one bit
        for exponent in range(2, 13, 2):
            order = 1 << exponent
            side = 1 << (exponent // 2)
            codes = [gray_encode(i) for i in range(side)]
            for a, b in zip(codes, codes[1:]):
                assert bin(a ^ b).count("1") == 1

        # unit average energy
        for exponent in range(2, 13, 2):
            grid = build_qam(1 << exponent)
            energy = np.mean(np.abs(grid.points) ** 2)
            assert abs(energy - 1.0) < 1e-12

        # unitary OFDM round trip
        from csmalink import ofdm_demodulate_bins

        geometry = RbGeometry()
        grid = build_qam(1024)
        cells = rng.integers(0, 1024, (geometry.symbols_per_slot,
                                       geometry.subcarriers))
        signal = ofdm_modulate(cells, grid, geometry)
        bins = ofdm_demodulate_bins(signal, geometry)
        assert np.max(np.abs(bins - grid.points[cells])) < 1e-9
        labels = ofdm_demodulate(signal, grid, geometry)
        np.testing.assert_array_equal(labels, cells)

        # shared-grid SER never beats the exclusive-grid SER
        snrs = np.logspace(-2, 4, 50)
        for data_bits in (2, 4, 6):
            for address_bits in (2, 4, 6, 8):
                if data_bits + address_bits > 12:
                    continue
                for snr in snrs:
                    assert (ser_shared(data_bits, address_bits, snr)
                            >= ser_data_width(data_bits, snr) - 1e-15)


def test_criterion_8_deterministic_reports(capsys):
    with criterion(8, "byte-identical reports across runs and workers", capsys):
        text = """\
schema_version = 1
seed = 77
order = 64
plan.kind = address-bit
plan.address_positions = 3, 2
snr.start_db = 6
snr.stop_db = 10
snr.step_db = 2
stop.min_symbols = 20000
stop.min_errors = 50
stop.symbol_cap = 40000
"""
        config = parse_config(text, path="inline.cfg").single_run()
        first = report_csv(run_experiment(config, workers=1))
        second = report_csv(run_experiment(config, workers=1))
        pooled = report_csv(run_experiment(config, workers=4))
        assert first == second
        assert first == pooled


def test_criterion_9_awgn_calibration(capsys):
    with criterion(9, "AWGN level calibration", capsys):
        rng = np.random.default_rng(99)
        phases = rng.uniform(0.0, 2.0 * np.pi, 1_000_000)
        clean = np.exp(1j * phases)
        for requested_db in (0.0, 10.0, 20.0):
            noisy = add_awgn(clean, 10.0 ** (requested_db / 10.0), rng)
            noise_power = np.mean(np.abs(noisy - clean) ** 2)
            measured_db = 10.0 * math.log10(1.0 / noise_power)
            assert abs(measured_db - requested_db) <= 0.1
