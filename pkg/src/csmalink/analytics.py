"""Closed-form error rates for square QAM under AWGN.

All rates take the *linear* per-symbol SNR. The symbol error probability of
an M-point square grid with minimum-distance detection is

    P_s = 1 - (1 - p)^2,   p = 2 (sqrt(M)-1)/sqrt(M) * Q(sqrt(3 snr / (M-1)))

and the Gray-labeling bit error approximation divides by log2(M).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy import special

FORMULA_IDS = ("mqam", "data-width", "shared", "ber-approx")


def q_function(x):
    """Gaussian tail probability Q(x), vectorized."""
    return 0.5 * special.erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def _check_square_order(order: int) -> int:
    """Bits per symbol of a square (power-of-4) order >= 4."""
    if order < 4 or order & (order - 1) or (order.bit_length() - 1) % 2:
        raise ValueError(f"order {order} is not a square power of two >= 4")
    return order.bit_length() - 1


def _check_snr(snr_linear):
    snr = np.asarray(snr_linear, dtype=np.float64)
    if np.any(np.isnan(snr)) or np.any(snr < 0):
        raise ValueError("snr_linear must be >= 0")
    return snr


def ser_mqam(order: int, snr_linear):
    """Symbol error probability of square order-M QAM at the given SNR."""
    _check_square_order(order)
    snr = _check_snr(snr_linear)
    root_m = math.sqrt(order)
    p_axis = (2.0 * (root_m - 1.0) / root_m) * q_function(
        np.sqrt(3.0 * snr / (order - 1.0))
    )
    out = 1.0 - (1.0 - p_axis) ** 2
    return float(out) if np.isscalar(snr_linear) else out


def ser_data_width(data_bits: int, snr_linear):
    """Symbol error probability when each symbol carries data_bits bits.

    The detected constellation is 2^data_bits points, so data_bits must be
    even to stay square.
    """
    if data_bits < 2 or data_bits % 2:
        raise ValueError(f"data_bits {data_bits} does not give a square constellation")
    return ser_mqam(1 << data_bits, snr_linear)


def ser_shared(data_bits: int, address_bits: int, snr_linear):
    """Symbol error probability with address_bits added per symbol.

    Detection runs over the enlarged 2^(data_bits+address_bits) grid, which
    must still be square.
    """
    if data_bits < 1:
        raise ValueError(f"data_bits must be >= 1, got {data_bits}")
    if address_bits < 1:
        raise ValueError(f"address_bits must be >= 1, got {address_bits}")
    if (data_bits + address_bits) % 2:
        raise ValueError(
            f"data_bits + address_bits = {data_bits + address_bits} must be even"
        )
    return ser_mqam(1 << (data_bits + address_bits), snr_linear)


def ber_gray_approx(order: int, snr_linear):
    """Gray-labeling bit error approximation: SER / log2(order)."""
    bits = _check_square_order(order)
    result = ser_mqam(order, snr_linear)
    return result / bits


@dataclass(frozen=True)
class TheoryCurve:
    """A sampled closed-form error-rate curve."""

    formula_id: str
    snr_mode: str
    snr_db: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.formula_id not in FORMULA_IDS:
            raise ValueError(f"formula_id must be one of {FORMULA_IDS}")
        if len(self.snr_db) != len(self.values):
            raise ValueError("snr_db and values lengths differ")


def theory_curve(
    formula_id: str,
    snr_db: Sequence[float],
    *,
    order: int | None = None,
    data_bits: int | None = None,
    address_bits: int | None = None,
    snr_mode: str = "symbol",
) -> TheoryCurve:
    """Evaluate one formula over a dB grid.

    In "databit" mode each axis value is scaled by the number of data bits
    per symbol before evaluating: data_bits when given, else log2(order).
    """
    if snr_mode not in ("symbol", "databit"):
        raise ValueError(f"unknown snr_mode {snr_mode!r}")
    if formula_id in ("mqam", "ber-approx"):
        if order is None:
            raise ValueError(f"{formula_id} needs order")
        bits_for_axis = data_bits if data_bits is not None else _check_square_order(order)
        fn = lambda snr: (ser_mqam if formula_id == "mqam" else ber_gray_approx)(order, snr)
    elif formula_id == "data-width":
        if data_bits is None:
            raise ValueError("data-width needs data_bits")
        bits_for_axis = data_bits
        fn = lambda snr: ser_data_width(data_bits, snr)
    elif formula_id == "shared":
        if data_bits is None or address_bits is None:
            raise ValueError("shared needs data_bits and address_bits")
        bits_for_axis = data_bits
        fn = lambda snr: ser_shared(data_bits, address_bits, snr)
    else:
        raise ValueError(f"formula_id must be one of {FORMULA_IDS}")
    values = []
    for db in snr_db:
        snr = math.inf if math.isinf(db) else 10.0 ** (db / 10.0)
        if snr_mode == "databit" and not math.isinf(db):
            snr *= bits_for_axis
        values.append(float(fn(snr)))
    return TheoryCurve(
        formula_id=formula_id,
        snr_mode=snr_mode,
        snr_db=tuple(float(v) for v in snr_db),
        values=tuple(values),
    )
