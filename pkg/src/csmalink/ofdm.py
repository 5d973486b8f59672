"""OFDM modulation with a unitary transform and cyclic prefix.

Both directions use the orthonormal DFT (1/sqrt(N) each way), so per-sample
noise statistics are identical in the time and subcarrier domains and
symbol energy is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, nearest_points
from .framing import RbGeometry


@dataclass(frozen=True)
class TimeDomainSignal:
    """Concatenated OFDM symbols, cyclic prefix included."""

    samples: np.ndarray
    samples_per_symbol: int
    symbol_count: int

    def __post_init__(self) -> None:
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        expected = self.samples_per_symbol * self.symbol_count
        if len(self.samples) != expected:
            raise ValueError(
                f"{len(self.samples)} samples != {self.symbol_count} symbols "
                f"x {self.samples_per_symbol}"
            )


def ofdm_modulate(
    grid: np.ndarray, constellation: Constellation, geometry: RbGeometry
) -> TimeDomainSignal:
    """Modulate a label grid (symbols x subcarriers) to time samples.

    Constellation points land on bins subcarrier_offset .. offset+subcarriers-1;
    every other bin, including DC, stays zero. The cyclic prefix copies the
    tail of each symbol body to its front.
    """
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.shape[1] != geometry.subcarriers:
        raise ValueError(
            f"grid shape {grid.shape} does not match {geometry.subcarriers} subcarriers"
        )
    if grid.size and (grid.min() < 0 or grid.max() >= constellation.order):
        raise ValueError(f"grid labels outside [0, {constellation.order})")
    n = geometry.fft_size
    start = geometry.subcarrier_offset
    freq = np.zeros((grid.shape[0], n), dtype=np.complex128)
    freq[:, start : start + geometry.subcarriers] = constellation.points[grid]
    body = np.fft.ifft(freq, axis=1, norm="ortho")
    with_cp = np.concatenate([body[:, n - geometry.cp_length :], body], axis=1)
    return TimeDomainSignal(
        samples=with_cp.reshape(-1),
        samples_per_symbol=n + geometry.cp_length,
        symbol_count=grid.shape[0],
    )


def ofdm_demodulate_bins(
    signal: TimeDomainSignal, geometry: RbGeometry
) -> np.ndarray:
    """Complex subcarrier values before detection, shape (symbols, subcarriers)."""
    n = geometry.fft_size
    per = n + geometry.cp_length
    if signal.samples_per_symbol != per:
        raise ValueError(
            f"signal has {signal.samples_per_symbol} samples per symbol, geometry needs {per}"
        )
    body = signal.samples.reshape(signal.symbol_count, per)[:, geometry.cp_length :]
    freq = np.fft.fft(body, axis=1, norm="ortho")
    start = geometry.subcarrier_offset
    return freq[:, start : start + geometry.subcarriers]


def ofdm_demodulate(
    signal: TimeDomainSignal, constellation: Constellation, geometry: RbGeometry
) -> np.ndarray:
    """Detected point indices per resource-block cell (symbols x subcarriers)."""
    bins = ofdm_demodulate_bins(signal, geometry)
    return nearest_points(constellation, bins)
