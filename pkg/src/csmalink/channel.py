"""AWGN channel and SNR bookkeeping.

SNR is defined against the subcarrier-domain symbol energy (unit for the
constellations built here). Because the transform is unitary, noise added
per time-domain sample has exactly the same per-sample variance seen on the
subcarriers, so the channel may operate in either domain; the simulator
adds it in the time domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SNR_MODES = ("symbol", "databit")


@dataclass(frozen=True)
class SnrSpec:
    """An SNR operating point.

    In "databit" mode value_db is energy per *data* bit over noise density;
    the per-symbol ratio is recovered by multiplying with the number of data
    bits carried per symbol (address bits do not count).
    """

    mode: str
    value_db: float
    data_bits_per_symbol: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in SNR_MODES:
            raise ValueError(f"snr mode must be one of {SNR_MODES}, got {self.mode!r}")
        if math.isnan(self.value_db) or self.value_db == -math.inf:
            raise ValueError(f"value_db {self.value_db} is not usable")
        if self.mode == "databit":
            if self.data_bits_per_symbol is None or self.data_bits_per_symbol < 1:
                raise ValueError("databit mode needs data_bits_per_symbol >= 1")


def resolve_symbol_snr(spec: SnrSpec) -> float:
    """Linear per-symbol SNR for a spec; +inf passes through (noiseless)."""
    if math.isinf(spec.value_db):
        return math.inf
    linear = 10.0 ** (spec.value_db / 10.0)
    if spec.mode == "databit":
        linear *= spec.data_bits_per_symbol
    return linear


def add_awgn(
    samples: np.ndarray,
    snr_linear: float,
    rng: np.random.Generator,
    reference_power: float = 1.0,
) -> np.ndarray:
    """Add circularly-symmetric complex Gaussian noise.

    Total noise variance per sample is reference_power / snr_linear, split
    equally between real and imaginary parts. snr_linear = inf returns the
    input unchanged (bit-exact copy).
    """
    samples = np.asarray(samples, dtype=np.complex128)
    if math.isnan(snr_linear) or snr_linear <= 0:
        raise ValueError(f"snr_linear must be positive, got {snr_linear}")
    if reference_power <= 0:
        raise ValueError(f"reference_power must be positive, got {reference_power}")
    if math.isinf(snr_linear):
        return samples.copy()
    sigma = math.sqrt(reference_power / snr_linear / 2.0)
    noise = rng.standard_normal(samples.shape) * sigma
    noise = noise + 1j * (rng.standard_normal(samples.shape) * sigma)
    return samples + noise
