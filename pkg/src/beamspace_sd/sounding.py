"""Uplink sounding: Bernoulli phase-shifter combining of pilot blocks.

Pilot transmission spans M blocks of K instants (Q = M*K measurements per
user). Within each block the base station combines the received antenna
signals with a K x N slice of the +-1/sqrt(Q) combiner; stacking the blocks
gives z = W h_beamspace + n with n the combined (non-white) noise. Pilot
matrices are unitary, so simulating identity pilots is statistically exact
and the per-block effective noise covariance is sigma_ul^2 * W_m W_m^H.
"""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import DimensionError, as_cvector


@dataclass(eq=False)
class Combiner:
    """Q x N analog combining matrix, entries +-1/sqrt(Q), in M row blocks."""

    matrix: np.ndarray = field(repr=False)
    n_blocks: int = 1
    ident: str = ""

    @property
    def n_measurements(self):
        return self.matrix.shape[0]

    @property
    def n_antennas(self):
        return self.matrix.shape[1]

    @property
    def block_size(self):
        return self.matrix.shape[0] // self.n_blocks

    def blocks(self):
        """Iterate the K x N per-block slices W_1 .. W_M."""
        k = self.block_size
        for m in range(self.n_blocks):
            yield self.matrix[m * k:(m + 1) * k]


@dataclass
class SoundingConfig:
    """Dimensions and noise level of one sounding round."""

    n_antennas: int
    block_size: int
    n_blocks: int
    uplink_noise_power: float
    seed: int = 0

    def __post_init__(self):
        if self.uplink_noise_power <= 0:
            raise ValueError("uplink_noise_power must be positive")

    @property
    def n_measurements(self):
        return self.block_size * self.n_blocks


@dataclass(eq=False)
class Measurement:
    """Stacked Q-vector of combined pilot measurements for one user."""

    z: np.ndarray = field(repr=False)
    combiner_ref: str = ""


def make_combiner(rng, n_antennas, n_measurements, block_size=None):
    """Draw a Bernoulli combiner: i.i.d. equiprobable +-1/sqrt(Q) entries.

    ``block_size`` fixes the per-block row count K (Q must be a multiple);
    when omitted the whole matrix is treated as a single block.
    """
    n = int(n_antennas)
    q = int(n_measurements)
    if n < 1 or q < 1:
        raise DimensionError(f"need N >= 1 and Q >= 1, got N={n}, Q={q}")
    if block_size is None:
        block_size = q
    if q % block_size != 0:
        raise DimensionError(f"Q={q} is not a multiple of block_size={block_size}")
    signs = rng.integers(0, 2, size=(q, n)) * 2 - 1
    matrix = (signs / math.sqrt(q)).astype(np.complex128)
    ident = hashlib.blake2s(signs.astype(np.int8).tobytes()).hexdigest()[:12]
    return Combiner(matrix=matrix, n_blocks=q // block_size, ident=ident)


def mutual_coherence(combiner):
    """max_{i != j} |w_i^H w_j| over combiner columns (unit column norms)."""
    gram = np.abs(combiner.matrix.conj().T @ combiner.matrix)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


def simulate_measurement(h_beamspace, combiner, noise_power, rng=None):
    """Form z = W h + n for one user.

    The noise is realized through the combiner, block by block: each block
    contributes W_m @ g_m with g_m i.i.d. CN(0, noise_power) antenna noise,
    which reproduces the per-block covariance noise_power * W_m W_m^H. With
    noise_power 0 the measurement is exact and the rng is not consumed.
    """
    h = as_cvector(getattr(h_beamspace, "vector", h_beamspace), "h_beamspace")
    w = combiner.matrix
    if w.shape[1] != h.shape[0]:
        raise DimensionError(
            f"combiner is {w.shape[0]}x{w.shape[1]} but channel has length "
            f"{h.shape[0]}")
    z = w @ h
    if noise_power < 0:
        raise ValueError("noise_power must be >= 0")
    if noise_power > 0:
        if rng is None:
            raise ValueError("rng required when noise_power > 0")
        n, m = w.shape[1], combiner.n_blocks
        scale = math.sqrt(noise_power / 2.0)
        g = scale * (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
        k = combiner.block_size
        for i, block in enumerate(combiner.blocks()):
            z[i * k:(i + 1) * k] += block @ g[i]
    return Measurement(z=z, combiner_ref=combiner.ident)


def effective_noise_power(noise_power, n_antennas, n_measurements):
    """Per-entry power of the combined noise: noise_power * N / Q (Bernoulli
    rows have norm^2 = N/Q exactly)."""
    return noise_power * n_antennas / n_measurements


def snr_to_noise_power(snr_db):
    """Uplink noise power for a given per-antenna pilot SNR in dB.

    Convention: unit-power pilot symbols and the model's channel
    normalization, so SNR = 1/sigma_ul^2.
    """
    return 10.0 ** (-snr_db / 10.0)
