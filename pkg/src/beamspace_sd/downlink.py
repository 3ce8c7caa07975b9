"""Downlink beam selection and zero-forcing on the reduced channel.

The base station keeps one beam per user (a 0/1 selection matrix B applied
to the N x K beamspace channel matrix), then zero-forces the K x K reduced
channel. Selection quality is what couples the downlink to the channel
estimates: beams are picked from whatever channel matrix the caller
supplies, estimated or true.
"""

import math
from dataclasses import dataclass

import numpy as np

from .numerics import (COND_LIMIT, DimensionError, SingularSystemError,
                       as_cmatrix, conj_transpose)


@dataclass(frozen=True)
class BeamSelection:
    """One beam per user, 1-based, in user order. Beams are distinct."""

    beams: tuple

    def __post_init__(self):
        beams = tuple(int(b) for b in self.beams)
        if len(set(beams)) != len(beams):
            raise ValueError(f"duplicate beams in selection {beams}")
        if beams and min(beams) < 1:
            raise ValueError(f"beam indices are 1-based, got {min(beams)}")
        object.__setattr__(self, "beams", beams)

    @property
    def n_users(self):
        return len(self.beams)

    def matrix(self, n_beams):
        """The N x K selection matrix B with B[beam_k - 1, k] = 1."""
        if max(self.beams) > n_beams:
            raise DimensionError(
                f"selection uses beam {max(self.beams)} but only "
                f"{n_beams} exist")
        b = np.zeros((n_beams, len(self.beams)), dtype=np.complex128)
        for k, beam in enumerate(self.beams):
            b[beam - 1, k] = 1.0
        return b

    def reduce(self, h_matrix):
        """B^T H: the K x K channel seen through the selected beams."""
        h = as_cmatrix(h_matrix, "H")
        if max(self.beams) > h.shape[0]:
            raise DimensionError(
                f"selection uses beam {max(self.beams)} but H has "
                f"{h.shape[0]} rows")
        rows = np.array([b - 1 for b in self.beams], dtype=np.intp)
        return h[rows, :]


def select_beams(h_matrix):
    """Greedily assign each user its strongest free beam.

    Users are served in order of their strongest beam magnitude
    (descending); each takes the largest-magnitude beam no earlier user
    claimed. All orderings break ties toward the smaller index, so the
    outcome is deterministic in the input matrix.
    """
    h = as_cmatrix(h_matrix, "H")
    n, k = h.shape
    if k > n:
        raise DimensionError(f"{k} users but only {n} beams")
    mags = np.abs(h)
    order = np.argsort(-mags.max(axis=0), kind="stable")
    taken = np.zeros(n, dtype=bool)
    beams = [0] * k
    for user in order:
        for beam in np.argsort(-mags[:, user], kind="stable"):
            if not taken[beam]:
                taken[beam] = True
                beams[user] = int(beam) + 1
                break
    return BeamSelection(beams=tuple(beams))


def zf_precoder(h_reduced, power):
    """Zero-forcing precoder P = c H (H^H H)^{-1} with total power ``power``.

    The scale c = sqrt(power / tr((H^H H)^{-1})) makes tr(P^H P) = power
    exactly, and H^H P = c I by construction. Raises
    :class:`~beamspace_sd.numerics.SingularSystemError` when H is too ill
    conditioned to invert meaningfully.
    """
    h = as_cmatrix(h_reduced, "H")
    if power <= 0:
        raise ValueError(f"power must be positive, got {power}")
    if h.shape[0] < h.shape[1]:
        raise DimensionError(
            f"need at least as many beams as users, got {h.shape[0]}x{h.shape[1]}")
    sv = np.linalg.svd(h, compute_uv=False)
    cond = np.inf if sv[-1] == 0.0 else sv[0] / sv[-1]
    if sv[0] == 0.0 or cond > COND_LIMIT:
        raise SingularSystemError(
            f"reduced channel condition estimate {cond:.3g} too large to "
            f"zero-force")
    gram_inv = np.linalg.inv(conj_transpose(h) @ h)
    scale = math.sqrt(power / np.trace(gram_inv).real)
    return scale * (h @ gram_inv)


def sum_rate(h_reduced_true, precoder, noise_power):
    """Achievable downlink sum rate in bits/s/Hz.

    ``h_reduced_true`` is the true channel through the same beams the
    precoder was built for; entry (k, j) of E = H^H P is the gain of
    stream j at user k, so user k sees SINR |E_kk|^2 over interference
    plus ``noise_power``.
    """
    h = as_cmatrix(h_reduced_true, "H")
    p = as_cmatrix(precoder, "P")
    if noise_power <= 0:
        raise ValueError(f"noise_power must be positive, got {noise_power}")
    if h.shape != p.shape:
        raise DimensionError(
            f"channel is {h.shape[0]}x{h.shape[1]} but precoder is "
            f"{p.shape[0]}x{p.shape[1]}")
    e = np.abs(conj_transpose(h) @ p) ** 2
    desired = np.diag(e)
    interference = e.sum(axis=1) - desired
    sinr = desired / (interference + noise_power)
    return float(np.log2(1.0 + sinr).sum())


def full_digital_zf_sum_rate(h_matrix, power, noise_power):
    """Sum rate of zero-forcing on the full channel (no beam selection)."""
    h = as_cmatrix(h_matrix, "H")
    p = zf_precoder(h, power)
    return sum_rate(h, p, noise_power)
