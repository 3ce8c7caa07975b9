"""Sparse beamspace channel estimators working on combined measurements.

Two estimators share the measurement model z = W h + n: the
support-detection estimator exploits the single-peak power concentration of
each channel component, orthogonal matching pursuit serves as the generic
sparse-recovery baseline. Public indices (supports, peaks) are 1-based;
the hot loops live in the backend kernels and are 0-based.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels_py
from ._backend import kernels
from .numerics import DimensionError, as_cvector


@dataclass(eq=False)
class EstimationResult:
    """Estimate of one user's beamspace channel.

    ``support`` is the sorted 1-based index set the estimator solved on;
    ``peaks`` holds the per-component detection peaks (support-detection
    only, in detection order).
    """

    beamspace_estimate: np.ndarray = field(repr=False)
    support: tuple = ()
    peaks: tuple | None = None
    estimator: str = ""


def _measurement_vector(z):
    return as_cvector(getattr(z, "z", z), "z")


def _check_combiner_ref(z, combiner):
    ref = getattr(z, "combiner_ref", "")
    if ref and combiner.ident and ref != combiner.ident:
        raise ValueError(
            f"measurement was combined with {ref}, not {combiner.ident}")


def detect_peak(combiner, z):
    """1-based index of the beam best matched to z (ties: smallest index)."""
    _check_combiner_ref(z, combiner)
    z = _measurement_vector(z)
    if z.shape[0] != combiner.n_measurements:
        raise DimensionError(
            f"measurement has length {z.shape[0]}, combiner has "
            f"{combiner.n_measurements} rows")
    return int(np.argmax(_kernels_py.correlate(combiner.matrix, z))) + 1


def support_from_peak(peak, support_size, n_beams):
    """Circular 1-based window of support_size beams around a 1-based peak.

    Even sizes take support_size/2 beams at and below the peak and
    support_size/2 - 1 above; odd sizes center exactly. Indices wrap
    modulo n_beams into 1..n_beams.
    """
    n = int(n_beams)
    v = int(support_size)
    p = int(peak)
    if not 1 <= p <= n:
        raise ValueError(f"peak {p} outside 1..{n}")
    if not 1 <= v <= n:
        raise ValueError(f"support_size {v} outside 1..{n}")
    idx = _kernels_py.support_window(p - 1, v, n)
    return tuple(int(i) + 1 for i in idx)


def sd_estimate(z, combiner, n_components, support_size):
    """Support-detection estimate from one user's stacked measurements.

    ``n_components`` is the number of channel components assumed present
    (line of sight plus scatterers), ``support_size`` the per-component
    window width V. Requires n_components * support_size <= Q so every
    restricted solve stays overdetermined. Raises
    :class:`~beamspace_sd.numerics.SingularSystemError` (with the offending
    1-based support attached) when a restricted system is degenerate.
    """
    _check_combiner_ref(z, combiner)
    z = _measurement_vector(z)
    q, n = combiner.matrix.shape
    lp1 = int(n_components)
    v = int(support_size)
    if lp1 < 1:
        raise ValueError(f"n_components must be >= 1, got {lp1}")
    if not 1 <= v <= n:
        raise ValueError(f"support_size {v} outside 1..{n}")
    if z.shape[0] != q:
        raise DimensionError(
            f"measurement has length {z.shape[0]}, combiner has {q} rows")
    if lp1 * v > q:
        raise DimensionError(
            f"n_components * support_size = {lp1 * v} exceeds Q = {q}")
    x, union, peaks = kernels.sd_core(
        np.ascontiguousarray(combiner.matrix), np.ascontiguousarray(z), lp1, v)
    return EstimationResult(
        beamspace_estimate=x,
        support=tuple(int(i) + 1 for i in union),
        peaks=tuple(int(p) + 1 for p in peaks),
        estimator="sd")


def omp_estimate(z, combiner, sparsity):
    """Orthogonal matching pursuit baseline with a fixed support size."""
    _check_combiner_ref(z, combiner)
    z = _measurement_vector(z)
    q, n = combiner.matrix.shape
    s = int(sparsity)
    if not 1 <= s <= min(q, n):
        raise ValueError(f"sparsity {s} outside 1..{min(q, n)}")
    if z.shape[0] != q:
        raise DimensionError(
            f"measurement has length {z.shape[0]}, combiner has {q} rows")
    x, selected = kernels.omp_core(
        np.ascontiguousarray(combiner.matrix), np.ascontiguousarray(z), s)
    return EstimationResult(
        beamspace_estimate=x,
        support=tuple(sorted(int(i) + 1 for i in selected)),
        peaks=None,
        estimator="omp")


def nmse(estimate, truth):
    """||estimate - truth||^2 / ||truth||^2 for complex vectors."""
    e = as_cvector(getattr(estimate, "beamspace_estimate", estimate), "estimate")
    t = as_cvector(getattr(truth, "vector", truth), "truth")
    if e.shape != t.shape:
        raise DimensionError(
            f"estimate has length {e.shape[0]}, truth has length {t.shape[0]}")
    power = np.vdot(t, t).real
    if power == 0.0:
        raise ValueError("truth vector has zero power")
    d = e - t
    return float(np.vdot(d, d).real / power)
