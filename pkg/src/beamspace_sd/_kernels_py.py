"""Pure numpy implementation of the estimator inner loops.

Index convention in this module is 0-based throughout; the public wrappers
in :mod:`beamspace_sd.estimation` translate to 1-based reporting. The
compiled backend (``_kernels``) exposes the same three functions with the
same contracts.
"""

import numpy as np

from .numerics import SingularSystemError, ls_solve

BACKEND = "python"


def correlate(w, r):
    """Matched-filter scores |w_n^H r| for every column of w."""
    return np.abs(w.conj().T @ r)


def support_window(peak, width, n):
    """0-based circular index window of ``width`` entries around ``peak``.

    Even widths put ``width // 2`` entries at and below the peak, odd widths
    center exactly.
    """
    lo = peak - width // 2 if width % 2 == 0 else peak - (width - 1) // 2
    return (lo + np.arange(width, dtype=np.int64)) % n


def sd_core(w, z, n_components, support_size):
    """Support-detection estimate of a sparse beamspace vector.

    Strips one channel component per round: finds the strongest beam of the
    residual, solves a restricted LS on the circular window around it, and
    subtracts that component's contribution. The final coefficients come
    from one LS over the union support against the original measurement.

    Returns ``(x, union, peaks)``: the length-N estimate (zeros off
    support), the sorted union support, and the per-round peak indices.
    """
    n = w.shape[1]
    r = z.copy()
    peaks = np.empty(n_components, dtype=np.int64)
    windows = np.empty((n_components, support_size), dtype=np.int64)
    for i in range(n_components):
        peaks[i] = np.argmax(correlate(w, r))
        idx = support_window(int(peaks[i]), support_size, n)
        windows[i] = idx
        cols = w[:, idx]
        try:
            f = ls_solve(cols, r)
        except SingularSystemError as err:
            err.support = tuple(int(j) + 1 for j in idx)
            raise
        r = r - cols @ f
    union = np.unique(windows)
    try:
        f = ls_solve(w[:, union], z)
    except SingularSystemError as err:
        err.support = tuple(int(j) + 1 for j in union)
        raise
    x = np.zeros(n, dtype=np.complex128)
    x[union] = f
    return x, union, peaks


def omp_core(w, z, sparsity):
    """Orthogonal matching pursuit with a fixed iteration count.

    Each round adds the beam best matched to the current residual (already
    selected beams are skipped) and re-solves LS over everything selected so
    far against the original measurement.

    Returns ``(x, selected)`` with ``selected`` in selection order.
    """
    n = w.shape[1]
    r = z.copy()
    selected = np.empty(sparsity, dtype=np.int64)
    f = None
    for t in range(sparsity):
        scores = correlate(w, r)
        scores[selected[:t]] = -1.0
        selected[t] = np.argmax(scores)
        cols = w[:, selected[:t + 1]]
        try:
            f = ls_solve(cols, z)
        except SingularSystemError as err:
            err.support = tuple(int(j) + 1 for j in selected[:t + 1])
            raise
        r = z - cols @ f
    x = np.zeros(n, dtype=np.complex128)
    x[selected] = f
    return x, selected
