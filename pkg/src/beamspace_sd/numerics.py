"""Minimal complex dense linear algebra used by every other module.

All vectors/matrices are numpy ``complex128`` arrays. The helpers here
define the error contract (dimension checks, singular-system guard) that
the rest of the package relies on.
"""

import numpy as np

# Restricted LS systems with an estimated condition number beyond this are
# rejected instead of silently returning garbage.
COND_LIMIT = 1e12


class DimensionError(ValueError):
    """Operands have incompatible or invalid shapes."""


class SingularSystemError(RuntimeError):
    """A least-squares system is (numerically) rank deficient.

    ``support`` carries the offending column index set (1-based) when the
    failure happened inside a restricted solve.
    """

    def __init__(self, message, support=None):
        super().__init__(message)
        self.support = None if support is None else tuple(int(i) for i in support)


def as_cvector(x, name="vector"):
    """Validate and convert to a 1-D complex128 array (len > 0, finite)."""
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"{name} must be 1-D and non-empty, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def as_cmatrix(x, name="matrix"):
    """Validate and convert to a 2-D complex128 array (finite entries)."""
    m = np.asarray(x, dtype=np.complex128)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"{name} must be 2-D and non-empty, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def hermitian_product(a, b):
    """Return sum(conj(a_n) * b_n)."""
    a = as_cvector(a, "a")
    b = as_cvector(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return complex(np.vdot(a, b))


def conj_transpose(a):
    a = as_cmatrix(a, "a")
    return a.conj().T.copy()


def matvec(a, x):
    a = as_cmatrix(a, "a")
    x = as_cvector(x, "x")
    if a.shape[1] != x.shape[0]:
        raise DimensionError(f"matvec shapes {a.shape} @ {x.shape} do not conform")
    return a @ x


def matmul(a, b):
    a = as_cmatrix(a, "a")
    b = as_cmatrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shapes {a.shape} @ {b.shape} do not conform")
    return a @ b


def ls_solve(a, z):
    """Solve min_f ||A f - z||_2 for a tall (or square) full-rank A.

    Uses an orthogonal-factorization solver (LAPACK gelsd via numpy), never
    explicit normal equations. Raises :class:`SingularSystemError` when the
    condition number (from the returned singular values) exceeds
    ``COND_LIMIT``.
    """
    a = as_cmatrix(a, "A")
    z = as_cvector(z, "z")
    q, s = a.shape
    if z.shape[0] != q:
        raise DimensionError(f"A is {q}x{s} but z has length {z.shape[0]}")
    if q < s:
        raise DimensionError(f"underdetermined system: {q} rows < {s} columns")
    f, _, _, sv = np.linalg.lstsq(a, z, rcond=None)
    cond = np.inf if sv[-1] == 0.0 else sv[0] / sv[-1]
    if sv[0] == 0.0 or cond > COND_LIMIT:
        raise SingularSystemError(
            f"rank-deficient LS system ({q}x{s}), condition estimate {cond:.3g}"
        )
    return f
