"""Pick the inner-loop implementation at import time.

The compiled extension is used when importable, with the pure numpy module
as fallback. ``BEAMSPACE_SD_BACKEND`` overrides: ``python`` forces the
fallback, ``cython`` makes a missing extension a hard error, ``auto`` (the
default) prefers compiled.
"""

import os
import warnings

_choice = os.environ.get("BEAMSPACE_SD_BACKEND", "auto").lower()

if _choice not in ("auto", "cython", "python"):
    raise ImportError(
        f"BEAMSPACE_SD_BACKEND must be 'auto', 'cython' or 'python', "
        f"got {_choice!r}")

if _choice == "python":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError as err:
        if _choice == "cython":
            raise ImportError(
                "BEAMSPACE_SD_BACKEND=cython but the compiled extension is "
                "not importable") from err
        warnings.warn(
            "compiled estimator kernels not available, using the pure "
            "numpy fallback", RuntimeWarning)
        from . import _kernels_py as kernels


def backend_name():
    """Name of the active inner-loop backend: 'cython' or 'python'."""
    return kernels.BACKEND
