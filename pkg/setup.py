import warnings

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    warnings.warn("Cython not found; building without the compiled kernels "
                  "(pure-Python fallback will be used).")
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [Extension("beamspace_sd._kernels", ["src/beamspace_sd/_kernels.pyx"])],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
            "embedsignature": True,
        },
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
