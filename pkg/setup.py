"""Build script.  The compiled stepper kernels are optional: if Cython or a C
compiler is unavailable the package installs anyway and falls back to the
numpy implementation of the same kernels at import time."""

import os
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext = Extension(
        "kdvdelta._stepper._kernels",
        sources=["src/kdvdelta/_stepper/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        # -ffp-contract=off keeps the compiled kernels bit-identical to the
        # numpy fallback (no FMA contraction), so outputs do not depend on
        # which backend happened to build.
        extra_compile_args=["-O2", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level=3)
except Exception as exc:  # pragma: no cover - build environment dependent
    sys.stderr.write(f"kdvdelta: building without compiled kernels ({exc})\n")
    ext_modules = []

setup(ext_modules=ext_modules)
