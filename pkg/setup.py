"""Build script for the optional compiled kernel core.

The package works without the extension: star_repair.kernels falls back to
the pure NumPy backend when the compiled module is absent (or when
STAR_KERNELS=pure is set). Set STAR_SKIP_NATIVE=1 to skip compilation.
"""

import os

from setuptools import Extension, setup


def native_extensions():
    if os.environ.get("STAR_SKIP_NATIVE") == "1":
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "star_repair.kernels._native",
        sources=["src/star_repair/kernels/_native.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off keeps the native backend bit-compatible with the
        # pure backend (no FMA contraction of the shared formulas).
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=native_extensions())
