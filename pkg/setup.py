"""Build script: compiles the optional Cython simulation kernel.

Set AJSCC_PURE_PYTHON=1 to skip the extension entirely; the package then
falls back to the vectorized NumPy kernel at import time.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("AJSCC_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "ajscc._kernels._serpentine",
                    ["src/ajscc/_kernels/_serpentine.pyx"],
                    # -ffp-contract=off: forbid FMA contraction so the compiled
                    # kernel is bit-identical to the NumPy reference path.
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
