"""Build script: compiles the optional Cython core.

The package works without the extension (a NumPy fallback is selected at
import time); the extension only accelerates the sequential hot loops.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "rhl._core._ckernels",
                ["src/rhl/_core/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
