"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-Python fallback is selected
at import time); set TIDALBELT_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TIDALBELT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "tidalbelt._kernels._ckernels",
                    ["src/tidalbelt/_kernels/_ckernels.pyx"],
                )
            ],
            language_level="3",
            compiler_directives={
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
