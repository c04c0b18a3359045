"""Build script: compiles the optional event-loop extension.

The package is fully functional without the extension (a pure-Python
scheduler is selected at import time); the compiled kernel is a drop-in
replacement for the hot event loop. Set RINGLAT_PURE=1 to skip the build.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None and os.environ.get("RINGLAT_PURE") != "1":
    extensions = cythonize(
        [
            Extension(
                "ringlat._kernel",
                sources=["src/ringlat/_kernel.pyx"],
                # No -ffast-math: the kernel must match the pure-Python
                # scheduler bit for bit (IEEE semantics, libm exp/log).
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
