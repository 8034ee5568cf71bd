"""Build script: compiles the native kernels when the toolchain allows.

The package is fully functional without the extension (a pure-Python
backend is selected at import time), so any failure here downgrades the
build instead of breaking it.

Contraction must stay disabled: the backends promise bit-identical
floats, and a fused multiply-add on only one side would break that.
"""

import os
import sys

from setuptools import Extension, setup

PYX = os.path.join("src", "stackgen", "_kernels", "_native.pyx")

ext_modules = []
if os.path.exists(PYX):
    try:
        from Cython.Build import cythonize

        ext = Extension(
            "stackgen._kernels._native",
            sources=[PYX],
            extra_compile_args=["-O3", "-ffp-contract=off"],
        )
        ext_modules = cythonize([ext], language_level=3)
    except ImportError as exc:
        print(f"stackgen: skipping native kernels ({exc})", file=sys.stderr)
else:
    print("stackgen: no native kernel source, pure backend only", file=sys.stderr)

setup(ext_modules=ext_modules)
