"""Build script: compiles the optional stepping-kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed or skipped compilation only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "schrkit.rdsolver._kernels",
                ["src/schrkit/rdsolver/_kernels.pyx"],
                # -ffp-contract=off keeps the compiled kernels bit-compatible
                # with the NumPy fallback (no FMA contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
