"""Build script: compiles the optional speedup extension when a toolchain exists.

The package works without the extension (a pure-Python twin of every kernel
is selected at import time), so any build failure here downgrades to a
source-only install instead of aborting.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("spcsim._speedups", ["src/spcsim/_speedups.pyx"])],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - toolchain-dependent
    print(f"spcsim: skipping compiled kernels ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
