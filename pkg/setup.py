"""Build script: compiles the optional split-search kernel.

The package works without the extension (a NumPy fallback is selected at
import time), so any build failure here is demoted to a warning.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the Cython kernel if possible, otherwise keep going."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or Cython missing
            warnings.warn(f"compiled kernel skipped: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"compiled kernel skipped: {exc}")


def extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "probesel.classifiers._split_fast",
        ["src/probesel/classifiers/_split_fast.pyx"],
        include_dirs=[np.get_include()],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
