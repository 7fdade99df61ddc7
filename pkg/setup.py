"""Build script for the optional compiled kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time); the extension only accelerates the direct spectral
summation used for space-varying field synthesis.
"""

import os
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, otherwise continue without it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping compiled kernel build ({exc})", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc})", file=sys.stderr)


def make_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"warning: compiled kernel disabled ({exc})", file=sys.stderr)
        return []

    from setuptools import Extension

    compile_args = ["-O3"]
    link_args = []
    if os.environ.get("ORIFIELD_NO_OPENMP") != "1" and sys.platform.startswith("linux"):
        compile_args.append("-fopenmp")
        link_args.append("-fopenmp")

    ext = Extension(
        "orifield._kernels._varying_cy",
        ["src/orifield/_kernels/_varying_cy.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=compile_args,
        extra_link_args=link_args,
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
