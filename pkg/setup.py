"""Builds the optional compiled trial kernel.

Installation succeeds without it; ``fae`` then falls back to pure Python.
"""
import os

import numpy as np
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # no compiler, no Cython, ...
            print(f"warning: compiled kernel not built ({exc}); using pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); using pure Python")


def extensions():
    if os.environ.get("FAE_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    random_lib = os.path.join(os.path.dirname(np.__file__), "random", "lib")
    ext = Extension(
        "fae._kernel",
        ["src/fae/_kernel.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[random_lib],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # no contraction or fast-math: results must match the Python kernel bit for bit
        extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
