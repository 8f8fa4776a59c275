"""Build script. The compiled kernel extension is optional: when Cython or a
C compiler is unavailable the package installs as pure Python and falls back
to the numpy reference kernels at import time."""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    # any compiler failure downgrades to the pure-Python install
    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"skipping compiled kernels ({exc}); pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"skipping {ext.name} ({exc}); pure-Python fallback will be used")


ext_modules = []
if not os.environ.get("MOMMIX_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/mommix/_kernels/_fast.pyx"],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
