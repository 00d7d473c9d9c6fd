"""Build script for the optional compiled kernel.

The package is fully functional without the extension: ``streamforest._core``
is written in Cython's pure-Python mode, so the same file runs under the
plain interpreter when no compiler (or no Cython) is available.  Building it
just makes the hot loops run at C speed.
"""

import os
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Swallow compiler failures so a pure-Python install still succeeds."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - depends on toolchain
            warnings.warn(f"compiled kernel skipped ({exc}); using pure-Python core")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - depends on toolchain
            warnings.warn(f"compiled kernel skipped ({exc}); using pure-Python core")


ext_modules = []
cmdclass = {}
if not os.environ.get("STREAMFOREST_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "streamforest._core",
                    ["src/streamforest/_core.py"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
        cmdclass["build_ext"] = optional_build_ext
    except ImportError:  # pragma: no cover - Cython is a build requirement
        pass

setup(ext_modules=ext_modules, cmdclass=cmdclass)
