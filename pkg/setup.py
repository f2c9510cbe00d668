"""Build script for the optional native kernel.

The package works without the compiled extension: backends fall back to the
pure-Python kernels automatically.  Set SENSILAB_NO_NATIVE=1 to skip the
extension build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Attempt the extension build but never fail the install over it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any build failure is non-fatal
            print(f"warning: skipping native kernel build ({exc}); "
                  "pure-Python backend will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "pure-Python backend will be used")


def extensions():
    if os.environ.get("SENSILAB_NO_NATIVE"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension("sensilab.backends._native",
                    ["src/sensilab/backends/_native.pyx"])
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
