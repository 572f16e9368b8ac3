"""Build the optional Cython kernels.

The package runs without them; ``qdphonons._kernels`` falls back to the
numpy implementation when ``qdphonons._ckernels`` cannot be imported.
"""
import os
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Do not fail the install when no C compiler is available."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"Cython kernels not built, using numpy fallback: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"failed to build {ext.name}: {exc}")


ext_modules = []
if not os.environ.get("QDPHONONS_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython not installed, using numpy fallback")
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "qdphonons._ckernels",
                    ["src/qdphonons/_ckernels.pyx"],
                    # no -ffast-math or FMA contraction: both break the compensated sums
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
