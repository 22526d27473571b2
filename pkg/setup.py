"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-Python twin of every kernel
ships alongside it), so compilation failures downgrade to a warning instead
of breaking the install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "tempoframe.kernels._compiled",
                ["src/tempoframe/kernels/_compiled.pyx"],
                # -ffp-contract=off keeps the compiled kernels bit-identical
                # to the pure-Python ones (no FMA fusion).
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions)
