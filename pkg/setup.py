"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension; corpusforge.kernels
falls back to the pure-Python implementations when the compiled module is
missing (or when CORPUSFORGE_PURE_PYTHON=1).
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/corpusforge/_speedups.pyx",
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
