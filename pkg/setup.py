"""Build script: compiles the pairwise-energy hot loop when Cython is available.

The package works without the extension (a NumPy fallback is selected at
import time), so a missing compiler or Cython never blocks installation.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "greenpoints._pairwise",
                ["src/greenpoints/_pairwise.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
