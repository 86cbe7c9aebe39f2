"""Build script: compiles the optional kernel extension when Cython is available.

The package is fully functional without the extension; _kernels.py falls back to
the pure-Python twin at import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/bchkit/_kernels_cy.pyx"],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
