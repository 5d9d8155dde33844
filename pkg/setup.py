"""Build glue for the optional compiled polynomial kernel.

The package is pure Python plus one optional Cython extension holding the
hot polynomial loops.  If Cython or a C compiler is unavailable the build
falls back to the pure-Python kernel; nothing else changes.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/expro/_kernel/_poly_cy.pyx"],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
        },
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
