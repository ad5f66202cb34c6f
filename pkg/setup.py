"""Build script: compiles the optional Cython tracking kernel.

The package works without the extension (a numpy fallback is selected at
import time), so any compilation failure downgrades to a pure-Python build
instead of aborting the install.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/cmtmimo/_kernel.pyx"],
        language_level=3,
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        ext.define_macros.append(("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"))
except Exception as exc:  # noqa: BLE001 - fall back to pure python on any build issue
    print(f"cmtmimo: skipping compiled kernel ({exc!r}); pure-numpy fallback will be used",
          file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
