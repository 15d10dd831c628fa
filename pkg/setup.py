"""Build hook for the optional compiled Godunov kernel.

`pip install .` works without Cython or a C toolchain; the solver then uses
the numpy twin in divchain.conslaw._kernels_py.  With Cython available,
build the extension in place via

    python setup.py build_ext --inplace
"""

import numpy
from setuptools import setup

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        ["src/divchain/conslaw/_godunov.pyx"],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        ext.extra_compile_args = ["-O3"]
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
