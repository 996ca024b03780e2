"""Build the optional compiled kernels.

The package works without them: ``dickman.kernels`` falls back to numpy
implementations when the extension cannot be imported.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("DICKMAN_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "dickman._kernels",
                    ["src/dickman/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
