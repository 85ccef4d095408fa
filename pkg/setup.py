"""Build script: compiles the optional Cython split-search kernel.

The package is fully functional without the compiled extension (a NumPy
fallback is selected at import time), so any failure here downgrades to a
pure-Python install instead of aborting.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "newsfilter._kernels._gini_cy",
                ["src/newsfilter/_kernels/_gini_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
