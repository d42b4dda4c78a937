"""Build script for the optional compiled kernels.

The package works without the extension: eventfit.kernels falls back to the
pure-Python implementations when the compiled module is missing.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    import numpy as np

    extensions = cythonize(
        [
            Extension(
                "eventfit.kernels._native",
                ["src/eventfit/kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
