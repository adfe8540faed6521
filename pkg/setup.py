"""Build script for the optional compiled kernels.

The package works without the extension; ``codebench.kernels`` falls back to
the pure-Python implementations when ``codebench._kernels`` is not importable.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("CODEBENCH_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("codebench._kernels", ["src/codebench/_kernels.pyx"],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
