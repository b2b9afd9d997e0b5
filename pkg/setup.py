"""Builds the optional compiled scoring kernel; the package works without it."""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("QPPCONF_NO_EXT"):
    try:
        import numpy  # noqa: F401
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("qppconf._ckernels", ["src/qppconf/_ckernels.pyx"],
                       extra_compile_args=["-O3", "-ffp-contract=off"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
