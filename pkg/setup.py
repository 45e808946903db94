"""Build script: compiles the optional Cython propagation kernel.

The package is fully functional without the extension (a pure-numpy
fallback is selected at import time), so any build failure here is
non-fatal by design: install with ATOMQKE_PURE=1 to skip compilation.
"""

import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("ATOMQKE_PURE"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "atomqke._evolution",
        sources=["src/atomqke/_evolution.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
