"""Builds the optional compiled kernel extension.

The package is fully functional without it (NumPy fallbacks are selected
at import time), so the extension is marked optional: a failed compile
degrades to the pure-Python build instead of aborting the install.
"""

from setuptools import Extension, setup

extensions = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "ballotbeat._native",
        ["src/ballotbeat/_native.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-ffast-math", "-funroll-loops"],
        optional=True,
    )
    extensions = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=extensions)
