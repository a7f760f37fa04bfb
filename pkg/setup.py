"""Build script for the optional compiled RK4 kernel.

The package works without the extension (a pure-numpy fallback is selected
at import time), so a missing compiler or Cython only costs speed.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "dmsq._kernels._rk4",
        ["src/dmsq/_kernels/_rk4.pyx"],
        include_dirs=[numpy.get_include()],
    )
    ext.optional = True
    ext_modules = cythonize([ext], language_level="3str")
except ImportError:
    pass

setup(ext_modules=ext_modules)
