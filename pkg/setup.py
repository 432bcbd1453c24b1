"""Build script for the optional compiled averaging kernel.

The package is pure Python except for qigkit._phase_kernel, a small Cython
extension accelerating Monte-Carlo phase averaging.  The extension is marked
optional: if it cannot be built, installation still succeeds and the package
falls back to the numpy implementation at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qigkit._phase_kernel",
                sources=["src/qigkit/_phase_kernel.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
