import os

from setuptools import setup

ext_modules = []
if os.environ.get("MAXFLOWPROT_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "maxflowprot._kernels.fastflow",
                    ["src/maxflowprot/_kernels/fastflow.pyx"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        # No Cython available: install pure-Python only, the kernel package
        # falls back at import time.
        ext_modules = []

setup(ext_modules=ext_modules)
