import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # No Cython: install the pure-Python package; pae.kernels falls back
    # to the NumPy implementation at import time.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "pae.kernels._ckernels",
                ["src/pae/kernels/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
