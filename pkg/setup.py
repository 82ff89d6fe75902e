import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ECKHAUS_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "eckhaus.kernels._kernels",
                    ["src/eckhaus/kernels/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except ImportError:
        # no cython: the numpy kernels are used
        ext_modules = []

setup(ext_modules=ext_modules)
