import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# No -ffast-math: the native kernels must be bit-identical to the numpy
# fallback, which rules out reassociation.
extensions = [
    Extension(
        "cadproj.kernels._native",
        ["src/cadproj/kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
