from setuptools import Extension, setup

# The compiled kernels are optional: the package falls back to the numpy
# implementation when the extension is missing or fails to build.
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "lowqubit.qsim._kernels",
                ["src/lowqubit/qsim/_kernels.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
