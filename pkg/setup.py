from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    # No Cython/numpy at build time: install pure-Python only, the package
    # falls back to the numpy backend at import.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "orlicz_kit._kernels._core",
                ["src/orlicz_kit/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
