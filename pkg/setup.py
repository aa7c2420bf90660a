import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SSRLSC_NO_EXTENSION"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools.extension import Extension
    except ImportError:
        pass
    else:
        # No -ffast-math / -march=native: results must not depend on the host CPU.
        ext_modules = cythonize(
            [
                Extension(
                    "ssrlsc._kernels",
                    ["src/ssrlsc/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
