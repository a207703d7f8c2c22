"""Build the compiled orbit kernels; the package still installs without them."""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension(
            "qpflab._core",
            sources=["src/qpflab/_core.pyx"],
            include_dirs=[np.get_include()],
            # no -ffast-math: the kernels rely on IEEE infinities
            extra_compile_args=["-O3"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
