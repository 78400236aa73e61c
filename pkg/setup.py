import os

import numpy as np
from setuptools import Extension, setup

# The extension is optional: the package falls back to numpy kernels when it
# cannot be built. TRFOCI_NO_EXT=1 skips it entirely.
ext_modules = []
if not os.environ.get("TRFOCI_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "trfoci._bloch_ext",
                    ["src/trfoci/_bloch_ext.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # no -ffast-math: results must match the numpy fallback
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
