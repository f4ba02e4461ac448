import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("ENTINV_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # fallback kernel is used at runtime
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "entinv._gf2",
                    ["src/entinv/_gf2.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
