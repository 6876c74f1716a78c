import os

import numpy as np
from setuptools import Extension, setup

compile_args = ["-O3", "-fcx-limited-range"]
if not os.environ.get("ENSEMBLEMIX_PORTABLE"):
    compile_args.append("-march=native")

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python fallback is used at runtime
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "ensemblemix._ckernels",
                ["src/ensemblemix/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=compile_args,
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
