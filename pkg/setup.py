import os

from setuptools import Extension, setup


def _extensions():
    # Missing Cython or numpy at build time leaves only the pure-Python kernels.
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "qigsim._ckernels",
        [os.path.join("src", "qigsim", "_ckernels.pyx")],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
