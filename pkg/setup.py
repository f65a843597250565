import warnings

from setuptools import Extension, setup


def extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ModuleNotFoundError:
        warnings.warn("numpy and cython are required to build rissim._ckernels; "
                      "the numpy fallback will be used")
        return []
    ext = Extension("rissim._ckernels", ["src/rissim/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"])
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
