"""Build script adding the optional compiled kernel extension.

The package is fully functional without the extension; the pure-Python
kernels in tutorenv._kernels.qcore_py are selected at import when the
compiled module is absent. Build in place for development with:

    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "tutorenv._kernels._qcore",
                sources=["src/tutorenv/_kernels/_qcore.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
