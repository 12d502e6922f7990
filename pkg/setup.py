from Cython.Build import cythonize
from setuptools import Extension, setup

setup(ext_modules=cythonize(Extension("qkpz._speedups", ["src/qkpz/_speedups.pyx"]),
                            language_level=3))
