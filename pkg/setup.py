from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension("cyclehit._octcore", ["src/cyclehit/_octcore.pyx"]),
]

setup(ext_modules=cythonize(extensions, language_level="3"))
