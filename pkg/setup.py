import os

from setuptools import setup

ext_modules = []
if os.environ.get("RTPLAB_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/rtplab/_speedups.pyx"],
            language_level=3,
        )
    except ImportError:
        # Pure-Python fallback in rtplab/_kernels_py.py is used instead.
        ext_modules = []

setup(ext_modules=ext_modules)
