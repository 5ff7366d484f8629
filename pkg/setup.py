"""Build script: compiles the optional face-scan kernel.

Set BELLCONE_NO_EXT=1 to skip the extension; the package then runs on the
pure-Python fallback selected at import time.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("BELLCONE_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/bellcone/_facecore.pyx"],
        language_level=3,
        compiler_directives={"boundscheck": False, "wraparound": False},
    )

setup(ext_modules=ext_modules)
