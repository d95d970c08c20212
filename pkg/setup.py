import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fall back to the pure-Python kernel
    cythonize = None

# no contraction or fast-math: the compiled kernel must reproduce the
# pure-Python rounding bit for bit
CFLAGS = ["-O3", "-ffp-contract=off", "-fno-fast-math"]

ext_modules = []
if cythonize is not None and not os.environ.get("CERTOPT_NO_EXTENSION"):
    ext_modules = cythonize(
        [Extension("certopt._kernel", ["src/certopt/_kernel.pyx"],
                   extra_compile_args=CFLAGS, libraries=["m"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
