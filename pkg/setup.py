import numpy
from setuptools import setup

# The compiled growth kernel is optional: if Cython (or a C compiler) is
# unavailable the package falls back to the pure-Python kernel at import time.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/barcodetrees/tns/_growth.pyx",
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        # keep C arithmetic bit-identical to the Python fallback: no fused
        # multiply-adds, and no sin/cos -> sincos fusion (glibc sincos can be
        # an ulp off the separate calls the fallback makes)
        ext.extra_compile_args = ["-O2", "-ffp-contract=off",
                                  "-fno-builtin-sin", "-fno-builtin-cos"]
except ImportError:
    ext_modules = []

setup(
    ext_modules=ext_modules,
    include_dirs=[numpy.get_include()],
)
