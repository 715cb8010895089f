import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DEALER_SIM_PURE") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "dealer_sim._ckernel",
                    ["src/dealer_sim/_ckernel.pyx"],
                    # no contraction or fast-math: the compiled loop must round
                    # exactly like the Python fallback
                    extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
