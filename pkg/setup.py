import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "liebdarboux._ckernels",
        ["src/liebdarboux/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        # error-free transformations in the double-double code need strict IEEE
        extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
