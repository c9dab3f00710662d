from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "fuseflow._kernel._maxflow",
                ["src/fuseflow/_kernel/_maxflow.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython: install pure-Python only; the flow kernel falls back at import.
    extensions = []

setup(ext_modules=extensions)
