from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    extensions = [
        Extension(
            "riskbench._speedups",
            ["src/riskbench/_speedups.pyx"],
        )
    ]
    ext_modules = cythonize(
        extensions, compiler_directives={"language_level": 3}
    )

setup(ext_modules=ext_modules)
