import os
import subprocess
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        import pybind11

        extdir = os.path.abspath(os.path.dirname(self.get_ext_fullpath(ext.name)))
        build_dir = os.path.abspath(self.build_temp)
        os.makedirs(build_dir, exist_ok=True)
        source_dir = os.path.abspath(os.path.dirname(__file__))
        subprocess.run(
            [
                "cmake",
                "-S", source_dir,
                "-B", build_dir,
                f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={extdir}",
                "-DCMAKE_BUILD_TYPE=Release",
                "-DSPDSTATS_BUILD_TESTS=OFF",
                f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", build_dir, "--target", "_spdstats"],
            check=True,
        )


setup(
    packages=["spdstats"],
    package_dir={"spdstats": "python/spdstats"},
    ext_modules=[CMakeExtension("spdstats._spdstats")],
    cmdclass={"build_ext": CMakeBuild},
)
