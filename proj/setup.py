import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    """Drives the CMake build for the extension target only."""

    def build_extension(self, ext):
        import pybind11

        source_dir = Path(__file__).resolve().parent
        build_temp = Path(self.build_temp).resolve()
        build_temp.mkdir(parents=True, exist_ok=True)
        config = "Debug" if self.debug else "Release"
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_temp),
                f"-DCMAKE_BUILD_TYPE={config}",
                "-DGFAMP_BUILD_TESTS=OFF",
                f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_temp), "--target", "_gfamp", "--parallel"],
            check=True,
        )
        built = sorted((build_temp / "pypkg" / "gfamp").glob("_gfamp*.so"))
        if not built:
            raise RuntimeError("CMake build produced no _gfamp extension")
        ext_path = Path(self.get_ext_fullpath(ext.name)).resolve()
        ext_path.parent.mkdir(parents=True, exist_ok=True)
        self.copy_file(str(built[0]), str(ext_path))


setup(
    packages=["gfamp"],
    package_dir={"gfamp": "python/gfamp"},
    ext_modules=[CMakeExtension("gfamp._gfamp")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
