import os

from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

EIGEN_INCLUDE = os.environ.get("EIGEN3_INCLUDE_DIR", "/usr/include/eigen3")

ext = Pybind11Extension(
    "covdiff._covdiff",
    sources=[
        "python/bindings.cpp",
        "src/moments.cpp",
        "src/two_sample.cpp",
        "src/sim.cpp",
        "src/cluster.cpp",
        "src/io.cpp",
    ],
    include_dirs=["include", "vendor", EIGEN_INCLUDE],
    cxx_std=20,
)

ParallelCompile("COVDIFF_NUM_BUILD_JOBS").install()

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
