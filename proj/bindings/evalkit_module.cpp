#include <pybind11/pybind11.h>

PYBIND11_MODULE(_evalkit, m) { m.doc() = "e-value toolkit"; }
