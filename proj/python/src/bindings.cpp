#include <pybind11/pybind11.h>
PYBIND11_MODULE(_hamlag, m) { m.doc() = "hamlag core bindings"; }
