#include <pybind11/pybind11.h>
PYBIND11_MODULE(_smattn, m) { m.doc() = "self-modulating attention core"; }
