#include <pybind11/pybind11.h>

PYBIND11_MODULE(_klan, m) {
  m.doc() = "klan core bindings";
  m.attr("__version__") = KLAN_VERSION;
}
