// Native half of the Python package. It only forwards to the C boundary and
// returns (code, json_text); the Python layer raises on non-zero codes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>

#include "trajlab/c_api.h"

namespace py = pybind11;

namespace {

using Result = std::pair<int, std::string>;

template <typename F>
Result call(F&& f) {
  char* out = nullptr;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = f(&out);
  }
  std::unique_ptr<char, void (*)(char*)> guard(out, trajlab_free);
  return {code, out ? out : ""};
}

const char* opt(const std::optional<std::string>& s) { return s ? s->c_str() : nullptr; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "trajlab native core";
  m.def(
      "label_file",
      [](const std::string& path, std::optional<std::string> thresholds) {
        return call([&](char** o) { return trajlab_label_file(path.c_str(), opt(thresholds), o); });
      },
      py::arg("path"), py::arg("thresholds") = py::none());
  m.def(
      "label_paths",
      [](const std::string& paths_json, std::optional<std::string> thresholds, unsigned workers) {
        return call([&](char** o) { return trajlab_label_paths(paths_json.c_str(), opt(thresholds), workers, o); });
      },
      py::arg("paths_json"), py::arg("thresholds") = py::none(), py::arg("workers") = 0);
  m.def("filter", [](const std::string& labels, const std::string& spec) {
    return call([&](char** o) { return trajlab_filter(labels.c_str(), spec.c_str(), o); });
  });
  m.def(
      "stats",
      [](const std::string& labels, const std::string& group_by, const std::string& grouping, int decimals) {
        return call([&](char** o) {
          return trajlab_stats(labels.c_str(), group_by.c_str(), grouping.c_str(), decimals, o);
        });
      },
      py::arg("labels"), py::arg("group_by") = "", py::arg("grouping") = "", py::arg("decimals") = 2);
  m.def("thresholds_default", [] { return call([](char** o) { return trajlab_thresholds_default(o); }); });
  m.def("error_kind_name", &trajlab_error_kind_name);
}
