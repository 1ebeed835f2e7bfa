#include "klan/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "klan/error.hpp"

namespace klan {

namespace {
constexpr const char* kMagic = "klan-checkpoint";
constexpr int kVersion = 1;
}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void save_checkpoint(const ParameterSet& ps, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot open checkpoint for writing: " + file);
  out << kMagic << " v" << kVersion << "\n";
  out << "params " << ps.size() << "\n";
  for (const std::string& path : ps.paths()) {
    const Tensor& t = ps.value(path);
    out << "param " << path << " " << t.ndim();
    for (std::size_t d : t.shape()) out << " " << d;
    out << "\n";
    for (std::size_t i = 0; i < t.numel(); ++i) {
      out << format_double(t.data()[i]);
      out << ((i + 1) % 8 == 0 || i + 1 == t.numel() ? "\n" : " ");
    }
    if (t.numel() == 0) out << "\n";
  }
  if (!out) throw DataError("write failed for checkpoint: " + file);
}

ParameterSet load_checkpoint(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open checkpoint: " + file);
  std::string magic, version;
  in >> magic >> version;
  if (magic != kMagic || version != "v1")
    throw DataError("unrecognized checkpoint header in " + file);
  std::string tok;
  std::size_t count = 0;
  in >> tok >> count;
  if (tok != "params") throw DataError("malformed checkpoint: " + file);
  ParameterSet ps;
  for (std::size_t p = 0; p < count; ++p) {
    std::string path;
    std::size_t ndim = 0;
    in >> tok >> path >> ndim;
    if (tok != "param" || !in)
      throw DataError("malformed parameter record in " + file);
    std::vector<std::size_t> shape(ndim);
    std::size_t n = 1;
    for (std::size_t i = 0; i < ndim; ++i) {
      in >> shape[i];
      n *= shape[i];
    }
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(in >> vals[i]))
        throw DataError("truncated values for " + path + " in " + file);
    }
    ps.add(path, Tensor::from(std::move(shape), std::move(vals)));
  }
  return ps;
}

}  // namespace klan
