#pragma once

#include <string>

#include "klan/params.hpp"

namespace klan {

// Versioned text checkpoint. One `param <path> <ndim> <dims...>` line per
// tensor followed by its values, printed with enough digits that float64
// round-trips bit-exactly.
void save_checkpoint(const ParameterSet& ps, const std::string& file);
ParameterSet load_checkpoint(const std::string& file);

// %.17g rendering shared by every writer that must round-trip doubles.
std::string format_double(double v);

}  // namespace klan
