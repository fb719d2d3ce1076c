#pragma once

#include <span>
#include <string>

namespace gfold {

// Shortest decimal string that parses back to the same double.
std::string fmt(double x);
std::string fmt_row(std::span<const double> xs);

}  // namespace gfold
