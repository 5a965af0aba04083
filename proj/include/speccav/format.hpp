#pragma once

#include <string>

namespace speccav {

/// Shortest decimal form that round-trips to the same double.
std::string format_shortest(double x);

/// Fixed 17-significant-digit form used in CSV artifacts.
std::string format_g17(double x);

}  // namespace speccav
