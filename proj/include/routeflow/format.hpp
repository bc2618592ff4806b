#pragma once

#include <string>

namespace routeflow {

/// Shortest decimal rendering that round-trips the double.
std::string format_shortest(double v);

/// 17-significant-digit rendering (exact round-trip, fixed width-ish).
std::string format_g17(double v);

}  // namespace routeflow
