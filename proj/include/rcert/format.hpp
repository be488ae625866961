#pragma once

#include <string>

namespace rcert {

/// Shortest decimal text that parses back to exactly x.
std::string format_double(double x);

}  // namespace rcert
