#pragma once

#include <charconv>
#include <string>

namespace unitlab {

// Shortest decimal form that round-trips to the same double; keeps TSV
// output readable without losing reproducibility.
inline std::string formatDouble(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace unitlab
