#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace evk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Bad argument values (wrong domain, malformed input). CLI maps these to
// exit code 2.
struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Structurally valid input for which no answer exists (empty feasible set,
// degenerate configuration). CLI maps these to exit code 3.
struct infeasible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw domain_error(msg);
}

}  // namespace evk
