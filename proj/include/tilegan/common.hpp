#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tilegan {

// Error taxonomy used across the library. The CLI maps config_error to
// exit code 2 and divergence_error to exit code 3.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct shape_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct contract_error : std::logic_error {
    using std::logic_error::logic_error;
};

struct divergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw contract_error(msg);
}

inline bool is_finite(double v) { return std::isfinite(v); }

}  // namespace tilegan
