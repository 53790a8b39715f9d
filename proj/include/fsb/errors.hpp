#pragma once

#include <stdexcept>

namespace fsb {

// bad configuration / bad inputs (CLI exit code 2)
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// numerical failure mid-run: NaN/Inf states, failed factorizations (exit code 3)
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fsb
