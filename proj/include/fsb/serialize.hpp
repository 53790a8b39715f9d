#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace fsb {

// base64 of the raw little-endian f64 bytes; used for bit-exact checkpoints
std::string base64_encode(const double* data, size_t count);
std::vector<double> base64_decode_f64(const std::string& text);

// shortest text form that round-trips a double (17 significant digits)
std::string format_double(double v);

}  // namespace fsb
