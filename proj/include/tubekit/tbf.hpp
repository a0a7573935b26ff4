#pragma once

#include <filesystem>

#include "tubekit/tensor.hpp"

namespace tubekit {

// Binary tensor file format "TBF1": magic bytes `TBF1`, u32 rank, u32 dims
// (little-endian), then raw little-endian f64 data, row-major.
void write_tbf(const std::filesystem::path& path, const Tensor& t);
Tensor read_tbf(const std::filesystem::path& path);

}  // namespace tubekit
