#ifndef FADELDP_IO_HPP
#define FADELDP_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fadeldp/fading_memory.hpp"
#include "fadeldp/integrate.hpp"

namespace fadeldp {

uint64_t fnv1a64(const std::string& data);
std::string fnv1a64_hex(const std::string& data);

// Atomic write: temp file in the same directory, then rename.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// CSV: t, Y_0, ..., Y_{d-1}; full precision.
std::string path_to_csv(const PathOnGrid& path);
// CSV rows: head_time, lag, value_0..value_{d-1} (tail coefficient as lag=-inf row omitted).
std::string segment_to_csv(const Segment& seg);
// CSV: s, v_0, ..., v_{m-1}.
std::string control_to_csv(const Control& v);

// Compact binary path layout: magic "FDLP", u32 version, u64 n_states, u64 dim,
// f64 t0, f64 h, then states row-major (little-endian f64).
std::string path_to_binary(const PathOnGrid& path);
struct BinaryPath {
  double t0 = 0, h = 0;
  int dim = 1;
  std::vector<double> states;
};
BinaryPath binary_to_path(const std::string& blob);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace fadeldp

#endif
