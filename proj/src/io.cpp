#include "fadeldp/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>

namespace fadeldp {

uint64_t fnv1a64(const std::string& data) {
  uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string fnv1a64_hex(const std::string& data) {
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::config, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string path_to_csv(const PathOnGrid& path) {
  std::string out = "t";
  for (int j = 0; j < path.dim; ++j) out += ",y" + std::to_string(j);
  out += "\n";
  for (int k = 0; k <= path.steps(); ++k) {
    out += format_double(path.t0 + k * path.h);
    auto s = path.state_at(k);
    for (int j = 0; j < path.dim; ++j) {
      out += ",";
      out += format_double(s[j]);
    }
    out += "\n";
  }
  return out;
}

std::string segment_to_csv(const Segment& seg) {
  std::string out = "head_time,lag";
  for (int j = 0; j < seg.dim; ++j) out += ",value" + std::to_string(j);
  out += "\n";
  const int K = seg.params.lag_count();
  for (int k = 0; k < K; ++k) {
    out += format_double(seg.head_time);
    out += ",";
    out += format_double(-k * seg.params.h);
    auto v = seg.at_lag_index(k);
    for (int j = 0; j < seg.dim; ++j) {
      out += ",";
      out += format_double(v[j]);
    }
    out += "\n";
  }
  return out;
}

std::string control_to_csv(const Control& v) {
  std::string out = "s";
  for (int j = 0; j < v.m; ++j) out += ",v" + std::to_string(j);
  out += "\n";
  for (int i = 0; i < v.n_intervals(); ++i) {
    out += format_double(v.a + i * v.hv);
    for (int j = 0; j < v.m; ++j) {
      out += ",";
      out += format_double(v.values[static_cast<size_t>(i) * v.m + j]);
    }
    out += "\n";
  }
  return out;
}

namespace {
template <class T>
void append_raw(std::string& s, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  s.append(buf, sizeof(T));
}
template <class T>
T read_raw(const std::string& s, size_t& off) {
  T v;
  std::memcpy(&v, s.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}
}  // namespace

std::string path_to_binary(const PathOnGrid& path) {
  std::string out = "FDLP";
  append_raw<uint32_t>(out, 1u);
  append_raw<uint64_t>(out, static_cast<uint64_t>(path.steps() + 1));
  append_raw<uint64_t>(out, static_cast<uint64_t>(path.dim));
  append_raw<double>(out, path.t0);
  append_raw<double>(out, path.h);
  for (double v : path.states) append_raw<double>(out, v);
  return out;
}

BinaryPath binary_to_path(const std::string& blob) {
  if (blob.size() < 36 || blob.compare(0, 4, "FDLP") != 0)
    fail(ErrorKind::config, "binary path: bad magic");
  size_t off = 4;
  uint32_t version = read_raw<uint32_t>(blob, off);
  if (version != 1) fail(ErrorKind::config, "binary path: unknown version");
  uint64_t n = read_raw<uint64_t>(blob, off);
  uint64_t dim = read_raw<uint64_t>(blob, off);
  BinaryPath p;
  p.t0 = read_raw<double>(blob, off);
  p.h = read_raw<double>(blob, off);
  p.dim = static_cast<int>(dim);
  p.states.resize(n * dim);
  for (auto& v : p.states) v = read_raw<double>(blob, off);
  return p;
}

}  // namespace fadeldp
