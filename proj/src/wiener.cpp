#include "fadeldp/wiener.hpp"

#include <cmath>

#include "fadeldp/rng.hpp"

namespace fadeldp {

void wiener_increment(double h, int m, uint64_t seed, uint64_t stream_id, int64_t shift_steps,
                      int64_t k, std::span<double> out) {
  const double sqh = std::sqrt(h);
  for (int c = 0; c < m; ++c)
    out[c] = sqh * counter_normal(seed, stream_id, RngPurpose::wiener, k + shift_steps,
                                  static_cast<uint32_t>(c));
}

static int64_t snap_to_grid(double t, double h, const char* what) {
  double pos = t / h;
  int64_t k = std::llround(pos);
  if (std::abs(pos - static_cast<double>(k)) > 1e-6)
    fail(ErrorKind::config, std::string("sample_wiener: ") + what + " must sit on the h grid");
  return k;
}

WienerPath sample_wiener(double t_min, double t_max, double h, int m, uint64_t seed,
                         uint64_t stream_id) {
  if (!(h > 0.0)) fail(ErrorKind::config, "sample_wiener: h must be > 0");
  if (!(t_min < 0.0 && 0.0 < t_max))
    fail(ErrorKind::config, "sample_wiener: need t_min < 0 < t_max (anchor W(0)=0 inside)");
  if (m < 1 || m > 64) fail(ErrorKind::config, "sample_wiener: bad noise dimension");
  WienerPath w;
  w.h = h;
  w.m = m;
  w.seed = seed;
  w.stream_id = stream_id;
  w.k_min = snap_to_grid(t_min, h, "t_min");
  w.k_max = snap_to_grid(t_max, h, "t_max");
  w.incs.resize(static_cast<size_t>(w.n_increments()) * m);
  for (int64_t k = w.k_min; k < w.k_max; ++k) {
    std::span<double> slot{w.incs.data() + static_cast<size_t>(k - w.k_min) * m,
                           static_cast<size_t>(m)};
    wiener_increment(h, m, seed, stream_id, w.shift_steps, k, slot);
  }
  return w;
}

WienerPath shift_wiener(const WienerPath& w, double s) {
  double pos = s / w.h;
  int64_t j = std::llround(pos);
  if (std::abs(pos - static_cast<double>(j)) > 1e-6)
    fail(ErrorKind::config, "shift_wiener: shift must be a grid multiple");
  WienerPath out = w;
  out.shift_steps = w.shift_steps + j;
  for (int64_t k = out.k_min; k < out.k_max; ++k) {
    std::span<double> slot{out.incs.data() + static_cast<size_t>(k - out.k_min) * out.m,
                           static_cast<size_t>(out.m)};
    wiener_increment(out.h, out.m, out.seed, out.stream_id, out.shift_steps, k, slot);
  }
  return out;
}

std::vector<double> WienerPath::values_on_grid() const {
  const int64_t n = k_max - k_min + 1;
  std::vector<double> vals(static_cast<size_t>(n) * m, 0.0);
  if (k_min > 0 || k_max < 0) fail(ErrorKind::invalid, "WienerPath: grid must contain 0");
  // forward from 0
  for (int64_t k = 0; k < k_max; ++k) {
    auto inc = increment(k);
    size_t cur = static_cast<size_t>(k - k_min) * m;
    size_t nxt = static_cast<size_t>(k + 1 - k_min) * m;
    for (int c = 0; c < m; ++c) vals[nxt + c] = vals[cur + c] + inc[c];
  }
  // backward from 0
  for (int64_t k = -1; k >= k_min; --k) {
    auto inc = increment(k);
    size_t cur = static_cast<size_t>(k + 1 - k_min) * m;
    size_t prev = static_cast<size_t>(k - k_min) * m;
    for (int c = 0; c < m; ++c) vals[prev + c] = vals[cur + c] - inc[c];
  }
  return vals;
}

}  // namespace fadeldp
