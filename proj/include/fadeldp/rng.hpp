#ifndef FADELDP_RNG_HPP
#define FADELDP_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace fadeldp {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A draw is a
// pure function of (counter, key), so replicas and time-grid positions can be
// addressed directly: no generator state is carried between calls and any
// subset of the stream can be regenerated bit-exactly.
namespace philox {

constexpr uint32_t kM0 = 0xD2511F53u;
constexpr uint32_t kM1 = 0xCD9E8D57u;
constexpr uint32_t kW0 = 0x9E3779B9u;
constexpr uint32_t kW1 = 0xBB67AE85u;

using Ctr = std::array<uint32_t, 4>;
using Key = std::array<uint32_t, 2>;

inline void round_once(Ctr& c, const Key& k) {
  uint64_t p0 = static_cast<uint64_t>(kM0) * c[0];
  uint64_t p1 = static_cast<uint64_t>(kM1) * c[2];
  uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
  uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
  Ctr out{hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  c = out;
}

inline Ctr philox4x32_10(Ctr c, Key k) {
  for (int r = 0; r < 10; ++r) {
    round_once(c, k);
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

}  // namespace philox

// Draw addresses. `purpose` separates independent uses of the same master
// seed (noise increments, sampling in reports, optimizer starts, tests).
enum class RngPurpose : uint32_t {
  wiener = 1,
  report_sampling = 2,
  optimizer = 3,
  test_paths = 4,
  generic = 5,
};

// One uniform 64-bit word addressed by (seed, stream, purpose, index, component).
// The packing is injective for stream_id < 2^48, component < 256, purpose < 256,
// so distinct addresses never collide.
inline uint64_t counter_u64(uint64_t seed, uint64_t stream_id, RngPurpose purpose,
                            int64_t index, uint32_t component) {
  philox::Key key{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
  uint64_t idx = static_cast<uint64_t>(index);
  philox::Ctr ctr{static_cast<uint32_t>(idx), static_cast<uint32_t>(idx >> 32),
                  static_cast<uint32_t>(stream_id),
                  (static_cast<uint32_t>(stream_id >> 32) & 0xFFFFu) |
                      ((component & 0xFFu) << 16) | (static_cast<uint32_t>(purpose) << 24)};
  philox::Ctr out = philox::philox4x32_10(ctr, key);
  return (static_cast<uint64_t>(out[0]) << 32) | out[1];
}

// Map to the open interval (0,1); 2^-54 offset keeps both endpoints out.
inline double u64_to_unit(uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Acklam's rational approximation to the standard normal quantile
// (|abs error| < 1.2e-9), monotone in u: suitable for common-random-number
// coupling and inverse-transform sampling.
inline double normal_quantile(double u) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double q, r;
  if (u < plow) {
    q = std::sqrt(-2.0 * std::log(u));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (u > phigh) {
    q = std::sqrt(-2.0 * std::log(1.0 - u));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = u - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

inline double counter_normal(uint64_t seed, uint64_t stream_id, RngPurpose purpose,
                             int64_t index, uint32_t component) {
  return normal_quantile(u64_to_unit(counter_u64(seed, stream_id, purpose, index, component)));
}

inline double counter_uniform(uint64_t seed, uint64_t stream_id, RngPurpose purpose,
                              int64_t index, uint32_t component) {
  return u64_to_unit(counter_u64(seed, stream_id, purpose, index, component));
}

}  // namespace fadeldp

#endif
