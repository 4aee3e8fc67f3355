#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fadeldp/rng.hpp"
#include "fadeldp/stats.hpp"
#include "fadeldp/wiener.hpp"

using namespace fadeldp;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using philox::Ctr;
  using philox::Key;
  {
    Ctr out = philox::philox4x32_10(Ctr{0, 0, 0, 0}, Key{0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
  }
  {
    Ctr out = philox::philox4x32_10(Ctr{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                    Key{0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);
  }
  {
    Ctr out = philox::philox4x32_10(Ctr{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                    Key{0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
  }
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double u : {1e-8, 1e-4, 0.02, 0.3, 0.5, 0.9, 0.99, 1.0 - 1e-6}) {
    double z = normal_quantile(u);
    CHECK(normal_cdf(z) == doctest::Approx(u).epsilon(1e-6));
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("counter draws are deterministic and address-separated") {
  double a = counter_normal(42, 0, RngPurpose::wiener, 17, 0);
  double b = counter_normal(42, 0, RngPurpose::wiener, 17, 0);
  CHECK(a == b);
  CHECK(counter_normal(42, 0, RngPurpose::wiener, 18, 0) != a);
  CHECK(counter_normal(42, 1, RngPurpose::wiener, 17, 0) != a);
  CHECK(counter_normal(42, 0, RngPurpose::report_sampling, 17, 0) != a);
  CHECK(counter_normal(43, 0, RngPurpose::wiener, 17, 0) != a);
  CHECK(counter_normal(42, 0, RngPurpose::wiener, -17, 0) != a);
}

TEST_CASE("sample_wiener determinism and grid anchoring") {
  WienerPath w1 = sample_wiener(-1.0, 2.0, 0.01, 2, 7, 3);
  WienerPath w2 = sample_wiener(-1.0, 2.0, 0.01, 2, 7, 3);
  CHECK(w1.incs == w2.incs);

  // Extending t_min leftward preserves increments at fixed absolute indices.
  WienerPath w3 = sample_wiener(-5.0, 2.0, 0.01, 2, 7, 3);
  for (int64_t k = w1.k_min; k < w1.k_max; ++k) {
    auto a = w1.increment(k);
    auto b = w3.increment(k);
    for (int c = 0; c < 2; ++c) CHECK(a[c] == b[c]);
  }

  // W(0) = 0 on the value grid.
  auto vals = w1.values_on_grid();
  size_t zero_idx = static_cast<size_t>(-w1.k_min) * w1.m;
  CHECK(vals[zero_idx] == 0.0);
  CHECK(vals[zero_idx + 1] == 0.0);

  CHECK_THROWS_AS(sample_wiener(0.5, 2.0, 0.01, 1, 7, 3), Error);
  CHECK_THROWS_AS(sample_wiener(-1.0, 2.0, -0.01, 1, 7, 3), Error);
}

TEST_CASE("brownian variance matches t over replicas" * doctest::timeout(120)) {
  // var of W(t) ~ t. 1e5 replicas of the sum over [0, 1], h = 0.05.
  const int n = 100'000;
  const double h = 0.05, t = 1.0;
  const int steps = static_cast<int>(t / h);
  std::vector<double> endpoints(n);
  std::vector<double> inc(1);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < steps; ++k) {
      wiener_increment(h, 1, 99, static_cast<uint64_t>(i), 0, k, inc);
      s += inc[0];
    }
    endpoints[i] = s;
  }
  auto mv = mean_var(endpoints);
  CHECK(std::abs(mv.var - t) / t < 0.02);
  CHECK(std::abs(mv.mean) < 3.5 * std::sqrt(t / n));
}

TEST_CASE("wiener shift preserves increment statistics (two-sample KS)") {
  // Increments of W vs increments of the shifted path, disjoint index ranges.
  const int n = 4000;
  WienerPath w = sample_wiener(-1.0, 80.0, 0.01, 1, 5, 0);
  WienerPath ws = shift_wiener(w, 40.0);
  std::vector<double> a, b;
  for (int k = 0; k < n; ++k) a.push_back(w.increment(k)[0]);
  for (int k = 0; k < n; ++k) b.push_back(ws.increment(k)[0]);
  auto ks = ks_two_sample(a, b, 0.01);
  CHECK(!ks.reject);
  // shift identity: ws increments at k equal w increments at k + 4000
  for (int k = 0; k < 100; ++k)
    CHECK(ws.increment(k)[0] == w.increment(k + 4000)[0]);
}

TEST_CASE("increments pass a normality KS test") {
  const int n = 100'000;
  std::vector<double> xs(n);
  std::vector<double> inc(1);
  for (int i = 0; i < n; ++i) {
    wiener_increment(1.0, 1, 123, 9, 0, i, inc);
    xs[i] = inc[0];
  }
  auto ks = ks_test_against_cdf(xs, normal_cdf_param, 0.0, 1.0, 0.01);
  CHECK(!ks.reject);
}
