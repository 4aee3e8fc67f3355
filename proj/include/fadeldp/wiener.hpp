#ifndef FADELDP_WIENER_HPP
#define FADELDP_WIENER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "fadeldp/errors.hpp"

namespace fadeldp {

// Two-sided Brownian increments on the absolute grid {k h : k in Z}. The
// increment over [k h, (k+1) h) is a pure function of (seed, stream_id, k), so
// extending the grid to the left or restarting mid-path never reshuffles
// noise, and all replicas of a sweep address disjoint streams.
struct WienerPath {
  double h = 0.01;
  int64_t k_min = 0, k_max = 0;  // grid covers [k_min h, k_max h]
  int m = 1;
  uint64_t seed = 0, stream_id = 0;
  int64_t shift_steps = 0;  // Wiener shift offset in grid steps
  std::vector<double> incs;  // (k_max - k_min) x m

  int64_t n_increments() const { return k_max - k_min; }
  std::span<const double> increment(int64_t k) const {
    return {incs.data() + static_cast<size_t>(k - k_min) * m, static_cast<size_t>(m)};
  }
  double t_min() const { return k_min * h; }
  double t_max() const { return k_max * h; }
  // W on the grid, anchored at W(0) = 0 (index 0 is inside by construction).
  std::vector<double> values_on_grid() const;
};

WienerPath sample_wiener(double t_min, double t_max, double h, int m, uint64_t seed,
                         uint64_t stream_id);

// W'(t) = W(s + t) - W(s): increments shifted by s/h grid steps.
WienerPath shift_wiener(const WienerPath& w, double s);

// Single increment without materializing a path (used by streaming loops).
void wiener_increment(double h, int m, uint64_t seed, uint64_t stream_id, int64_t shift_steps,
                      int64_t k, std::span<double> out);

}  // namespace fadeldp

#endif
