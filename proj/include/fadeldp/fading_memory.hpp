#ifndef FADELDP_FADING_MEMORY_HPP
#define FADELDP_FADING_MEMORY_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fadeldp/errors.hpp"

namespace fadeldp {

// Discretization of the exponentially weighted history space: a segment keeps
// grid values on lags {0, -h, ..., -L} plus a tail coefficient g, and the
// history beyond -L is extrapolated as g * exp(-r*tau) (the only shape whose
// weighted value exp(r*tau)*phi(tau) is constant in the deep past).
struct MemoryParams {
  double r = 1.0;         // fading rate (1/time)
  double h = 0.01;        // history grid step (time)
  double L = 1.0;         // window length (time), integer multiple of h
  double tail_tol = 1e-6; // tolerated tail contribution relative to the grid norm

  int lag_count() const;  // number of stored values = L/h + 1
  void validate() const;
  bool operator==(const MemoryParams&) const = default;
};

struct Segment {
  double head_time = 0.0;
  int dim = 1;
  MemoryParams params;
  std::vector<double> values;  // (lag_count) x dim, values[k*dim+j] = phi(-k*h)_j
  std::vector<double> tail;    // g, dim entries

  static Segment from_values(double head_time, int dim, const MemoryParams& params,
                             std::vector<double> values, std::vector<double> tail_coeff);
  // Sample a callable phi(tau) on the lag grid; g must be supplied by the caller
  // (0 for histories that vanish in the weighted limit).
  template <class F>
  static Segment from_function(double head_time, int dim, const MemoryParams& params, F&& phi,
                               std::vector<double> tail_coeff);
  static Segment constant(double head_time, int dim, const MemoryParams& params, double value);

  std::span<const double> at_lag_index(int k) const {
    return {values.data() + static_cast<size_t>(k) * dim, static_cast<size_t>(dim)};
  }
  std::span<const double> head() const { return at_lag_index(0); }

  // phi(tau) for arbitrary tau <= 0: linear interpolation on the grid,
  // g*exp(-r*tau) beyond -L.
  void value_at(double tau, std::span<double> out) const;

  bool operator==(const Segment&) const = default;
};

// Probability measure on (-infty, 0]: point masses plus an optional
// exponential density c * beta * exp(beta*tau).
struct DelayMeasure {
  struct Atom {
    double lag = 0.0;    // <= 0
    double weight = 0.0; // > 0
    bool operator==(const Atom&) const = default;
  };
  struct Expo {
    double mass = 0.0; // c >= 0
    double beta = 1.0; // > 0
    bool operator==(const Expo&) const = default;
  };
  std::vector<Atom> atoms;
  std::optional<Expo> expo;

  static DelayMeasure point_mass(double lag);
  void validate() const;
  bool in_M(double kappa) const;  // moment(kappa) finite
  double deepest_atom() const;
  // integral of exp(-kappa*tau) over (-infty, -Lcut]; closed form.
  double weighted_tail_mass(double kappa, double Lcut) const;
  bool operator==(const DelayMeasure&) const = default;
};

// mu^(kappa) = int exp(-kappa*tau) mu(dtau), closed form.
double measure_moment(const DelayMeasure& mu, double kappa);

double cr_norm(const Segment& seg);

Segment shift_segment(const Segment& seg, std::span<const double> new_head);

Segment segment_sub(const Segment& a, const Segment& b);
Segment segment_add(const Segment& a, const Segment& b);
Segment segment_scale(const Segment& a, double c);
Segment with_head_time(const Segment& a, double t);

// int phi(tau) mu(dtau) in R^d. Atoms via linear interpolation (tail
// extrapolation beyond -L); the exponential density via trapezoid on the lag
// grid, with the grid weights normalized to the exact interval mass, plus the
// closed-form tail integral using g.
std::vector<double> delay_integral(const Segment& seg, const DelayMeasure& mu);
// int |phi(tau)|^2 mu(dtau) (scalar). Requires mu in M_{2r}.
double delay_integral_sq(const Segment& seg, const DelayMeasure& mu);

// Smallest grid-aligned window L with
// bound^2 * int_{(-inf,-L]} exp(-2r*tau) mu(dtau) <= tail_tol for every mu.
double choose_window(double r, double bound_on_norm, const std::vector<DelayMeasure>& mu_list,
                     double tail_tol, double h);

// A path of states on a uniform grid together with the segment process it
// induces. `gs` records the tail coefficient after each shift so that
// segment_at(t) is bit-identical to repeated shift_segment calls.
struct PathOnGrid {
  double t0 = 0.0;
  double h = 0.01;
  int dim = 1;
  Segment initial;
  std::vector<double> states;  // (steps+1) x dim, states[0] = initial head
  std::vector<double> gs;      // (steps+1) x dim

  int steps() const { return static_cast<int>(states.size() / dim) - 1; }
  double t_max() const { return t0 + steps() * h; }
  std::span<const double> state_at(int idx) const {
    return {states.data() + static_cast<size_t>(idx) * dim, static_cast<size_t>(dim)};
  }
  int index_of(double t) const;
  Segment segment_at(double t) const;

  template <class F>
  static PathOnGrid from_function(double t0, double h, int n_steps, int dim,
                                  const MemoryParams& params, F&& f);
  static PathOnGrid from_initial(const Segment& initial, double h, int n_steps);
  void push_state(std::span<const double> x);  // appends one step (shift bookkeeping included)
};

PathOnGrid path_diff(const PathOnGrid& a, const PathOnGrid& b);

// sup over grid times in [t_lo, t_hi] of the r-norm of the segment difference.
double path_sup_rnorm_diff(const PathOnGrid& a, const PathOnGrid& b, double t_lo, double t_hi);

struct PathNorm {
  double value_sq = 0.0;        // truncated sum_{n=1..n_max} 2^-n (||Phi(t0+n)||_r^2 ^ 1)
  double remainder_bound = 0.0; // 2^-n_max
};

// Weighted path seminorm. Checkpoints sit at t0 + n, n = 1..n_max: the series
// from the space definition is re-centered on the path's own time origin.
PathNorm path_norm(const PathOnGrid& path, int n_max);

// ---- inline/template definitions ----

template <class F>
Segment Segment::from_function(double head_time, int dim, const MemoryParams& params, F&& phi,
                               std::vector<double> tail_coeff) {
  const int K = params.lag_count();
  std::vector<double> vals(static_cast<size_t>(K) * dim);
  std::vector<double> buf(dim);
  for (int k = 0; k < K; ++k) {
    phi(-k * params.h, std::span<double>(buf));
    for (int j = 0; j < dim; ++j) vals[static_cast<size_t>(k) * dim + j] = buf[j];
  }
  return from_values(head_time, dim, params, std::move(vals), std::move(tail_coeff));
}

template <class F>
PathOnGrid PathOnGrid::from_function(double t0, double h, int n_steps, int dim,
                                     const MemoryParams& params, F&& f) {
  std::vector<double> buf(dim);
  auto hist = [&](double tau, std::span<double> out) { f(t0 + tau, out); };
  Segment init = Segment::from_function(t0, dim, params, hist, std::vector<double>(dim, 0.0));
  PathOnGrid p = from_initial(init, h, n_steps);
  for (int k = 1; k <= n_steps; ++k) {
    f(t0 + k * h, std::span<double>(buf));
    p.push_state(buf);
  }
  return p;
}

}  // namespace fadeldp

#endif
