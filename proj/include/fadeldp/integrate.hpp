#ifndef FADELDP_INTEGRATE_HPP
#define FADELDP_INTEGRATE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fadeldp/model.hpp"
#include "fadeldp/wiener.hpp"

namespace fadeldp {

// Grid-discretized compactly supported control, piecewise constant on
// [a + i hv, a + (i+1) hv) and zero outside [a, b).
struct Control {
  double a = 0.0, b = 0.0;
  double hv = 0.01;
  int m = 1;
  std::vector<double> values;  // n_intervals x m

  static Control zero(int m);
  static Control from_values(double a, double hv, int m, std::vector<double> values);
  template <class F>
  static Control from_function(double a, double b, double hv, int m, F&& f) {
    int n = static_cast<int>(std::lround((b - a) / hv));
    std::vector<double> vals(static_cast<size_t>(n) * m);
    std::vector<double> buf(m);
    for (int i = 0; i < n; ++i) {
      f(a + i * hv, std::span<double>(buf));
      for (int j = 0; j < m; ++j) vals[static_cast<size_t>(i) * m + j] = buf[j];
    }
    return from_values(a, hv, m, std::move(vals));
  }

  bool is_zero() const;
  int n_intervals() const { return static_cast<int>(values.size()) / m; }
  double energy() const;            // 1/2 sum |v_i|^2 hv
  double l2_sq() const { return 2.0 * energy(); }
  bool in_S_M(double M) const { return l2_sq() < M; }
  void value_at(double t, std::span<double> out) const;
};

enum class Scheme { euler, heun };

struct SimConfig {
  double h = 0.01;
  Scheme scheme = Scheme::euler;
  double t0 = 0.0;
  double T = 1.0;
  double blowup_ceiling = 1e6;
  int steps() const;
};

// Streaming Euler-Maruyama state for the controlled equation
//   dY = b(Y_seg) dt + sigma(Y_seg) v(t) dt + sqrt(eps) sigma(Y_seg) dW.
// With eps = 0 and v = 0 this is the uncontrolled skeleton recursion; the
// same arithmetic path is used in every mode so coinciding cases agree
// bit-exactly.
class SfdeStepper {
 public:
  SfdeStepper(const CoefficientModel& model, const Segment& xi, double eps, const Control* v,
              double h, double blowup_ceiling, uint64_t seed, uint64_t stream_id);

  void step();                       // advance one grid step
  const Segment& segment() const { return seg_; }
  std::span<const double> state() const { return seg_.head(); }
  double time() const { return seg_.head_time; }
  int64_t steps_taken() const { return n_steps_; }
  // Girsanov log-weight accumulators: sum v . dW and sum |v|^2 h.
  double vdW() const { return vdW_; }
  double v_sq() const { return v_sq_; }

 private:
  const CoefficientModel& model_;
  const Control* v_;
  double eps_, sqrt_eps_, h_, ceiling_;
  uint64_t seed_, stream_id_;
  int64_t k_;  // absolute grid index of the current time
  int64_t n_steps_ = 0;
  Segment seg_;
  std::vector<double> dw_, vbuf_, next_;
  double vdW_ = 0.0, v_sq_ = 0.0;
};

PathOnGrid integrate_sfde(const CoefficientModel& model, const Segment& xi, double eps,
                          const SimConfig& cfg, const WienerPath& W);

PathOnGrid integrate_controlled(const CoefficientModel& model, const Segment& xi, double eps,
                                const Control& v, const SimConfig& cfg, const WienerPath& W);

// Deterministic skeleton  Y' = b(Y_seg) + sigma(Y_seg) v(t); Euler or Heun.
PathOnGrid integrate_skeleton(const CoefficientModel& model, const Segment& xi, const Control& v,
                              const SimConfig& cfg);

struct BoundCheckReport {
  std::vector<double> times;
  std::vector<double> mean_state_sq;   // E |Y(t)|^2
  std::vector<double> mean_norm_sq;    // E ||Y_t||_r^2
  std::vector<double> mean_diff_sq;    // E ||Y1_t - Y2_t||_r^2
  double fitted_rate = 0.0;            // decay rate of mean_diff_sq
  double r2 = 0.0;
  bool degenerate = false;             // xi1 == xi2
  double lambda_max = 0.0;             // admissible certified rate
};

enum class Exec { serial, parallel };

BoundCheckReport empirical_bounds(const CoefficientModel& model, const Segment& xi1,
                                  const Segment& xi2, double eps, const SimConfig& cfg,
                                  int n_replicas, uint64_t seed, Exec policy = Exec::parallel);

// Replica map: fn(i) must only touch replica-local state and its slot; the
// serial variant is the reference the parallel one is tested against.
void for_each_replica(int64_t n, Exec policy, const std::function<void(int64_t)>& fn);

void require_stable(const CoefficientModel& model, double r, double eps, const char* who);

}  // namespace fadeldp

#endif
