#ifndef FADELDP_RATE_HPP
#define FADELDP_RATE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "fadeldp/integrate.hpp"
#include "fadeldp/optimize.hpp"

namespace fadeldp {

// Action minimization for the skeleton dynamics: steer the zero-noise
// controlled equation to a target and report 1/2 int |v|^2.
struct RateProblem {
  const CoefficientModel* model = nullptr;
  Segment xi;          // start segment (head_time = t0)
  double T = 1.0;      // terminal time
  enum class Target { point, segment };
  Target target = Target::point;
  std::vector<double> target_point;   // d entries
  std::optional<Segment> target_segment;
  double control_a = 0.0;  // control support [control_a, T]
  double control_hv = 0.125;
  SimConfig inner;                    // inner skeleton solver (scheme, h)
  double rho0 = 10.0;
  double rho_max = 1e8;
  double mismatch_tol = 5e-4;
  int multistart_random = 1;
  uint64_t seed = 0;
  LbfgsOptions lbfgs;

  void validate() const;
};

struct RateResult {
  double value = 0.0;       // 1/2 int |v|^2 (penalty-free)
  Control control;
  double mismatch = 0.0;    // terminal residual (Euclidean or r-norm)
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool feasible = false;    // mismatch <= tol: value is an upper bound on the infimum
  double rho_final = 0.0;
};

// Exact inversion when d = m and sigma is invertible along the path:
// v(s) = sigma(Phi_s)^{-1} (Phi'(s) - b(Phi_s)), derivative by central
// differences (second-order one-sided stencils at the ends).
RateResult direct_rate(const CoefficientModel& model, const PathOnGrid& phi,
                       double sigma_min_floor = 1e-8);

RateResult minimize_rate(const RateProblem& problem,
                         const std::vector<Control>& extra_starts = {});

struct HorizonCurvePoint {
  double T = 0.0;
  double value = 0.0;
  bool feasible = false;
};

struct QuasipotentialResult {
  double value = 0.0;       // min over feasible horizons; +inf if none
  bool feasible = false;
  double best_T = 0.0;
  std::vector<HorizonCurvePoint> curve;
  RateResult best;
  Segment start_segment;    // deterministic pull-back limit used as the start
};

// I_minus_infinity realized as: deterministic pull-back limit (depth n_star)
// as the start, then inf over the horizon list of the point-target action.
QuasipotentialResult quasipotential(const CoefficientModel& model, const MemoryParams& mem,
                                    const std::vector<double>& target_point,
                                    const std::vector<double>& T_list, double pullback_depth,
                                    const SimConfig& inner, const RateProblem& proto);

// Contraction projection: same construction with a terminal-segment
// constraint in the r-norm.
QuasipotentialResult contraction_project(const CoefficientModel& model, const MemoryParams& mem,
                                         const Segment& target_segment,
                                         const std::vector<double>& T_list, double pullback_depth,
                                         const SimConfig& inner, const RateProblem& proto);

struct ContinuityProbe {
  struct PairCheck {
    double lhs = 0.0;   // ||Y_t(xi1) - Y_t(xi2)||_r^2 at the probe time
    double rhs = 0.0;   // 2 e^{-lambda (t-t0) + M} ||xi1 - xi2||_r^2
    bool holds = false;
  };
  std::vector<PairCheck> xi_checks;
  std::vector<double> v_perturbation_distance;  // output distance per refinement level
  bool xi_all_hold = true;
  bool v_converging = true;
};

ContinuityProbe continuity_probe(const CoefficientModel& model, double t0,
                                 const std::vector<std::pair<Segment, Segment>>& xi_pairs,
                                 const Control& v, const std::vector<int>& oscillation_levels,
                                 double probe_T, const SimConfig& inner);

}  // namespace fadeldp

#endif
