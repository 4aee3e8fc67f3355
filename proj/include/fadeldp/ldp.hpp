#ifndef FADELDP_LDP_HPP
#define FADELDP_LDP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fadeldp/rate.hpp"

namespace fadeldp {

// Rare events on simulated paths.
struct EventSpec {
  enum class Kind { terminal_ball, terminal_exceed, path_tube };
  Kind kind = Kind::terminal_ball;
  std::vector<double> center;     // terminal_ball
  double radius = 0.1;            // ball / tube radius
  double threshold = 1.0;         // terminal_exceed: |Y(T)| >= threshold
  double T = 1.0;
  const PathOnGrid* reference = nullptr;  // path_tube
  double tube_t_lo = 0.0, tube_t_hi = 1.0;
  bool complemented = false;

  void validate(int d) const;
};

struct StartSpec {
  enum class Kind { from_initial, stationary };
  Kind kind = Kind::from_initial;
  Segment xi;        // initial segment (head_time = t0)
  double burn = 0.0; // stationary: remote-start depth, certified via pull-back
};

struct MCEstimate {
  double eps = 0.0;
  int64_t n_samples = 0;
  double p_hat = 0.0;
  double stderr_ = 0.0;
  double eps_log_p = 0.0;
  bool p_zero = false;          // no hits: eps_log_p uses the Clopper-Pearson bound
  double p_upper = 0.0;         // one-sided 95% upper bound when p_hat = 0
  std::string method;           // "plain" | "tilted"
  double ess = 0.0;             // effective sample size of event contributions
  double mean_weight = 0.0;     // tilted: sample mean of the Girsanov weight
  double mean_weight_stderr = 0.0;
  double log_weight_var = 0.0;  // tilted: sample variance of log-weights
};

MCEstimate rare_event_mc(const CoefficientModel& model, const StartSpec& start, double eps,
                         const EventSpec& event, int64_t n, uint64_t seed,
                         Exec policy = Exec::parallel);

// Girsanov-tilted estimator: simulate with the added drift sigma * v_star and
// weight each replica by exp(-(1/sqrt(eps)) int v.dW - (1/(2 eps)) int |v|^2).
MCEstimate tilted_mc(const CoefficientModel& model, const StartSpec& start, double eps,
                     const EventSpec& event, const Control& v_star, int64_t n, uint64_t seed,
                     Exec policy = Exec::parallel);

struct SlopeReport {
  std::vector<MCEstimate> estimates;
  std::vector<double> eps_used;
  std::vector<double> excluded_eps;   // ess below the floor
  double intercept = 0.0;             // extrapolated eps log p at eps = 0
  double intercept_stderr = 0.0;
  double slope = 0.0;
  double rate_value = 0.0;            // -I prediction = -rate_value
  double rel_discrepancy = 0.0;       // |intercept + I| / I (0 when I = 0)
  int min_ess = 30;
};

SlopeReport ldp_slope(const CoefficientModel& model, const StartSpec& start,
                      const EventSpec& event, const std::vector<double>& eps_list,
                      int64_t n_per_eps, const RateResult& rate_pred, uint64_t seed,
                      Exec policy = Exec::parallel);

// Bounded functionals of k Brownian increments on [0, T] for the variational
// identity check.
struct FSpec {
  enum class Kind { clipped_linear, clipped_quadratic };
  Kind kind = Kind::clipped_linear;
  std::vector<double> coeff;  // k entries (linear); scalar alpha broadcast (quadratic)
  double clip_lo = -10.0;
  double clip_hi = 10.0;
};

struct VariationalReport {
  double lhs = 0.0;       // -log E exp(-f(W))
  double rhs_det = 0.0;   // min over deterministic piecewise-constant controls
  std::vector<double> v_opt;
  double gap = 0.0;       // rhs_det - lhs (>= -tol always)
  bool one_sided_ok = false;
  bool quadrature_lhs = false;  // false means MC was used (k > 3)
  double lhs_stderr = 0.0;
};

VariationalReport variational_check(const FSpec& f, double T, int k, int64_t n_mc, uint64_t seed);

// Gauss-Hermite nodes/weights for integrals against the standard normal
// density (probabilists' convention: sum w_i g(x_i) ~ E g(Z)).
void gauss_hermite_probabilists(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace fadeldp

#endif
