#ifndef FADELDP_PULLBACK_HPP
#define FADELDP_PULLBACK_HPP

#include <cstdint>
#include <vector>

#include "fadeldp/integrate.hpp"
#include "fadeldp/stats.hpp"

namespace fadeldp {

// Remote-start construction: runs from -n on one shared noise path contract
// toward the stationary solution; successive differences decay geometrically.
struct PullbackRun {
  std::vector<double> n_list;
  double t_lo = 0.0, t_hi = 1.0;
  // diffs[i][k]: r-norm of the segment difference between runs -n_i and
  // -n_{i+1} at window time t_lo + k * h.
  std::vector<std::vector<double>> diffs;
  std::vector<double> sup_diffs;  // sup over the window, per pair
  double fitted_rate = 0.0;       // from log sup_diff ~ c - rate * n
  double r2 = 0.0;
  double terminal_diff = 0.0;     // sup diff of the deepest pair
  PathOnGrid limit_path;          // deepest run restricted to the window
};

PullbackRun pullback_solve(const CoefficientModel& model, const Segment& xi, double eps,
                           double t_lo, double t_hi, const std::vector<double>& n_list,
                           const SimConfig& cfg, uint64_t seed, uint64_t stream_id = 0);

// Deterministic analog with a control; also checks the integrated-form
// residual of the limit path on random (t1, t2, tau) triples.
struct SkeletonPullbackRun {
  PullbackRun run;
  double max_eq_residual = 0.0;
  Segment limit_segment;  // segment of the limit path at t_lo
};

SkeletonPullbackRun skeleton_pullback(const CoefficientModel& model, const Segment& xi,
                                      const Control& v, double t_lo, double t_hi,
                                      const std::vector<double>& n_list, const SimConfig& cfg,
                                      int n_residual_triples = 16, uint64_t seed = 0);

// Per-eps mean pull-back decay, uniform-in-eps rate floor (fits the decay of
// the replica-mean squared segment-norm differences).
struct UniformPullbackReport {
  std::vector<double> eps_list;
  std::vector<double> rates;
  std::vector<double> r2s;
  double min_rate = 0.0;
  double lambda_max = 0.0;
};

UniformPullbackReport controlled_pullback_uniform(const CoefficientModel& model, const Segment& xi,
                                                  const std::vector<double>& eps_list,
                                                  const Control& v, double t_lo, double t_hi,
                                                  const std::vector<double>& n_list,
                                                  const SimConfig& cfg, int n_replicas,
                                                  uint64_t seed, Exec policy = Exec::parallel);

struct StationarityReport {
  std::vector<double> times;
  int dim = 1;
  // marginals[t][j] holds n_replicas samples of coordinate j at times[t]
  std::vector<std::vector<std::vector<double>>> marginals;
  std::vector<double> mean_norm_sq;      // per time
  // pairwise per-coordinate two-sample KS results, flattened (t1<t2, coord)
  struct PairKs {
    int t1, t2, coord;
    KsResult ks;
  };
  std::vector<PairKs> pair_ks;
  double ks_pass_fraction = 1.0;
  EnergyResult energy;            // pooled first-vs-last time, on segments
  LinearFit norm_slope;           // mean norm^2 vs t
  bool uniform_bound_flat = true; // slope CI contains 0
  double burn_in = 0.0;
  double certified_diff = 0.0;    // pull-back diff at the burn-in depth
};

StationarityReport stationarity_test(const CoefficientModel& model, const MemoryParams& mem,
                                     double eps, const SimConfig& cfg, double n_burn,
                                     const std::vector<double>& times, int n_replicas,
                                     double alpha, uint64_t seed, Exec policy = Exec::parallel);

}  // namespace fadeldp

#endif
