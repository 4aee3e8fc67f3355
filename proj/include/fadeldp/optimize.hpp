#ifndef FADELDP_OPTIMIZE_HPP
#define FADELDP_OPTIMIZE_HPP

#include <functional>
#include <vector>

namespace fadeldp {

struct LbfgsOptions {
  int max_iterations = 300;
  double grad_tol = 1e-8;
  double step_tol = 1e-12;
  int memory = 8;
  double fd_step = 1e-7;       // relative forward-difference step
  bool central_differences = false;
};

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

// Quasi-Newton minimization with finite-difference gradients and Armijo
// backtracking. Deterministic for identical inputs.
LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double> x0, const LbfgsOptions& opts);

struct NelderMeadOptions {
  int max_evals = 4000;
  double tol = 1e-10;
  double initial_step = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evals = 0;
};

NelderMeadResult nelder_mead_minimize(const Objective& f, std::vector<double> x0,
                                      const NelderMeadOptions& opts);

}  // namespace fadeldp

#endif
