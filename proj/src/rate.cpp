#include "fadeldp/rate.hpp"

#include <cmath>

#include "fadeldp/pullback.hpp"
#include "fadeldp/rng.hpp"

namespace fadeldp {

void RateProblem::validate() const {
  if (!model) fail(ErrorKind::config, "RateProblem: missing model");
  if (!(T > xi.head_time)) fail(ErrorKind::config, "RateProblem: T must exceed the start time");
  if (control_hv + 1e-12 < inner.h)
    fail(ErrorKind::config, "RateProblem: control grid must not be finer than the solver grid");
  if (target == Target::point && static_cast<int>(target_point.size()) != model->d)
    fail(ErrorKind::config, "RateProblem: target point dimension mismatch");
  if (target == Target::segment && !target_segment)
    fail(ErrorKind::config, "RateProblem: missing target segment");
}

RateResult direct_rate(const CoefficientModel& model, const PathOnGrid& phi,
                       double sigma_min_floor) {
  if (model.d != model.m)
    fail(ErrorKind::config, "direct_rate: requires d == m (square diffusion)");
  const int n = phi.steps();
  if (n < 2) fail(ErrorKind::config, "direct_rate: path too short");
  const int d = model.d;
  const double h = phi.h;

  std::vector<double> v_values(static_cast<size_t>(n + 1) * d);
  Vec rhs(d), deriv(d);
  for (int k = 0; k <= n; ++k) {
    // Phi'(t_k): central differences inside, second-order one-sided at ends.
    for (int i = 0; i < d; ++i) {
      if (k == 0)
        deriv[i] = (-3.0 * phi.state_at(0)[i] + 4.0 * phi.state_at(1)[i] - phi.state_at(2)[i]) /
                   (2.0 * h);
      else if (k == n)
        deriv[i] = (3.0 * phi.state_at(n)[i] - 4.0 * phi.state_at(n - 1)[i] +
                    phi.state_at(n - 2)[i]) /
                   (2.0 * h);
      else
        deriv[i] = (phi.state_at(k + 1)[i] - phi.state_at(k - 1)[i]) / (2.0 * h);
    }
    Segment seg = phi.segment_at(phi.t0 + k * h);
    Vec b = eval_drift(model, seg);
    Mat sig = eval_diffusion(model, seg);
    double smin = min_singular_value(sig);
    if (smin < sigma_min_floor)
      fail(ErrorKind::invalid, "direct_rate: singular diffusion at t=" +
                                   std::to_string(phi.t0 + k * h) +
                                   " (min singular value " + std::to_string(smin) + ")");
    for (int i = 0; i < d; ++i) rhs[i] = deriv[i] - b[i];
    Vec v = lu_solve(sig, rhs);
    for (int i = 0; i < d; ++i) v_values[static_cast<size_t>(k) * d + i] = v[i];
  }

  // 1/2 int |v|^2 by trapezoid on the sim grid.
  double action = 0.0;
  for (int k = 0; k <= n; ++k) {
    double w = (k == 0 || k == n) ? 0.5 : 1.0;
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      double vv = v_values[static_cast<size_t>(k) * d + i];
      s += vv * vv;
    }
    action += w * s * h;
  }

  RateResult res;
  res.value = 0.5 * action;
  // Control sampled at interval left endpoints (node k), support [t0, T).
  std::vector<double> ctrl(v_values.begin(), v_values.end() - d);
  res.control = Control::from_values(phi.t0, h, d, std::move(ctrl));
  res.mismatch = 0.0;
  res.feasible = true;
  res.converged = true;
  return res;
}

namespace {

// Integrate the skeleton under the packed control and measure the terminal
// residual.
double terminal_mismatch(const RateProblem& p, const Control& v) {
  SimConfig cfg = p.inner;
  cfg.t0 = p.xi.head_time;
  cfg.T = p.T;
  PathOnGrid path = integrate_skeleton(*p.model, p.xi, v, cfg);
  if (p.target == RateProblem::Target::point) {
    auto yT = path.state_at(path.steps());
    double s = 0.0;
    for (int i = 0; i < p.model->d; ++i) {
      double dd = yT[i] - p.target_point[i];
      s += dd * dd;
    }
    return std::sqrt(s);
  }
  Segment end = path.segment_at(p.T);
  return cr_norm(segment_sub(end, *p.target_segment));
}

Control unpack_control(const RateProblem& p, const std::vector<double>& x) {
  return Control::from_values(p.control_a, p.control_hv, p.model->m,
                              std::vector<double>(x.begin(), x.end()));
}

double control_energy(const std::vector<double>& x, double hv) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return 0.5 * s * hv;
}

}  // namespace

RateResult minimize_rate(const RateProblem& problem, const std::vector<Control>& extra_starts) {
  problem.validate();
  const RateProblem& p = problem;
  require_stable(*p.model, p.xi.params.r, 0.0, "minimize_rate");
  const int m = p.model->m;
  const int n_int = static_cast<int>(std::lround((p.T - p.control_a) / p.control_hv));
  if (n_int < 1) fail(ErrorKind::config, "minimize_rate: empty control grid");
  const size_t dim = static_cast<size_t>(n_int) * m;

  // Candidate starts: zero, callers' warm starts, seeded random.
  std::vector<std::vector<double>> starts;
  starts.emplace_back(dim, 0.0);
  for (const auto& c : extra_starts) {
    // resample onto the problem's control grid
    std::vector<double> x(dim, 0.0);
    std::vector<double> buf(m);
    for (int i = 0; i < n_int; ++i) {
      c.value_at(p.control_a + (i + 0.5) * p.control_hv, buf);
      for (int j = 0; j < m; ++j) x[static_cast<size_t>(i) * m + j] = buf[j];
    }
    starts.push_back(std::move(x));
  }
  for (int rs = 0; rs < p.multistart_random; ++rs) {
    std::vector<double> x(dim);
    for (size_t i = 0; i < dim; ++i)
      x[i] = 0.3 * counter_normal(p.seed, 31, RngPurpose::optimizer,
                                  static_cast<int64_t>(rs) * 100'000 + static_cast<int64_t>(i), 0);
    starts.push_back(std::move(x));
  }

  RateResult best;
  best.value = INFINITY;
  bool have_any = false;

  for (size_t si = 0; si < starts.size(); ++si) {
    std::vector<double> x = starts[si];
    double rho = p.rho0;
    LbfgsResult lb;
    double mism = INFINITY;
    int total_iters = 0;
    while (true) {
      Objective J = [&](const std::vector<double>& xc) {
        Control v = unpack_control(p, xc);
        double ms = terminal_mismatch(p, v);
        return control_energy(xc, p.control_hv) + rho * ms * ms;
      };
      lb = lbfgs_minimize(J, x, p.lbfgs);
      x = lb.x;
      mism = terminal_mismatch(p, unpack_control(p, x));
      total_iters += lb.iterations;
      if (mism <= p.mismatch_tol || rho >= p.rho_max) break;
      rho *= 10.0;
    }
    RateResult cand;
    cand.value = control_energy(x, p.control_hv);
    cand.control = unpack_control(p, x);
    cand.mismatch = mism;
    cand.iterations = total_iters;
    cand.grad_norm = lb.grad_norm;
    cand.converged = lb.converged;
    cand.feasible = mism <= p.mismatch_tol;
    cand.rho_final = rho;
    // Prefer feasible candidates; among equals take the lower value; ties go
    // to the earlier start (deterministic reduction).
    bool better = !have_any || (cand.feasible && !best.feasible) ||
                  (cand.feasible == best.feasible && cand.value < best.value - 1e-15);
    if (better) best = std::move(cand);
    have_any = true;
  }
  return best;
}

namespace {

QuasipotentialResult horizon_sweep(const CoefficientModel& model, const RateProblem& proto,
                                   const Segment& start, const std::vector<double>& T_list,
                                   const std::vector<double>* point_target,
                                   const Segment* segment_target) {
  QuasipotentialResult out;
  out.start_segment = start;
  out.value = INFINITY;
  RateResult prev;
  bool have_prev = false;
  for (double T : T_list) {
    RateProblem p = proto;
    p.model = &model;
    p.xi = with_head_time(start, 0.0);
    p.T = T;
    p.control_a = 0.0;
    if (point_target) {
      p.target = RateProblem::Target::point;
      p.target_point = *point_target;
    } else {
      p.target = RateProblem::Target::segment;
      p.target_segment = with_head_time(*segment_target, T);
    }
    std::vector<Control> warm;
    if (have_prev) warm.push_back(prev.control);
    RateResult r = minimize_rate(p, warm);
    HorizonCurvePoint pt{T, r.value, r.feasible};
    out.curve.push_back(pt);
    if (r.feasible) {
      // monotone-in-T tie-breaking: first (lowest) T wins on near-equality
      if (!out.feasible || r.value < out.value - 1e-12) {
        out.value = r.value;
        out.best_T = T;
        out.best = r;
        out.feasible = true;
      }
      prev = r;
      have_prev = true;
    }
  }
  return out;
}

}  // namespace

QuasipotentialResult quasipotential(const CoefficientModel& model, const MemoryParams& mem,
                                    const std::vector<double>& target_point,
                                    const std::vector<double>& T_list, double pullback_depth,
                                    const SimConfig& inner, const RateProblem& proto) {
  if (T_list.empty()) fail(ErrorKind::config, "quasipotential: empty horizon list");
  for (size_t i = 1; i < T_list.size(); ++i)
    if (!(T_list[i] > T_list[i - 1]))
      fail(ErrorKind::config, "quasipotential: T_list must be increasing");

  // Deterministic pull-back to the attractor segment.
  Segment xi0 = Segment::constant(0.0, model.d, mem, 0.0);
  std::vector<double> n_list{pullback_depth / 2, pullback_depth};
  SimConfig cfg = inner;
  auto sk = skeleton_pullback(model, xi0, Control::zero(model.m), 0.0,
                              std::max(inner.h * 2, 0.5), n_list, cfg, 4, 0);
  Segment start = sk.limit_segment;

  return horizon_sweep(model, proto, start, T_list, &target_point, nullptr);
}

QuasipotentialResult contraction_project(const CoefficientModel& model, const MemoryParams& mem,
                                         const Segment& target_segment,
                                         const std::vector<double>& T_list, double pullback_depth,
                                         const SimConfig& inner, const RateProblem& proto) {
  if (T_list.empty()) fail(ErrorKind::config, "contraction_project: empty horizon list");
  Segment xi0 = Segment::constant(0.0, model.d, mem, 0.0);
  std::vector<double> n_list{pullback_depth / 2, pullback_depth};
  auto sk = skeleton_pullback(model, xi0, Control::zero(model.m), 0.0,
                              std::max(inner.h * 2, 0.5), n_list, inner, 4, 0);
  Segment start = sk.limit_segment;
  return horizon_sweep(model, proto, start, T_list, nullptr, &target_segment);
}

ContinuityProbe continuity_probe(const CoefficientModel& model, double t0,
                                 const std::vector<std::pair<Segment, Segment>>& xi_pairs,
                                 const Control& v, const std::vector<int>& oscillation_levels,
                                 double probe_T, const SimConfig& inner) {
  ContinuityProbe out;
  const double r = xi_pairs.empty() ? 1.0 : xi_pairs.front().first.params.r;
  auto an = dissipativity_analytic(model, r, 1.0);  // skeleton bound uses the full lambda3
  const double lambda = std::max(1e-6, 0.9 * an.lambda_max);
  const double M = v.l2_sq();

  for (const auto& [xi1, xi2] : xi_pairs) {
    SimConfig cfg = inner;
    cfg.t0 = t0;
    cfg.T = t0 + probe_T;
    PathOnGrid p1 = integrate_skeleton(model, with_head_time(xi1, t0), v, cfg);
    PathOnGrid p2 = integrate_skeleton(model, with_head_time(xi2, t0), v, cfg);
    double lhs = cr_norm(segment_sub(p1.segment_at(cfg.T), p2.segment_at(cfg.T)));
    lhs *= lhs;
    double xin = cr_norm(segment_sub(xi1, xi2));
    double rhs = 2.0 * std::exp(-lambda * probe_T + M) * xin * xin;
    ContinuityProbe::PairCheck c{lhs, rhs, lhs <= rhs + 1e-12};
    out.xi_all_hold = out.xi_all_hold && c.holds;
    out.xi_checks.push_back(c);
  }

  if (!xi_pairs.empty() && !oscillation_levels.empty()) {
    const Segment& xi = xi_pairs.front().first;
    SimConfig cfg = inner;
    cfg.t0 = t0;
    cfg.T = t0 + probe_T;
    PathOnGrid base = integrate_skeleton(model, with_head_time(xi, t0), v, cfg);
    for (int nlev : oscillation_levels) {
      Control vn = Control::from_function(
          v.a, std::max(v.b, v.a + probe_T), inner.h, v.m, [&](double t, std::span<double> o) {
            std::vector<double> b(v.m);
            v.value_at(t, b);
            for (int j = 0; j < v.m; ++j)
              o[j] = b[j] + (1.0 / nlev) * std::sin(nlev * (t - t0));
          });
      PathOnGrid pn = integrate_skeleton(model, with_head_time(xi, t0), vn, cfg);
      out.v_perturbation_distance.push_back(
          path_sup_rnorm_diff(pn, base, t0 + probe_T / 2, t0 + probe_T));
    }
    for (size_t i = 1; i < out.v_perturbation_distance.size(); ++i)
      if (out.v_perturbation_distance[i] > out.v_perturbation_distance[i - 1] + 1e-12)
        out.v_converging = false;
  }
  return out;
}

}  // namespace fadeldp
