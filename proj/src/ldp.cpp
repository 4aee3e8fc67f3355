#include "fadeldp/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fadeldp/rng.hpp"
#include "fadeldp/stats.hpp"

namespace fadeldp {

void EventSpec::validate(int d) const {
  if (kind == Kind::terminal_ball) {
    if (static_cast<int>(center.size()) != d)
      fail(ErrorKind::config, "EventSpec: center dimension mismatch");
    if (!(radius > 0.0)) fail(ErrorKind::config, "EventSpec: radius must be > 0");
  }
  if (kind == Kind::path_tube) {
    if (!reference) fail(ErrorKind::config, "EventSpec: path_tube needs a reference path");
    if (!(radius > 0.0)) fail(ErrorKind::config, "EventSpec: radius must be > 0");
  }
}

namespace {

struct ReplicaOutcome {
  bool hit = false;
  double log_weight = 0.0;  // 0 for plain MC
};

// One replica: simulate from the (possibly remote) start to the event
// horizon under the tilt (if any) and evaluate the indicator.
ReplicaOutcome run_replica(const CoefficientModel& model, const StartSpec& start, double eps,
                           const EventSpec& event, const Control* tilt, double h,
                           double blowup_ceiling, uint64_t seed, uint64_t stream_id) {
  double t_begin = start.kind == StartSpec::Kind::stationary
                       ? start.xi.head_time - start.burn
                       : start.xi.head_time;
  Segment xi = with_head_time(start.xi, t_begin);
  SfdeStepper st(model, xi, eps, tilt, h, blowup_ceiling, seed, stream_id);

  const int64_t total = std::llround((event.T - t_begin) / h);
  const PathOnGrid* ref = event.reference;
  double tube_sup = 0.0;
  for (int64_t k = 0; k < total; ++k) {
    st.step();
    if (event.kind == EventSpec::Kind::path_tube) {
      double t = st.time();
      if (t >= event.tube_t_lo - 1e-9 && t <= event.tube_t_hi + 1e-9) {
        Segment diff = segment_sub(st.segment(), ref->segment_at(t));
        tube_sup = std::max(tube_sup, cr_norm(diff));
      }
    }
  }

  bool hit = false;
  switch (event.kind) {
    case EventSpec::Kind::terminal_ball: {
      auto y = st.state();
      double s = 0.0;
      for (size_t i = 0; i < y.size(); ++i) {
        double dd = y[i] - event.center[i];
        s += dd * dd;
      }
      hit = std::sqrt(s) <= event.radius;
      break;
    }
    case EventSpec::Kind::terminal_exceed: {
      auto y = st.state();
      double s = 0.0;
      for (double v : y) s += v * v;
      hit = std::sqrt(s) >= event.threshold;
      break;
    }
    case EventSpec::Kind::path_tube:
      hit = tube_sup <= event.radius;
      break;
  }
  if (event.complemented) hit = !hit;

  ReplicaOutcome out;
  out.hit = hit;
  if (tilt && eps > 0.0)
    out.log_weight = -st.vdW() / std::sqrt(eps) - st.v_sq() / (2.0 * eps);
  return out;
}

MCEstimate reduce_estimates(double eps, int64_t n, const std::vector<double>& contrib,
                            const std::vector<double>& weights, bool tilted) {
  MCEstimate est;
  est.eps = eps;
  est.n_samples = n;
  est.method = tilted ? "tilted" : "plain";

  double sum = 0.0, sum_sq = 0.0;
  double hit_wsum = 0.0, hit_wsq = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    sum += contrib[i];
    sum_sq += contrib[i] * contrib[i];
    if (contrib[i] != 0.0) {
      hit_wsum += contrib[i];
      hit_wsq += contrib[i] * contrib[i];
    }
  }
  est.p_hat = sum / n;
  double var = n > 1 ? (sum_sq - sum * sum / n) / (n - 1) : 0.0;
  est.stderr_ = std::sqrt(std::max(0.0, var) / n);
  est.ess = hit_wsq > 0.0 ? hit_wsum * hit_wsum / hit_wsq : 0.0;

  if (tilted) {
    MeanVar wv = mean_var(weights);
    est.mean_weight = wv.mean;
    est.mean_weight_stderr = wv.stderr_;
    std::vector<double> logs(weights.size());
    for (size_t i = 0; i < weights.size(); ++i) logs[i] = std::log(weights[i]);
    est.log_weight_var = mean_var(logs).var;
  }

  if (est.p_hat > 0.0) {
    est.eps_log_p = eps * std::log(est.p_hat);
  } else {
    est.p_zero = true;
    est.p_upper = clopper_pearson_upper(0, n, 0.95);
    est.eps_log_p = eps * std::log(est.p_upper);
  }
  return est;
}

double default_step(const CoefficientModel& model) {
  double deepest = std::min(model.mu1.deepest_atom(), model.mu2.deepest_atom());
  double h = 0.01;
  if (deepest < 0.0) h = std::min(h, -deepest / 10.0);
  return h;
}

}  // namespace

MCEstimate rare_event_mc(const CoefficientModel& model, const StartSpec& start, double eps,
                         const EventSpec& event, int64_t n, uint64_t seed, Exec policy) {
  model.validate();
  event.validate(model.d);
  if (n < 1) fail(ErrorKind::config, "rare_event_mc: n must be >= 1");
  require_stable(model, start.xi.params.r, eps, "rare_event_mc");
  const double h = start.xi.params.h;

  std::vector<double> contrib(n, 0.0);
  for_each_replica(n, policy, [&](int64_t i) {
    auto out = run_replica(model, start, eps, event, nullptr, h, 1e6, seed,
                           static_cast<uint64_t>(i));
    contrib[i] = out.hit ? 1.0 : 0.0;
  });
  std::vector<double> no_weights;
  return reduce_estimates(eps, n, contrib, no_weights, false);
}

MCEstimate tilted_mc(const CoefficientModel& model, const StartSpec& start, double eps,
                     const EventSpec& event, const Control& v_star, int64_t n, uint64_t seed,
                     Exec policy) {
  model.validate();
  event.validate(model.d);
  if (n < 1) fail(ErrorKind::config, "tilted_mc: n must be >= 1");
  require_stable(model, start.xi.params.r, eps, "tilted_mc");
  if (!v_star.values.empty() && v_star.b > event.T + 1e-9)
    fail(ErrorKind::config, "tilted_mc: tilt support must end by the event horizon");
  const double h = start.xi.params.h;

  std::vector<double> contrib(n, 0.0), weights(n, 1.0);
  for_each_replica(n, policy, [&](int64_t i) {
    auto out = run_replica(model, start, eps, event, &v_star, h, 1e6, seed,
                           static_cast<uint64_t>(i));
    if (out.log_weight > 700.0)
      fail(ErrorKind::divergence,
           "tilted_mc: weight overflow; use a smaller tilt or larger eps");
    double w = std::exp(out.log_weight);
    weights[i] = w;
    contrib[i] = out.hit ? w : 0.0;
  });
  return reduce_estimates(eps, n, contrib, weights, true);
}

SlopeReport ldp_slope(const CoefficientModel& model, const StartSpec& start,
                      const EventSpec& event, const std::vector<double>& eps_list,
                      int64_t n_per_eps, const RateResult& rate_pred, uint64_t seed,
                      Exec policy) {
  if (eps_list.size() < 2) fail(ErrorKind::config, "ldp_slope: need at least two eps values");
  for (size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      fail(ErrorKind::config, "ldp_slope: eps_list must be decreasing");
  if (!rate_pred.feasible && rate_pred.value != 0.0)
    fail(ErrorKind::infeasible, "ldp_slope: rate prediction is not feasible");

  SlopeReport rep;
  rep.rate_value = rate_pred.value;
  const bool trivial_tilt = rate_pred.control.values.empty() || rate_pred.control.is_zero();

  for (double eps : eps_list) {
    MCEstimate est = trivial_tilt
                         ? rare_event_mc(model, start, eps, event, n_per_eps, seed, policy)
                         : tilted_mc(model, start, eps, event, rate_pred.control, n_per_eps,
                                     seed, policy);
    rep.estimates.push_back(est);
    if (est.ess < rep.min_ess || est.p_hat <= 0.0) {
      rep.excluded_eps.push_back(eps);
    } else {
      rep.eps_used.push_back(eps);
    }
  }

  std::vector<double> xs, ys, ws;
  for (const auto& est : rep.estimates) {
    if (std::find(rep.eps_used.begin(), rep.eps_used.end(), est.eps) == rep.eps_used.end())
      continue;
    xs.push_back(est.eps);
    ys.push_back(est.eps_log_p);
    double rel = est.stderr_ > 0.0 && est.p_hat > 0.0 ? est.stderr_ / est.p_hat : 1e-6;
    double var = est.eps * est.eps * rel * rel;
    ws.push_back(1.0 / std::max(var, 1e-12));
  }
  if (xs.size() < 2)
    fail(ErrorKind::divergence, "ldp_slope: too few reliable eps points for the fit");
  auto fit = weighted_linear_fit(xs, ys, ws);
  rep.intercept = fit.intercept;
  rep.intercept_stderr = fit.intercept_stderr;
  rep.slope = fit.slope;
  if (rate_pred.value > 0.0)
    rep.rel_discrepancy = std::abs(rep.intercept + rate_pred.value) / rate_pred.value;
  else
    rep.rel_discrepancy = std::abs(rep.intercept);
  return rep;
}

void gauss_hermite_probabilists(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  // Physicists' Gauss-Hermite by Newton iteration on H_n, then transformed to
  // the probabilists' convention: x = sqrt(2) t, w -> w / sqrt(pi).
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double pi_quarter = std::pow(M_PI, -0.25);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z;
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z = nodes[n - 1] - 1.14 * std::pow(n, 0.426) / nodes[n - 1];
    else if (i == 2)
      z = 1.86 * nodes[n - 1] - 0.86 * nodes[n - 2];
    else if (i == 3)
      z = 1.91 * nodes[n - 2] - 0.91 * nodes[n - 3];
    else
      z = 2.0 * nodes[n - i] - nodes[n - i + 1];
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = pi_quarter, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    nodes[n - 1 - i] = z;
    nodes[i] = -z;
    double w = 2.0 / (pp * pp);
    weights[n - 1 - i] = w;
    weights[i] = w;
  }
  double wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    nodes[i] *= std::sqrt(2.0);
    weights[i] /= std::sqrt(M_PI);
    wsum += weights[i];
  }
  // normalize away the residual quadrature drift so E[1] = 1 exactly
  for (int i = 0; i < n; ++i) weights[i] /= wsum;
}

namespace {

double f_eval_increments(const FSpec& f, const std::vector<double>& delta) {
  double raw = 0.0;
  if (f.kind == FSpec::Kind::clipped_linear) {
    for (size_t i = 0; i < delta.size(); ++i) raw += f.coeff[i] * delta[i];
  } else {
    double alpha = f.coeff.empty() ? 1.0 : f.coeff[0];
    for (double d : delta) raw += alpha * d * d;
  }
  return std::clamp(raw, f.clip_lo, f.clip_hi);
}

// E exp(-f(Delta + shift)) with Delta_i ~ N(0, h_inc) by tensor Gauss-Hermite.
double expectation_gh(const FSpec& f, int k, double h_inc, const std::vector<double>& shift,
                      const std::vector<double>& nodes, const std::vector<double>& weights,
                      int level, std::vector<double>& delta, double wacc, double* acc) {
  if (level == k) {
    *acc += wacc * std::exp(-f_eval_increments(f, delta));
    return *acc;
  }
  const double sd = std::sqrt(h_inc);
  for (size_t q = 0; q < nodes.size(); ++q) {
    delta[level] = sd * nodes[q] + shift[level];
    expectation_gh(f, k, h_inc, shift, nodes, weights, level + 1, delta, wacc * weights[q], acc);
  }
  return *acc;
}

}  // namespace

VariationalReport variational_check(const FSpec& f, double T, int k, int64_t n_mc, uint64_t seed) {
  if (k < 1 || k > 6) fail(ErrorKind::config, "variational_check: k must be in 1..6");
  if (f.kind == FSpec::Kind::clipped_linear && static_cast<int>(f.coeff.size()) != k)
    fail(ErrorKind::config, "variational_check: linear spec needs k coefficients");
  const double h_inc = T / k;

  VariationalReport rep;
  std::vector<double> nodes_lhs, weights_lhs;
  gauss_hermite_probabilists(48, nodes_lhs, weights_lhs);
  // Coarser tensor grid inside the optimizer loop; the identity tolerance is
  // 1e-3 and the optimizer calls the objective thousands of times.
  std::vector<double> nodes, weights;
  gauss_hermite_probabilists(k <= 2 ? 48 : (k == 3 ? 24 : 10), nodes, weights);

  std::vector<double> zero_shift(k, 0.0);
  std::vector<double> delta(k, 0.0);

  if (k <= 3) {
    double acc = 0.0;
    expectation_gh(f, k, h_inc, zero_shift, nodes_lhs, weights_lhs, 0, delta, 1.0, &acc);
    rep.lhs = -std::log(acc);
    rep.quadrature_lhs = true;
  } else {
    // Monte Carlo for the higher-dimensional increment space.
    double sum = 0.0, sum_sq = 0.0;
    const double sd = std::sqrt(h_inc);
    for (int64_t i = 0; i < n_mc; ++i) {
      for (int j = 0; j < k; ++j)
        delta[j] = sd * counter_normal(seed, 12, RngPurpose::generic, i * 8 + j, 0);
      double e = std::exp(-f_eval_increments(f, delta));
      sum += e;
      sum_sq += e * e;
    }
    double mean = sum / n_mc;
    double var = (sum_sq - sum * sum / n_mc) / (n_mc - 1);
    rep.lhs = -std::log(mean);
    rep.lhs_stderr = std::sqrt(var / n_mc) / mean;
    rep.quadrature_lhs = false;
  }

  // RHS over deterministic piecewise-constant controls: v adds v_i * h_inc to
  // increment i, costs 1/2 sum v_i^2 h_inc, plus E f(Delta + v h).
  auto mean_f_shifted = [&](const std::vector<double>& shift) {
    double facc = 0.0;
    std::vector<double> dl(k, 0.0);
    const double sd = std::sqrt(h_inc);
    std::function<void(int, double)> rec = [&](int level, double w) {
      if (level == k) {
        facc += w * f_eval_increments(f, dl);
        return;
      }
      for (size_t q = 0; q < nodes.size(); ++q) {
        dl[level] = sd * nodes[q] + shift[level];
        rec(level + 1, w * weights[q]);
      }
    };
    rec(0, 1.0);
    return facc;
  };
  auto objective = [&](const std::vector<double>& v) {
    double cost = 0.0;
    for (double x : v) cost += 0.5 * x * x * h_inc;
    std::vector<double> shift(k);
    for (int j = 0; j < k; ++j) shift[j] = v[j] * h_inc;
    return cost + mean_f_shifted(shift);
  };

  std::vector<std::vector<double>> starts;
  starts.emplace_back(k, 0.0);
  if (f.kind == FSpec::Kind::clipped_linear) {
    std::vector<double> s(k);
    for (int j = 0; j < k; ++j) s[j] = -f.coeff[j];
    starts.push_back(std::move(s));
  }
  std::vector<double> rnd(k);
  for (int j = 0; j < k; ++j)
    rnd[j] = 0.5 * counter_normal(seed, 13, RngPurpose::generic, j, 0);
  starts.push_back(std::move(rnd));

  double best = INFINITY;
  std::vector<double> best_v;
  for (const auto& s : starts) {
    NelderMeadOptions o;
    o.max_evals = 2000;
    auto r = nelder_mead_minimize(objective, s, o);
    if (r.value < best) {
      best = r.value;
      best_v = r.x;
    }
  }
  // Re-evaluate the optimum on the fine grid so the reported bound is sharp.
  {
    std::vector<double> shift(k);
    for (int j = 0; j < k; ++j) shift[j] = best_v[j] * h_inc;
    double cost = 0.0;
    for (double x : best_v) cost += 0.5 * x * x * h_inc;
    std::swap(nodes, nodes_lhs);
    std::swap(weights, weights_lhs);
    best = cost + mean_f_shifted(shift);
    std::swap(nodes, nodes_lhs);
    std::swap(weights, weights_lhs);
  }
  rep.rhs_det = best;
  rep.v_opt = best_v;
  rep.gap = rep.rhs_det - rep.lhs;
  rep.one_sided_ok = rep.lhs <= rep.rhs_det + 1e-3 + 4.0 * rep.lhs_stderr;
  return rep;
}

}  // namespace fadeldp
