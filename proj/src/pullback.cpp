#include "fadeldp/pullback.hpp"

#include <cmath>

#include "fadeldp/rng.hpp"

namespace fadeldp {

namespace {

// Integrate from -n to t_hi on the shared stream and return the path
// restricted to [t_lo - L, t_hi] bookkeeping (full path kept; windows are
// short in practice).
PathOnGrid run_from(const CoefficientModel& model, const Segment& xi, double eps,
                    const Control* v, double start, double t_hi, const SimConfig& proto,
                    uint64_t seed, uint64_t stream_id) {
  SimConfig cfg = proto;
  cfg.t0 = start;
  cfg.T = t_hi;
  const int n = cfg.steps();
  SfdeStepper st(model, with_head_time(xi, start), eps, v, cfg.h, cfg.blowup_ceiling, seed,
                 stream_id);
  PathOnGrid path = PathOnGrid::from_initial(with_head_time(xi, start), cfg.h, n);
  for (int k = 0; k < n; ++k) {
    st.step();
    path.push_state(st.state());
  }
  return path;
}

}  // namespace

PullbackRun pullback_solve(const CoefficientModel& model, const Segment& xi, double eps,
                           double t_lo, double t_hi, const std::vector<double>& n_list,
                           const SimConfig& cfg, uint64_t seed, uint64_t stream_id) {
  model.validate();
  require_stable(model, xi.params.r, eps, "pullback_solve");
  if (n_list.size() < 2) fail(ErrorKind::config, "pullback_solve: need at least two starts");
  for (size_t i = 1; i < n_list.size(); ++i)
    if (!(n_list[i] > n_list[i - 1]))
      fail(ErrorKind::config, "pullback_solve: n_list must be strictly increasing");
  if (-n_list.front() > t_lo)
    fail(ErrorKind::config, "pullback_solve: min(n_list) must reach the window");

  PullbackRun out;
  out.n_list = n_list;
  out.t_lo = t_lo;
  out.t_hi = t_hi;

  std::vector<PathOnGrid> paths;
  paths.reserve(n_list.size());
  for (double n : n_list) {
    try {
      paths.push_back(run_from(model, xi, eps, nullptr, -n, t_hi, cfg, seed, stream_id));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::divergence)
        fail(ErrorKind::divergence,
             "pullback_solve: run from -" + std::to_string(n) + " diverged: " + e.what());
      throw;
    }
  }

  const int i0 = paths[0].index_of(t_lo), i1 = paths[0].index_of(t_hi);
  for (size_t i = 0; i + 1 < paths.size(); ++i) {
    std::vector<double> row;
    double sup = 0.0;
    for (int k = i0; k <= i1; ++k) {
      double t = t_lo + (k - i0) * cfg.h;
      double d = cr_norm(segment_sub(paths[i].segment_at(t), paths[i + 1].segment_at(t)));
      row.push_back(d);
      sup = std::max(sup, d);
    }
    out.diffs.push_back(std::move(row));
    out.sup_diffs.push_back(sup);
  }
  out.terminal_diff = out.sup_diffs.back();

  std::vector<double> ns, logs;
  for (size_t i = 0; i + 1 < n_list.size(); ++i) {
    if (out.sup_diffs[i] > 1e-290) {
      ns.push_back(n_list[i]);
      logs.push_back(std::log(out.sup_diffs[i]));
    }
  }
  if (ns.size() >= 2) {
    auto fit = linear_fit(ns, logs);
    out.fitted_rate = -fit.slope;
    out.r2 = fit.r2;
  }

  // Limit path: deepest run restricted to the window.
  const PathOnGrid& deep = paths.back();
  PathOnGrid lim = PathOnGrid::from_initial(deep.segment_at(t_lo), cfg.h,
                                            deep.index_of(t_hi) - deep.index_of(t_lo));
  for (int k = deep.index_of(t_lo) + 1; k <= deep.index_of(t_hi); ++k)
    lim.push_state(deep.state_at(k));
  out.limit_path = std::move(lim);
  return out;
}

SkeletonPullbackRun skeleton_pullback(const CoefficientModel& model, const Segment& xi,
                                      const Control& v, double t_lo, double t_hi,
                                      const std::vector<double>& n_list, const SimConfig& cfg,
                                      int n_residual_triples, uint64_t seed) {
  model.validate();
  require_stable(model, xi.params.r, 0.0, "skeleton_pullback");
  if (n_list.size() < 2) fail(ErrorKind::config, "skeleton_pullback: need at least two starts");

  SkeletonPullbackRun out;
  out.run.n_list = n_list;
  out.run.t_lo = t_lo;
  out.run.t_hi = t_hi;

  std::vector<PathOnGrid> paths;
  for (double n : n_list) {
    SimConfig c = cfg;
    c.t0 = -n;
    c.T = t_hi;
    paths.push_back(integrate_skeleton(model, with_head_time(xi, -n), v, c));
  }
  const int i0 = paths[0].index_of(t_lo), i1 = paths[0].index_of(t_hi);
  for (size_t i = 0; i + 1 < paths.size(); ++i) {
    std::vector<double> row;
    double sup = 0.0;
    for (int k = i0; k <= i1; ++k) {
      double t = t_lo + (k - i0) * cfg.h;
      double d = cr_norm(segment_sub(paths[i].segment_at(t), paths[i + 1].segment_at(t)));
      row.push_back(d);
      sup = std::max(sup, d);
    }
    out.run.diffs.push_back(std::move(row));
    out.run.sup_diffs.push_back(sup);
  }
  out.run.terminal_diff = out.run.sup_diffs.back();
  std::vector<double> ns, logs;
  for (size_t i = 0; i + 1 < n_list.size(); ++i)
    if (out.run.sup_diffs[i] > 1e-290) {
      ns.push_back(n_list[i]);
      logs.push_back(std::log(out.run.sup_diffs[i]));
    }
  if (ns.size() >= 2) {
    auto fit = linear_fit(ns, logs);
    out.run.fitted_rate = -fit.slope;
    out.run.r2 = fit.r2;
  }

  const PathOnGrid& deep = paths.back();
  PathOnGrid lim = PathOnGrid::from_initial(deep.segment_at(t_lo), cfg.h,
                                            deep.index_of(t_hi) - deep.index_of(t_lo));
  for (int k = deep.index_of(t_lo) + 1; k <= deep.index_of(t_hi); ++k)
    lim.push_state(deep.state_at(k));
  out.run.limit_path = std::move(lim);
  out.limit_segment = out.run.limit_path.segment_at(t_lo);

  // Integrated-form residual of the limit path on random grid triples
  //   Phi(t2)(tau) - Phi(t1)(tau) - int b - int sigma v over [t1+tau, t2+tau],
  // with the integrals by composite trapezoid on the grid values.
  const PathOnGrid& lp = out.run.limit_path;
  const int d = model.d, m = model.m;
  std::vector<double> integrand(static_cast<size_t>(lp.steps() + 1) * d);
  std::vector<double> vbuf(m);
  for (int k = 0; k <= lp.steps(); ++k) {
    double t = lp.t0 + k * lp.h;
    Segment seg = lp.segment_at(t);
    Vec f = eval_drift(model, seg);
    Mat s = eval_diffusion(model, seg);
    v.value_at(t, vbuf);
    for (int i = 0; i < d; ++i) {
      double sv = 0.0;
      for (int c = 0; c < m; ++c) sv += s(i, c) * vbuf[c];
      integrand[static_cast<size_t>(k) * d + i] = f[i] + sv;
    }
  }
  auto trap = [&](int ka, int kb, int i) {
    double s = 0.0;
    for (int k = ka; k < kb; ++k)
      s += 0.5 * (integrand[static_cast<size_t>(k) * d + i] +
                  integrand[static_cast<size_t>(k + 1) * d + i]);
    return s * lp.h;
  };
  const int n_grid = lp.steps();
  double max_res = 0.0;
  for (int trial = 0; trial < n_residual_triples; ++trial) {
    int ia = static_cast<int>(counter_u64(seed, 11, RngPurpose::generic, trial, 0) %
                              static_cast<uint64_t>(n_grid));
    int ib = static_cast<int>(counter_u64(seed, 11, RngPurpose::generic, trial, 1) %
                              static_cast<uint64_t>(n_grid));
    if (ia > ib) std::swap(ia, ib);
    if (ia == ib) continue;
    // tau chosen so that t1 + tau stays inside the recorded path
    int max_tau_steps = ia;
    int itau = max_tau_steps == 0
                   ? 0
                   : static_cast<int>(counter_u64(seed, 11, RngPurpose::generic, trial, 2) %
                                      static_cast<uint64_t>(max_tau_steps + 1));
    int ka = ia - itau, kb = ib - itau;
    for (int i = 0; i < d; ++i) {
      double lhs = lp.state_at(kb)[i] - lp.state_at(ka)[i];
      double res = std::abs(lhs - trap(ka, kb, i));
      max_res = std::max(max_res, res);
    }
  }
  out.max_eq_residual = max_res;
  return out;
}

UniformPullbackReport controlled_pullback_uniform(const CoefficientModel& model, const Segment& xi,
                                                  const std::vector<double>& eps_list,
                                                  const Control& v, double t_lo, double t_hi,
                                                  const std::vector<double>& n_list,
                                                  const SimConfig& cfg, int n_replicas,
                                                  uint64_t seed, Exec policy) {
  model.validate();
  UniformPullbackReport rep;
  rep.eps_list = eps_list;
  double r = xi.params.r;
  for (double eps : eps_list) {
    auto an = dissipativity_analytic(model, r, eps);
    if (eps > an.eps0 && an.eps0 < 1.0)
      fail(ErrorKind::refusal, "controlled_pullback_uniform: eps above the admissible eps0");
    require_stable(model, r, eps, "controlled_pullback_uniform");
    rep.lambda_max = an.lambda_max;  // reported for the largest eps checked last
  }

  const size_t n_pairs = n_list.size() - 1;
  for (double eps : eps_list) {
    if (eps == 0.0) {
      auto sk = skeleton_pullback(model, xi, v, t_lo, t_hi, n_list, cfg);
      std::vector<double> ns, logs;
      for (size_t i = 0; i < n_pairs; ++i)
        if (sk.run.sup_diffs[i] > 1e-290) {
          ns.push_back(n_list[i]);
          logs.push_back(std::log(sk.run.sup_diffs[i] * sk.run.sup_diffs[i]));
        }
      auto fit = linear_fit(ns, logs);
      rep.rates.push_back(-fit.slope);
      rep.r2s.push_back(fit.r2);
      continue;
    }
    // Mean over replicas of squared sup-window diffs, then fit the decay.
    std::vector<double> acc(static_cast<size_t>(n_replicas) * n_pairs, 0.0);
    for_each_replica(n_replicas, policy, [&](int64_t repi) {
      std::vector<PathOnGrid> paths;
      for (double n : n_list)
        paths.push_back(run_from(model, xi, eps, &v, -n, t_hi, cfg, seed,
                                 static_cast<uint64_t>(repi)));
      const int i0 = paths[0].index_of(t_lo), i1 = paths[0].index_of(t_hi);
      for (size_t i = 0; i < n_pairs; ++i) {
        double sup = 0.0;
        for (int k = i0; k <= i1; ++k) {
          double t = t_lo + (k - i0) * cfg.h;
          double d = cr_norm(segment_sub(paths[i].segment_at(t), paths[i + 1].segment_at(t)));
          sup = std::max(sup, d);
        }
        acc[static_cast<size_t>(repi) * n_pairs + i] = sup * sup;
      }
    });
    std::vector<double> mean_sq(n_pairs, 0.0);
    for (int repi = 0; repi < n_replicas; ++repi)
      for (size_t i = 0; i < n_pairs; ++i)
        mean_sq[i] += acc[static_cast<size_t>(repi) * n_pairs + i];
    for (double& v2 : mean_sq) v2 /= n_replicas;
    std::vector<double> ns, logs;
    for (size_t i = 0; i < n_pairs; ++i)
      if (mean_sq[i] > 1e-290) {
        ns.push_back(n_list[i]);
        logs.push_back(std::log(mean_sq[i]));
      }
    auto fit = linear_fit(ns, logs);
    rep.rates.push_back(-fit.slope);
    rep.r2s.push_back(fit.r2);
  }
  rep.min_rate = *std::min_element(rep.rates.begin(), rep.rates.end());
  return rep;
}

StationarityReport stationarity_test(const CoefficientModel& model, const MemoryParams& mem,
                                     double eps, const SimConfig& cfg, double n_burn,
                                     const std::vector<double>& times, int n_replicas,
                                     double alpha, uint64_t seed, Exec policy) {
  model.validate();
  if (n_replicas < 100)
    fail(ErrorKind::config, "stationarity_test: need at least 100 replicas");
  if (times.size() < 2) fail(ErrorKind::config, "stationarity_test: need >= 2 test times");
  if (std::abs(mem.h - cfg.h) > 1e-12)
    fail(ErrorKind::config, "stationarity_test: memory grid step must equal cfg.h");
  require_stable(model, mem.r, eps, "stationarity_test");

  StationarityReport rep;
  rep.burn_in = n_burn;
  rep.times = times;
  rep.dim = model.d;

  // Certify the burn-in with a cheap pull-back run on one noise path.
  {
    std::vector<double> nl{n_burn / 2, n_burn};
    SimConfig c = cfg;
    Segment xi0 = Segment::constant(0.0, model.d, mem, 0.0);
    auto pb = pullback_solve(model, xi0, eps, 0.0,
                             std::min(1.0, times.back() - times.front() + cfg.h), nl, c, seed,
                             999'999);
    rep.certified_diff = pb.terminal_diff;
  }

  const double t_last = times.back();
  const int d = model.d;
  const int nt = static_cast<int>(times.size());
  Segment xi0 = Segment::constant(-n_burn, d, mem, 0.0);

  const int seg_keep = std::min(n_replicas, 256);  // stored segments for the energy test
  const int K = mem.lag_count();
  std::vector<double> marg(static_cast<size_t>(n_replicas) * nt * d);
  std::vector<double> norms(static_cast<size_t>(n_replicas) * nt);
  std::vector<double> segs_first(static_cast<size_t>(seg_keep) * K, 0.0);
  std::vector<double> segs_last(static_cast<size_t>(seg_keep) * K, 0.0);

  for_each_replica(n_replicas, policy, [&](int64_t repi) {
    SfdeStepper st(model, xi0, eps, nullptr, cfg.h, cfg.blowup_ceiling, seed,
                   static_cast<uint64_t>(repi));
    int ti = 0;
    int64_t total = std::llround((t_last + n_burn) / cfg.h);
    for (int64_t k = 0; k <= total; ++k) {
      double t = -n_burn + k * cfg.h;
      if (ti < nt && std::abs(t - times[ti]) < cfg.h / 2) {
        const Segment& s = st.segment();
        for (int j = 0; j < d; ++j)
          marg[(static_cast<size_t>(repi) * nt + ti) * d + j] = s.values[j];
        double nr = cr_norm(s);
        norms[static_cast<size_t>(repi) * nt + ti] = nr * nr;
        if (repi < seg_keep && d >= 1) {
          // store the r-weighted first coordinate profile as the energy-test feature
          if (ti == 0)
            for (int kk = 0; kk < K; ++kk)
              segs_first[static_cast<size_t>(repi) * K + kk] =
                  std::exp(-mem.r * kk * mem.h) * s.values[static_cast<size_t>(kk) * d];
          if (ti == nt - 1)
            for (int kk = 0; kk < K; ++kk)
              segs_last[static_cast<size_t>(repi) * K + kk] =
                  std::exp(-mem.r * kk * mem.h) * s.values[static_cast<size_t>(kk) * d];
        }
        ++ti;
      }
      if (k < total) st.step();
    }
  });

  // Marginals per time/coordinate.
  rep.marginals.assign(nt, std::vector<std::vector<double>>(d));
  for (int t = 0; t < nt; ++t)
    for (int j = 0; j < d; ++j) {
      auto& dst = rep.marginals[t][j];
      dst.resize(n_replicas);
      for (int repi = 0; repi < n_replicas; ++repi)
        dst[repi] = marg[(static_cast<size_t>(repi) * nt + t) * d + j];
    }
  rep.mean_norm_sq.assign(nt, 0.0);
  for (int t = 0; t < nt; ++t) {
    for (int repi = 0; repi < n_replicas; ++repi)
      rep.mean_norm_sq[t] += norms[static_cast<size_t>(repi) * nt + t];
    rep.mean_norm_sq[t] /= n_replicas;
  }

  int n_pass = 0, n_tests = 0;
  for (int t1 = 0; t1 < nt; ++t1)
    for (int t2 = t1 + 1; t2 < nt; ++t2)
      for (int j = 0; j < d; ++j) {
        StationarityReport::PairKs pk;
        pk.t1 = t1;
        pk.t2 = t2;
        pk.coord = j;
        pk.ks = ks_two_sample(rep.marginals[t1][j], rep.marginals[t2][j], alpha);
        n_tests += 1;
        n_pass += pk.ks.reject ? 0 : 1;
        rep.pair_ks.push_back(pk);
      }
  rep.ks_pass_fraction = n_tests > 0 ? static_cast<double>(n_pass) / n_tests : 1.0;

  rep.energy = energy_distance_test(segs_first, segs_last, K, 120, alpha, seed ^ 0x5eed);

  if (nt >= 3) {
    rep.norm_slope = linear_fit(rep.times, rep.mean_norm_sq);
    double ci = 2.0 * rep.norm_slope.slope_stderr;
    rep.uniform_bound_flat = std::abs(rep.norm_slope.slope) <= std::max(ci, 1e-12);
  }
  return rep;
}

}  // namespace fadeldp
