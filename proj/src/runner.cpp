#include "fadeldp/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "fadeldp/io.hpp"
#include "fadeldp/ldp.hpp"
#include "fadeldp/pullback.hpp"
#include "fadeldp/rate.hpp"
#include "fadeldp/scenarios.hpp"

namespace fadeldp {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ArtifactSink {
  fs::path dir;
  json manifest_files = json::array();

  void add(const std::string& name, const std::string& content) {
    atomic_write_file(dir / name, content);
    manifest_files.push_back({{"path", name}, {"fnv1a64", fnv1a64_hex(content)}});
  }
};

json estimate_to_json(const MCEstimate& e) {
  json j;
  j["eps"] = e.eps;
  j["n"] = e.n_samples;
  j["p_hat"] = e.p_hat;
  j["stderr"] = e.stderr_;
  j["eps_log_p"] = e.eps_log_p;
  j["p_zero"] = e.p_zero;
  if (e.p_zero) j["p_upper_95"] = e.p_upper;
  j["method"] = e.method;
  j["ess"] = e.ess;
  if (e.method == "tilted") {
    j["mean_weight"] = e.mean_weight;
    j["mean_weight_stderr"] = e.mean_weight_stderr;
    j["log_weight_var"] = e.log_weight_var;
  }
  return j;
}

json report_to_json(const DissipativityReport& r) {
  json j;
  j["lambda1"] = r.lambda1;
  j["lambda2"] = r.lambda2;
  j["lambda3"] = r.lambda3;
  j["mu1_2r"] = r.mu1_2r;
  j["mu2_2r"] = r.mu2_2r;
  j["eps"] = r.eps;
  j["margin"] = r.margin;
  j["lambda_max"] = r.lambda_max;
  j["eps0"] = r.eps0;
  j["stable"] = r.stable;
  j["empirical"] = {{"lambda1", r.emp_lambda1},
                    {"lambda2", r.emp_lambda2},
                    {"lambda3", r.emp_lambda3},
                    {"n_samples", r.n_samples},
                    {"seed", r.seed}};
  return j;
}

json rate_result_to_json(const RateResult& r) {
  json j;
  j["value"] = r.value;
  j["mismatch"] = r.mismatch;
  j["iterations"] = r.iterations;
  j["grad_norm"] = r.grad_norm;
  j["converged"] = r.converged;
  j["feasible"] = r.feasible;
  j["rho_final"] = r.rho_final;
  j["control_energy"] = r.control.energy();
  return j;
}

Segment constant_segment(const RunConfig& cfg, double value, double head_time) {
  return Segment::constant(head_time, cfg.model.d, cfg.mem, value);
}

EventSpec event_from_json(const json& j, const RunConfig& cfg) {
  EventSpec ev;
  std::string kind = get_string(j, "kind", "experiment.event");
  if (kind == "terminal_ball") {
    ev.kind = EventSpec::Kind::terminal_ball;
    if (!j.contains("center") || !j["center"].is_array())
      fail(ErrorKind::config, "config: 'experiment.event.center' must be an array");
    for (const auto& c : j["center"]) ev.center.push_back(c.get<double>());
    ev.radius = get_number(j, "radius", "experiment.event");
  } else if (kind == "terminal_exceed") {
    ev.kind = EventSpec::Kind::terminal_exceed;
    ev.threshold = get_number(j, "threshold", "experiment.event");
  } else {
    fail(ErrorKind::config, "config: unsupported event kind '" + kind + "'");
  }
  ev.T = get_number(j, "T", "experiment.event");
  ev.complemented = j.contains("complemented") && j["complemented"].get<bool>();
  ev.validate(cfg.model.d);
  return ev;
}

RateResult solve_rate_block(const RunConfig& cfg, const json& jr, Segment xi) {
  RateProblem p;
  p.model = &cfg.model;
  p.xi = std::move(xi);
  p.T = get_number(jr, "T", "experiment.rate");
  if (!jr.contains("target") || !jr["target"].is_array())
    fail(ErrorKind::config, "config: 'experiment.rate.target' must be an array");
  for (const auto& c : jr["target"]) p.target_point.push_back(c.get<double>());
  p.control_a = p.xi.head_time;
  p.control_hv = get_number_or(jr, "hv", 0.125);
  p.inner = SimConfig{cfg.mem.h, Scheme::heun, p.xi.head_time, p.T};
  p.seed = cfg.seed;
  return minimize_rate(p);
}

json run_kind(const RunConfig& cfg, ArtifactSink& sink) {
  const std::string& kind = cfg.experiment_kind;
  const json& ex = cfg.experiment;
  json result;
  result["kind"] = kind;

  if (kind == "check-model") {
    double eps = get_number_or(ex, "eps", 0.25);
    int n_samples = static_cast<int>(get_int_or(ex, "n_samples", 200));
    auto rep = dissipativity_report(cfg.model, cfg.mem.r, eps, n_samples, cfg.seed);
    result["report"] = report_to_json(rep);
    return result;
  }

  if (kind == "simulate") {
    double eps = get_number_or(ex, "eps", 0.0);
    double t0 = get_number_or(ex, "t0", 0.0);
    double T = get_number(ex, "T", "experiment");
    double xi0 = get_number_or(ex, "xi", 0.0);
    SimConfig sim{cfg.mem.h, Scheme::euler, t0, T};
    WienerPath W = sample_wiener(std::min(t0, 0.0) - sim.h, std::max(T, sim.h), sim.h,
                                 cfg.model.m, cfg.seed, 0);
    PathOnGrid path = integrate_sfde(cfg.model, constant_segment(cfg, xi0, t0), eps, sim, W);
    sink.add("path.csv", path_to_csv(path));
    std::string fmt = ex.contains("format") ? ex["format"].get<std::string>() : "csv";
    if (fmt == "binary") sink.add("path.bin", path_to_binary(path));
    result["t0"] = t0;
    result["T"] = T;
    result["eps"] = eps;
    result["terminal"] = json::array();
    for (double v : path.state_at(path.steps())) result["terminal"].push_back(v);
    return result;
  }

  if (kind == "pullback") {
    double eps = get_number_or(ex, "eps", 0.25);
    double t_lo = get_number_or(ex, "t_lo", 0.0);
    double t_hi = get_number_or(ex, "t_hi", 1.0);
    double xi0 = get_number_or(ex, "xi", 0.0);
    std::vector<double> n_list;
    if (!ex.contains("n_list") || !ex["n_list"].is_array())
      fail(ErrorKind::config, "config: 'experiment.n_list' must be an array");
    for (const auto& n : ex["n_list"]) n_list.push_back(n.get<double>());
    SimConfig sim{cfg.mem.h, Scheme::euler, 0.0, t_hi};
    auto run = pullback_solve(cfg.model, constant_segment(cfg, xi0, 0.0), eps, t_lo, t_hi,
                              n_list, sim, cfg.seed);
    result["n_list"] = run.n_list;
    result["sup_diffs"] = run.sup_diffs;
    result["fitted_rate"] = run.fitted_rate;
    result["r2"] = run.r2;
    result["terminal_diff"] = run.terminal_diff;
    std::string csv = "n,window_t,diff\n";
    for (size_t i = 0; i + 1 < run.n_list.size(); ++i)
      for (size_t kk = 0; kk < run.diffs[i].size(); ++kk)
        csv += format_double(run.n_list[i]) + "," +
               format_double(run.t_lo + kk * cfg.mem.h) + "," +
               format_double(run.diffs[i][kk]) + "\n";
    sink.add("pullback_diffs.csv", csv);
    sink.add("limit_path.csv", path_to_csv(run.limit_path));
    return result;
  }

  if (kind == "stationarity") {
    double eps = get_number_or(ex, "eps", 0.25);
    double burn = get_number_or(ex, "burn", 10.0);
    int n_replicas = static_cast<int>(get_int_or(ex, "n_replicas", 2000));
    double alpha = get_number_or(ex, "alpha", 0.01);
    std::vector<double> times;
    if (ex.contains("times"))
      for (const auto& t : ex["times"]) times.push_back(t.get<double>());
    else
      times = {0.0, 1.0, 2.0};
    SimConfig sim{cfg.mem.h, Scheme::euler, -burn, times.back()};
    auto rep = stationarity_test(cfg.model, cfg.mem, eps, sim, burn, times, n_replicas, alpha,
                                 cfg.seed);
    result["times"] = rep.times;
    result["mean_norm_sq"] = rep.mean_norm_sq;
    result["ks_pass_fraction"] = rep.ks_pass_fraction;
    result["energy_p_value"] = rep.energy.p_value;
    result["uniform_bound_flat"] = rep.uniform_bound_flat;
    result["certified_diff"] = rep.certified_diff;
    return result;
  }

  if (kind == "rate") {
    double xi0 = get_number_or(ex, "xi", 0.0);
    RateResult r = solve_rate_block(cfg, ex, constant_segment(cfg, xi0, 0.0));
    if (!r.feasible && !(ex.contains("allow_infeasible") && ex["allow_infeasible"].get<bool>()))
      fail(ErrorKind::infeasible,
           "rate: optimizer did not reach the target (mismatch=" + std::to_string(r.mismatch) +
               "); pass allow_infeasible to keep the diagnostics");
    result["rate"] = rate_result_to_json(r);
    sink.add("control.csv", control_to_csv(r.control));
    return result;
  }

  if (kind == "quasipotential") {
    std::vector<double> target;
    for (const auto& c : ex["target"]) target.push_back(c.get<double>());
    std::vector<double> T_list;
    for (const auto& t : ex["T_list"]) T_list.push_back(t.get<double>());
    double depth = get_number_or(ex, "depth", 10.0);
    RateProblem proto;
    proto.control_hv = get_number_or(ex, "hv", 0.25);
    proto.inner = SimConfig{cfg.mem.h, Scheme::heun, 0.0, 1.0};
    proto.seed = cfg.seed;
    auto q = quasipotential(cfg.model, cfg.mem, target, T_list, depth, proto.inner, proto);
    result["feasible"] = q.feasible;
    result["value"] = q.feasible ? json(q.value) : json("infinity");
    result["best_T"] = q.best_T;
    json curve = json::array();
    for (const auto& c : q.curve)
      curve.push_back({{"T", c.T}, {"value", c.value}, {"feasible", c.feasible}});
    result["curve"] = curve;
    std::string csv = "T,value,feasible\n";
    for (const auto& c : q.curve)
      csv += format_double(c.T) + "," + format_double(c.value) + "," +
             (c.feasible ? "1" : "0") + "\n";
    sink.add("quasipotential_curve.csv", csv);
    if (q.feasible) sink.add("control.csv", control_to_csv(q.best.control));
    return result;
  }

  if (kind == "ldp-slope") {
    std::vector<double> eps_list;
    for (const auto& e : ex["eps_list"]) eps_list.push_back(e.get<double>());
    int64_t n_per_eps = get_int_or(ex, "n_per_eps", 2000);
    EventSpec event = event_from_json(ex["event"], cfg);
    double xi0 = get_number_or(ex, "xi", 0.0);
    Segment xi = constant_segment(cfg, xi0, 0.0);
    RateResult pred;
    if (ex.contains("rate")) {
      pred = solve_rate_block(cfg, ex["rate"], xi);
    } else {
      pred.value = 0.0;
      pred.feasible = true;
      pred.control = Control::zero(cfg.model.m);
    }
    StartSpec start;
    start.xi = xi;
    auto rep = ldp_slope(cfg.model, start, event, eps_list, n_per_eps, pred, cfg.seed);
    result["rate_value"] = pred.value;
    result["intercept"] = rep.intercept;
    result["intercept_stderr"] = rep.intercept_stderr;
    result["slope"] = rep.slope;
    result["rel_discrepancy"] = rep.rel_discrepancy;
    result["excluded_eps"] = rep.excluded_eps;
    json ests = json::array();
    for (const auto& e : rep.estimates) ests.push_back(estimate_to_json(e));
    result["estimates"] = ests;
    std::string csv = "eps,p_hat,stderr,eps_log_p\n";
    for (const auto& e : rep.estimates)
      csv += format_double(e.eps) + "," + format_double(e.p_hat) + "," +
             format_double(e.stderr_) + "," + format_double(e.eps_log_p) + "\n";
    sink.add("slope_curve.csv", csv);
    return result;
  }

  if (kind == "variational-check") {
    int64_t n_mc = get_int_or(ex, "n_mc", 1'000'000);
    json cases = json::array();
    bool all_ok = true;
    if (!ex.contains("cases") || !ex["cases"].is_array())
      fail(ErrorKind::config, "config: 'experiment.cases' must be an array");
    for (const auto& c : ex["cases"]) {
      FSpec f;
      std::string fk = get_string(c, "f", "experiment.cases[]");
      f.kind = fk == "clipped_linear" ? FSpec::Kind::clipped_linear
                                      : FSpec::Kind::clipped_quadratic;
      if (c.contains("coeff"))
        for (const auto& x : c["coeff"]) f.coeff.push_back(x.get<double>());
      f.clip_lo = get_number_or(c, "clip_lo", -10.0);
      f.clip_hi = get_number_or(c, "clip_hi", 10.0);
      int k = static_cast<int>(get_int(c, "k", "experiment.cases[]"));
      double T = get_number(c, "T", "experiment.cases[]");
      auto rep = variational_check(f, T, k, n_mc, cfg.seed);
      all_ok = all_ok && rep.one_sided_ok;
      cases.push_back({{"f", fk},
                       {"k", k},
                       {"T", T},
                       {"lhs", rep.lhs},
                       {"rhs_det", rep.rhs_det},
                       {"gap", rep.gap},
                       {"one_sided_ok", rep.one_sided_ok}});
    }
    result["cases"] = cases;
    result["all_ok"] = all_ok;
    return result;
  }

  fail(ErrorKind::config, "config: unknown experiment kind '" + kind + "'");
}

}  // namespace

int run_experiment(const RunOptions& opts) {
  auto t_start = std::chrono::steady_clock::now();
#if defined(_OPENMP)
  if (opts.threads > 0) omp_set_num_threads(opts.threads);
#endif

  RunConfig cfg = RunConfig::parse_file(opts.config_path);
  if (!opts.subcommand.empty() && opts.subcommand != cfg.experiment_kind)
    fail(ErrorKind::config, "subcommand '" + opts.subcommand +
                                "' does not match experiment kind '" + cfg.experiment_kind + "'");
  if (opts.seed_override) {
    cfg.seed = *opts.seed_override;
    cfg.raw["seed"] = *opts.seed_override;
  }
  bool use_cache = cfg.cache && !opts.no_cache;

  ArtifactSink sink;
  sink.dir = opts.out_dir;
  fs::create_directories(sink.dir);

  const std::string hash = cfg.hash();
  fs::path cache_file = sink.dir / "cache" / (hash + ".json");
  bool cache_hit = false;
  json result;
  if (use_cache && fs::exists(cache_file)) {
    result = json::parse(read_file(cache_file));
    cache_hit = true;
    // regenerate CSV artifacts only when the cached result carries them is
    // not supported; cached runs keep the result JSON as the artifact.
  } else {
    result = run_kind(cfg, sink);
    if (use_cache) atomic_write_file(cache_file, result.dump(2));
  }

  sink.add("result.json", result.dump(2) + "\n");

  auto t_end = std::chrono::steady_clock::now();
  json manifest;
  manifest["tool"] = "fadeldp";
  manifest["version"] = kVersion;
  manifest["experiment"] = cfg.experiment_kind;
  manifest["config_hash"] = hash;
  manifest["seed"] = cfg.seed;
  manifest["cache_hit"] = cache_hit;
  manifest["wall_time_s"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(t_end - t_start).count() / 1000.0;
  manifest["artifacts"] = sink.manifest_files;
  atomic_write_file(sink.dir / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

}  // namespace fadeldp
