#include "fadeldp/integrate.hpp"

#include <cmath>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "fadeldp/stats.hpp"

namespace fadeldp {

Control Control::zero(int m) {
  Control c;
  c.m = m;
  c.a = 0.0;
  c.b = 0.0;
  c.hv = 1.0;
  return c;
}

Control Control::from_values(double a, double hv, int m, std::vector<double> values) {
  if (!(hv > 0.0)) fail(ErrorKind::config, "Control: hv must be > 0");
  if (m < 1) fail(ErrorKind::config, "Control: m must be >= 1");
  if (values.size() % m != 0) fail(ErrorKind::config, "Control: values size not a multiple of m");
  for (double x : values)
    if (!std::isfinite(x)) fail(ErrorKind::invalid, "Control: non-finite value");
  Control c;
  c.a = a;
  c.hv = hv;
  c.m = m;
  c.values = std::move(values);
  c.b = a + c.n_intervals() * hv;
  return c;
}

bool Control::is_zero() const {
  for (double x : values)
    if (x != 0.0) return false;
  return true;
}

double Control::energy() const {
  double s = 0.0;
  for (int i = 0; i < n_intervals(); ++i)
    for (int j = 0; j < m; ++j) {
      double v = values[static_cast<size_t>(i) * m + j];
      s += v * v;
    }
  return 0.5 * s * hv;
}

void Control::value_at(double t, std::span<double> out) const {
  for (int j = 0; j < m; ++j) out[j] = 0.0;
  if (values.empty() || t < a - 1e-12 || t >= b - 1e-12) return;
  int i = static_cast<int>(std::floor((t - a) / hv + 1e-9));
  if (i < 0) i = 0;
  if (i >= n_intervals()) return;
  for (int j = 0; j < m; ++j) out[j] = values[static_cast<size_t>(i) * m + j];
}

int SimConfig::steps() const {
  double n = (T - t0) / h;
  long k = std::lround(n);
  if (k < 1 || std::abs(n - k) > 1e-6)
    fail(ErrorKind::config, "SimConfig: T - t0 must be a positive multiple of h");
  return static_cast<int>(k);
}

void require_stable(const CoefficientModel& model, double r, double eps, const char* who) {
  auto rep = dissipativity_analytic(model, r, eps);
  if (!rep.stable)
    fail(ErrorKind::refusal, std::string(who) + ": model not dissipative at eps=" +
                                 std::to_string(eps) + " (margin=" + std::to_string(rep.margin) +
                                 ")");
}

SfdeStepper::SfdeStepper(const CoefficientModel& model, const Segment& xi, double eps,
                         const Control* v, double h, double blowup_ceiling, uint64_t seed,
                         uint64_t stream_id)
    : model_(model),
      v_(v),
      eps_(eps),
      sqrt_eps_(std::sqrt(eps)),
      h_(h),
      ceiling_(blowup_ceiling),
      seed_(seed),
      stream_id_(stream_id),
      seg_(xi),
      dw_(model.m, 0.0),
      vbuf_(model.m, 0.0),
      next_(model.d, 0.0) {
  double pos = xi.head_time / h;
  k_ = std::llround(pos);
  if (std::abs(pos - static_cast<double>(k_)) > 1e-6)
    fail(ErrorKind::config, "SfdeStepper: start time must sit on the absolute h grid");
}

void SfdeStepper::step() {
  const int d = model_.d, m = model_.m;
  Vec drift = eval_drift(model_, seg_);
  Mat sig = eval_diffusion(model_, seg_);

  bool use_v = v_ && !v_->values.empty();
  if (use_v) v_->value_at(time(), vbuf_);

  if (eps_ > 0.0) {
    wiener_increment(h_, m, seed_, stream_id_, 0, k_, dw_);
  } else {
    for (int c = 0; c < m; ++c) dw_[c] = 0.0;
  }

  for (int i = 0; i < d; ++i) {
    double x = seg_.values[i] + drift[i] * h_;
    if (use_v) {
      double sv = 0.0;
      for (int c = 0; c < m; ++c) sv += sig(i, c) * vbuf_[c];
      x += sv * h_;
    }
    if (eps_ > 0.0) {
      double sw = 0.0;
      for (int c = 0; c < m; ++c) sw += sig(i, c) * dw_[c];
      x += sqrt_eps_ * sw;
    }
    next_[i] = x;
  }

  for (int i = 0; i < d; ++i) {
    if (!std::isfinite(next_[i]) || std::abs(next_[i]) > ceiling_)
      fail(ErrorKind::divergence,
           "integration diverged at step " + std::to_string(n_steps_ + 1) + " (t=" +
               std::to_string(time() + h_) + ")");
  }

  if (use_v && eps_ > 0.0) {
    double vd = 0.0, vv = 0.0;
    for (int c = 0; c < m; ++c) {
      vd += vbuf_[c] * dw_[c];
      vv += vbuf_[c] * vbuf_[c];
    }
    vdW_ += vd;
    v_sq_ += vv * h_;
  }

  seg_ = shift_segment(seg_, next_);
  ++k_;
  ++n_steps_;
}

static PathOnGrid run_em(const CoefficientModel& model, const Segment& xi, double eps,
                         const Control* v, const SimConfig& cfg, uint64_t seed,
                         uint64_t stream_id) {
  model.validate();
  if (xi.dim != model.d) fail(ErrorKind::config, "integrate: initial segment dimension mismatch");
  require_stable(model, xi.params.r, eps, "integrate");
  const int n = cfg.steps();
  SfdeStepper st(model, xi, eps, v, cfg.h, cfg.blowup_ceiling, seed, stream_id);
  PathOnGrid path = PathOnGrid::from_initial(xi, cfg.h, n);
  for (int k = 0; k < n; ++k) {
    st.step();
    path.push_state(st.state());
  }
  return path;
}

PathOnGrid integrate_sfde(const CoefficientModel& model, const Segment& xi, double eps,
                          const SimConfig& cfg, const WienerPath& W) {
  if (eps > 0.0 && std::abs(W.h - cfg.h) > 1e-12)
    fail(ErrorKind::config, "integrate_sfde: Wiener grid step must match cfg.h");
  return run_em(model, xi, eps, nullptr, cfg, W.seed, W.stream_id);
}

PathOnGrid integrate_controlled(const CoefficientModel& model, const Segment& xi, double eps,
                                const Control& v, const SimConfig& cfg, const WienerPath& W) {
  if (eps > 0.0 && std::abs(W.h - cfg.h) > 1e-12)
    fail(ErrorKind::config, "integrate_controlled: Wiener grid step must match cfg.h");
  return run_em(model, xi, eps, &v, cfg, W.seed, W.stream_id);
}

PathOnGrid integrate_skeleton(const CoefficientModel& model, const Segment& xi, const Control& v,
                              const SimConfig& cfg) {
  model.validate();
  if (xi.dim != model.d)
    fail(ErrorKind::config, "integrate_skeleton: initial segment dimension mismatch");
  require_stable(model, xi.params.r, 0.0, "integrate_skeleton");
  const int n = cfg.steps();
  const int d = model.d, m = model.m;

  if (cfg.scheme == Scheme::euler) return run_em(model, xi, 0.0, &v, cfg, 0, 0);

  PathOnGrid path = PathOnGrid::from_initial(xi, cfg.h, n);
  Segment seg = xi;
  Vec vbuf(m), vbuf1(m), pred(d), corr(d);
  for (int k = 0; k < n; ++k) {
    double t = seg.head_time;
    Vec f0 = eval_drift(model, seg);
    Mat s0 = eval_diffusion(model, seg);
    v.value_at(t, vbuf);
    for (int i = 0; i < d; ++i) {
      double sv = 0.0;
      for (int c = 0; c < m; ++c) sv += s0(i, c) * vbuf[c];
      f0[i] += sv;
    }
    for (int i = 0; i < d; ++i) pred[i] = seg.values[i] + cfg.h * f0[i];
    Segment seg1 = shift_segment(seg, pred);
    Vec f1 = eval_drift(model, seg1);
    Mat s1 = eval_diffusion(model, seg1);
    v.value_at(t + cfg.h, vbuf1);
    for (int i = 0; i < d; ++i) {
      double sv = 0.0;
      for (int c = 0; c < m; ++c) sv += s1(i, c) * vbuf1[c];
      f1[i] += sv;
    }
    for (int i = 0; i < d; ++i) corr[i] = seg.values[i] + 0.5 * cfg.h * (f0[i] + f1[i]);
    for (int i = 0; i < d; ++i)
      if (!std::isfinite(corr[i]) || std::abs(corr[i]) > cfg.blowup_ceiling)
        fail(ErrorKind::divergence,
             "skeleton integration diverged at step " + std::to_string(k + 1));
    seg = shift_segment(seg, corr);
    path.push_state(corr);
  }
  return path;
}

void for_each_replica(int64_t n, Exec policy, const std::function<void(int64_t)>& fn) {
  if (policy == Exec::serial) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t i = 0; i < n; ++i) fn(i);
#else
  for (int64_t i = 0; i < n; ++i) fn(i);
#endif
}

BoundCheckReport empirical_bounds(const CoefficientModel& model, const Segment& xi1,
                                  const Segment& xi2, double eps, const SimConfig& cfg,
                                  int n_replicas, uint64_t seed, Exec policy) {
  model.validate();
  require_stable(model, xi1.params.r, eps, "empirical_bounds");
  const int n = cfg.steps();
  const int d = model.d;
  auto rep_times = [&](int k) { return cfg.t0 + k * cfg.h; };

  BoundCheckReport out;
  auto analytic = dissipativity_analytic(model, xi1.params.r, eps);
  out.lambda_max = analytic.lambda_max;
  out.degenerate = xi1 == xi2;

  // One norm/diff sample every ~0.1 time units keeps the report compact.
  int stride = std::max(1, static_cast<int>(std::lround(0.1 / cfg.h)));
  std::vector<int> idx;
  for (int k = 0; k <= n; k += stride) idx.push_back(k);
  const int nt = static_cast<int>(idx.size());
  for (int k : idx) out.times.push_back(rep_times(k));

  std::vector<double> acc_state(static_cast<size_t>(n_replicas) * nt);
  std::vector<double> acc_norm(static_cast<size_t>(n_replicas) * nt);
  std::vector<double> acc_diff(static_cast<size_t>(n_replicas) * nt);

  for_each_replica(n_replicas, policy, [&](int64_t rep) {
    SfdeStepper s1(model, xi1, eps, nullptr, cfg.h, cfg.blowup_ceiling, seed,
                   static_cast<uint64_t>(rep));
    SfdeStepper s2(model, xi2, eps, nullptr, cfg.h, cfg.blowup_ceiling, seed,
                   static_cast<uint64_t>(rep));
    int pos = 0;
    for (int k = 0; k <= n; ++k) {
      if (pos < nt && k == idx[pos]) {
        const Segment& a = s1.segment();
        double st = 0.0;
        for (int j = 0; j < d; ++j) st += a.values[j] * a.values[j];
        double nr = cr_norm(a);
        double df = cr_norm(segment_sub(a, s2.segment()));
        acc_state[static_cast<size_t>(rep) * nt + pos] = st;
        acc_norm[static_cast<size_t>(rep) * nt + pos] = nr * nr;
        acc_diff[static_cast<size_t>(rep) * nt + pos] = df * df;
        ++pos;
      }
      if (k < n) {
        s1.step();
        s2.step();
      }
    }
  });

  out.mean_state_sq.assign(nt, 0.0);
  out.mean_norm_sq.assign(nt, 0.0);
  out.mean_diff_sq.assign(nt, 0.0);
  for (int rep = 0; rep < n_replicas; ++rep)
    for (int t = 0; t < nt; ++t) {
      out.mean_state_sq[t] += acc_state[static_cast<size_t>(rep) * nt + t];
      out.mean_norm_sq[t] += acc_norm[static_cast<size_t>(rep) * nt + t];
      out.mean_diff_sq[t] += acc_diff[static_cast<size_t>(rep) * nt + t];
    }
  for (int t = 0; t < nt; ++t) {
    out.mean_state_sq[t] /= n_replicas;
    out.mean_norm_sq[t] /= n_replicas;
    out.mean_diff_sq[t] /= n_replicas;
  }

  if (!out.degenerate) {
    std::vector<double> ts, ys;
    for (int t = 0; t < nt; ++t) {
      if (out.mean_diff_sq[t] > 1e-280) {
        ts.push_back(out.times[t]);
        ys.push_back(std::log(out.mean_diff_sq[t]));
      }
    }
    if (ts.size() >= 3) {
      auto fit = linear_fit(ts, ys);
      out.fitted_rate = -fit.slope;
      out.r2 = fit.r2;
    }
  }
  return out;
}

}  // namespace fadeldp
