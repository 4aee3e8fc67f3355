#include "fadeldp/model.hpp"

#include <cmath>

#include "fadeldp/rng.hpp"

namespace fadeldp {

Nonlinearity nonlinearity_from_string(const std::string& s) {
  if (s == "zero") return Nonlinearity::zero;
  if (s == "tanh") return Nonlinearity::tanh_sat;
  if (s == "satcubic") return Nonlinearity::cubic_sat;
  fail(ErrorKind::config, "unknown nonlinearity '" + s + "' (zero|tanh|satcubic)");
}

std::string nonlinearity_to_string(Nonlinearity f) {
  switch (f) {
    case Nonlinearity::zero: return "zero";
    case Nonlinearity::tanh_sat: return "tanh";
    case Nonlinearity::cubic_sat: return "satcubic";
  }
  return "zero";
}

void CoefficientModel::validate() const {
  if (d < 1 || m < 1) fail(ErrorKind::config, "model: dimensions must be >= 1");
  if (d > 64 || m > 64) fail(ErrorKind::config, "model: dimensions too large");
  if (A.rows != d || A.cols != d) fail(ErrorKind::config, "model: A must be d x d");
  if (B.rows != d || B.cols != d) fail(ErrorKind::config, "model: B must be d x d");
  if (sigma0.rows != d || sigma0.cols != m) fail(ErrorKind::config, "model: Sigma0 must be d x m");
  if (!sigma1.empty()) {
    if (static_cast<int>(sigma1.size()) != d)
      fail(ErrorKind::config, "model: Sigma1 needs d component matrices");
    for (const auto& c : sigma1)
      if (c.rows != d || c.cols != m) fail(ErrorKind::config, "model: Sigma1 blocks must be d x m");
  }
  if (f_scale < 0.0) fail(ErrorKind::config, "model: f scale must be >= 0");
  mu1.validate();
  mu2.validate();
}

void CoefficientModel::f_eval(std::span<const double> x, std::span<double> out) const {
  switch (f_kind) {
    case Nonlinearity::zero:
      for (int j = 0; j < d; ++j) out[j] = 0.0;
      return;
    case Nonlinearity::tanh_sat:
      for (int j = 0; j < d; ++j) out[j] = f_scale * std::tanh(x[j]);
      return;
    case Nonlinearity::cubic_sat:
      // odd, decreasing, bounded by f_scale: -s x^3 (1+x^2)^{-3/2}
      for (int j = 0; j < d; ++j) {
        double u = x[j] / std::sqrt(1.0 + x[j] * x[j]);
        out[j] = -f_scale * u * u * u;
      }
      return;
  }
}

double CoefficientModel::f_lipschitz() const {
  switch (f_kind) {
    case Nonlinearity::zero: return 0.0;
    case Nonlinearity::tanh_sat: return f_scale;
    case Nonlinearity::cubic_sat:
      // sup |f'| = 3 s max_w w (1+w)^{-5/2} at w = 2/3
      return f_scale * 2.0 * std::pow(5.0 / 3.0, -2.5);
  }
  return 0.0;
}

double CoefficientModel::f_one_sided() const {
  switch (f_kind) {
    case Nonlinearity::zero: return 0.0;
    case Nonlinearity::tanh_sat: return f_scale;   // increasing, sup f' = s
    case Nonlinearity::cubic_sat: return 0.0;      // decreasing: (x-y)(f(x)-f(y)) <= 0
  }
  return 0.0;
}

bool CoefficientModel::B_is_zero() const {
  for (double v : B.a)
    if (v != 0.0) return false;
  return true;
}

bool CoefficientModel::sigma1_is_zero() const {
  for (const auto& c : sigma1)
    for (double v : c.a)
      if (v != 0.0) return false;
  return true;
}

double CoefficientModel::lambda1() const {
  return sym_min_eigenvalue(A) - 0.5 * spectral_norm(B) - f_one_sided();
}

double CoefficientModel::lambda2() const { return 0.5 * spectral_norm(B); }

double CoefficientModel::lambda3() const {
  if (sigma1.empty() || sigma1_is_zero()) return 0.0;
  // Operator norm of u -> sum_k u_k C_k as a map (R^d, |.|) -> (R^{dxm}, Frobenius):
  // the flattening matrix has column k = vec(C_k).
  Mat flat(d * m, d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < m; ++j) flat(i * m + j, k) = sigma1[k](i, j);
  double s = spectral_norm(flat);
  return s * s;
}

double CoefficientModel::h1_constant(double r) const {
  return spectral_norm(A) + spectral_norm(B) * std::sqrt(measure_moment(mu1, 2.0 * r)) +
         f_lipschitz();
}

std::vector<double> eval_drift(const CoefficientModel& model, const Segment& seg) {
  if (seg.dim != model.d) fail(ErrorKind::invalid, "eval_drift: dimension mismatch");
  auto head = seg.head();
  Vec x(head.begin(), head.end());
  Vec out = matvec(model.A, x);
  for (double& v : out) v = -v;
  if (!model.B_is_zero()) {
    Vec integral = delay_integral(seg, model.mu1);
    Vec bi = matvec(model.B, integral);
    for (int j = 0; j < model.d; ++j) out[j] += bi[j];
  }
  if (model.f_kind != Nonlinearity::zero) {
    Vec f(model.d);
    model.f_eval(x, f);
    for (int j = 0; j < model.d; ++j) out[j] += f[j];
  }
  for (double v : out)
    if (!std::isfinite(v)) fail(ErrorKind::divergence, "eval_drift: non-finite drift");
  return out;
}

Mat eval_diffusion(const CoefficientModel& model, const Segment& seg) {
  if (seg.dim != model.d) fail(ErrorKind::invalid, "eval_diffusion: dimension mismatch");
  Mat s = model.sigma0;
  if (!model.sigma1.empty() && !model.sigma1_is_zero()) {
    Vec integral = delay_integral(seg, model.mu2);
    for (int k = 0; k < model.d; ++k) {
      if (integral[k] == 0.0) continue;
      for (size_t i = 0; i < s.a.size(); ++i) s.a[i] += integral[k] * model.sigma1[k].a[i];
    }
  }
  return s;
}

DissipativityReport dissipativity_analytic(const CoefficientModel& model, double r, double eps) {
  DissipativityReport rep;
  rep.lambda1 = model.lambda1();
  rep.lambda2 = model.lambda2();
  rep.lambda3 = model.lambda3();
  rep.mu1_2r = measure_moment(model.mu1, 2.0 * r);
  rep.mu2_2r = measure_moment(model.mu2, 2.0 * r);
  rep.eps = eps;
  rep.margin = 2.0 * rep.lambda1 - 2.0 * rep.lambda2 * rep.mu1_2r - eps * rep.lambda3 * rep.mu2_2r;
  rep.lambda_max = std::min(rep.margin, 2.0 * r);
  double num = 2.0 * rep.lambda1 - 2.0 * rep.lambda2 * rep.mu1_2r;
  double den = rep.lambda3 * rep.mu2_2r;
  rep.eps0 = den > 0.0 ? std::min(num / den - 1.0, 1.0) : 1.0;
  rep.stable = rep.margin > 0.0;
  return rep;
}

Segment sample_segment(int dim, const MemoryParams& params, uint64_t seed, uint64_t stream,
                       int64_t index, double amplitude) {
  const int K = params.lag_count();
  std::vector<double> vals(static_cast<size_t>(K) * dim);
  // AR(1)-smoothed noise from the counter stream; bounded and smooth-ish.
  const double rho = 0.95;
  const double innov = amplitude * std::sqrt(1.0 - rho * rho);
  for (int j = 0; j < dim; ++j) {
    double x = amplitude * counter_normal(seed, stream, RngPurpose::report_sampling,
                                          index * 100'000, static_cast<uint32_t>(j));
    for (int k = 0; k < K; ++k) {
      vals[static_cast<size_t>(k) * dim + j] = x;
      double z = counter_normal(seed, stream, RngPurpose::report_sampling,
                                index * 100'000 + k + 1, static_cast<uint32_t>(j));
      x = rho * x + innov * z;
    }
  }
  return Segment::from_values(0.0, dim, params, std::move(vals), std::vector<double>(dim, 0.0));
}

DissipativityReport dissipativity_report(const CoefficientModel& model, double r, double eps,
                                         int n_samples, uint64_t seed) {
  if (n_samples < 1) fail(ErrorKind::config, "dissipativity_report: n_samples must be >= 1");
  DissipativityReport rep = dissipativity_analytic(model, r, eps);
  rep.n_samples = n_samples;
  rep.seed = seed;

  MemoryParams params{r, 0.05, 4.0, 1e-6};
  // Sharper lags if the measures carry structure finer than the default grid.
  double deepest = std::min(model.mu1.deepest_atom(), model.mu2.deepest_atom());
  if (deepest < 0.0) {
    double step = std::min(0.05, -deepest / 4.0);
    double L = std::max(4.0, -deepest * 2.0);
    params.h = step;
    params.L = std::ceil(L / step) * step;
  }

  double emp_l1 = INFINITY, emp_l2 = 0.0, emp_l3 = 0.0;
  bool l1_seen = false, l2_seen = false, l3_seen = false;
  for (int i = 0; i < n_samples; ++i) {
    Segment a = sample_segment(model.d, params, seed, 1, 2 * i);
    Segment b = sample_segment(model.d, params, seed, 1, 2 * i + 1);
    Segment diff = segment_sub(a, b);
    auto d0 = diff.head();
    double d0sq = 0.0;
    for (double v : d0) d0sq += v * v;

    Vec ba = eval_drift(model, a), bb = eval_drift(model, b);
    double inner = 0.0;
    for (int j = 0; j < model.d; ++j) inner += d0[j] * (ba[j] - bb[j]);
    double i1 = delay_integral_sq(diff, model.mu1);
    double i2 = delay_integral_sq(diff, model.mu2);

    if (d0sq > 1e-12) {
      // largest l1 with  inner <= -l1 |d0|^2 + lambda2 * i1
      emp_l1 = std::min(emp_l1, (rep.lambda2 * i1 - inner) / d0sq);
      l1_seen = true;
    }
    if (i1 > 1e-12) {
      emp_l2 = std::max(emp_l2, (inner + rep.lambda1 * d0sq) / i1);
      l2_seen = true;
    }
    if (i2 > 1e-12) {
      Mat sa = eval_diffusion(model, a), sb = eval_diffusion(model, b);
      double fr = 0.0;
      for (size_t t = 0; t < sa.a.size(); ++t) {
        double dd = sa.a[t] - sb.a[t];
        fr += dd * dd;
      }
      emp_l3 = std::max(emp_l3, fr / i2);
      l3_seen = true;
    }
  }
  rep.emp_lambda1 = l1_seen ? emp_l1 : rep.lambda1;
  rep.emp_lambda2 = l2_seen ? emp_l2 : 0.0;
  rep.emp_lambda3 = l3_seen ? emp_l3 : 0.0;
  return rep;
}

}  // namespace fadeldp
