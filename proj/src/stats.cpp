#include "fadeldp/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fadeldp/errors.hpp"
#include "fadeldp/rng.hpp"

namespace fadeldp {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_cdf_param(double x, double mean, double sd) {
  return normal_cdf((x - mean) / sd);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> w(x.size(), 1.0);
  return weighted_linear_fit(x, y, w);
}

LinearFit weighted_linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& w) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n || w.size() != n)
    fail(ErrorKind::invalid, "linear_fit: need >= 2 points with matching weights");
  double sw = 0, sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  LinearFit f;
  if (sxx <= 0) fail(ErrorKind::invalid, "linear_fit: degenerate abscissae");
  f.slope = sxy / sxx;
  f.intercept = ybar - f.slope * xbar;
  double ss_res = 0, ss_tot = 0;
  for (size_t i = 0; i < n; ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += w[i] * e * e;
    ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  if (n > 2) {
    double s2 = ss_res / (static_cast<double>(n) - 2.0);
    f.slope_stderr = std::sqrt(s2 / sxx);
    f.intercept_stderr = std::sqrt(s2 * (1.0 / sw + xbar * xbar / sxx));
  }
  return f;
}

MeanVar mean_var(const std::vector<double>& x) {
  MeanVar mv;
  mv.n = static_cast<int64_t>(x.size());
  if (mv.n == 0) return mv;
  double s = 0;
  for (double v : x) s += v;
  mv.mean = s / mv.n;
  if (mv.n > 1) {
    double q = 0;
    for (double v : x) q += (v - mv.mean) * (v - mv.mean);
    mv.var = q / (mv.n - 1);
    mv.stderr_ = std::sqrt(mv.var / mv.n);
  }
  return mv;
}

double kolmogorov_cdf(double lambda) {
  if (lambda <= 0.0) return 0.0;
  double s = 0.0;
  for (int k = 1; k <= 200; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::max(0.0, 1.0 - 2.0 * s);
}

KsResult ks_test_against_cdf(std::vector<double> samples, double (*cdf)(double, double, double),
                             double p1, double p2, double alpha) {
  const size_t n = samples.size();
  if (n == 0) fail(ErrorKind::invalid, "ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double f = cdf(samples[i], p1, p2);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  KsResult r;
  r.statistic = d;
  r.p_value = 1.0 - kolmogorov_cdf(std::sqrt(static_cast<double>(n)) * d);
  r.reject = r.p_value < alpha;
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha) {
  if (a.empty() || b.empty()) fail(ErrorKind::invalid, "ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  double ne = std::sqrt(na * nb / (na + nb));
  r.p_value = 1.0 - kolmogorov_cdf(ne * d);
  r.reject = r.p_value < alpha;
  return r;
}

EnergyResult energy_distance_test(const std::vector<double>& a, const std::vector<double>& b,
                                  int dim, int n_permutations, double alpha, uint64_t seed) {
  const int na = static_cast<int>(a.size()) / dim;
  const int nb = static_cast<int>(b.size()) / dim;
  if (na < 2 || nb < 2) fail(ErrorKind::invalid, "energy_distance: need >= 2 points per sample");
  const int n = na + nb;
  std::vector<double> pool;
  pool.reserve(a.size() + b.size());
  pool.insert(pool.end(), a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());

  std::vector<double> dist(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double s = 0.0;
      const double* pi = pool.data() + static_cast<size_t>(i) * dim;
      const double* pj = pool.data() + static_cast<size_t>(j) * dim;
      for (int k = 0; k < dim; ++k) {
        double dd = pi[k] - pj[k];
        s += dd * dd;
      }
      double e = std::sqrt(s);
      dist[static_cast<size_t>(i) * n + j] = e;
      dist[static_cast<size_t>(j) * n + i] = e;
    }

  auto energy_stat = [&](const std::vector<int>& labels) {
    double sab = 0, saa = 0, sbb = 0;
    int ca = 0, cb = 0;
    for (int i = 0; i < n; ++i)
      (labels[i] == 0 ? ca : cb) += 1;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double e = dist[static_cast<size_t>(i) * n + j];
        if (labels[i] == labels[j]) {
          (labels[i] == 0 ? saa : sbb) += e;
        } else {
          sab += e;
        }
      }
    double ab = sab / (static_cast<double>(ca) * cb);
    double aa = 2.0 * saa / (static_cast<double>(ca) * ca);
    double bb = 2.0 * sbb / (static_cast<double>(cb) * cb);
    return 2.0 * ab - aa - bb;
  };

  std::vector<int> labels(n, 0);
  for (int i = na; i < n; ++i) labels[i] = 1;
  EnergyResult r;
  r.statistic = energy_stat(labels);

  int exceed = 0;
  std::vector<int> perm = labels;
  for (int p = 0; p < n_permutations; ++p) {
    // Fisher-Yates with counter-based draws.
    for (int i = n - 1; i > 0; --i) {
      uint64_t u = counter_u64(seed, 7, RngPurpose::generic,
                               static_cast<int64_t>(p) * n + i, 0);
      int j = static_cast<int>(u % static_cast<uint64_t>(i + 1));
      std::swap(perm[i], perm[j]);
    }
    if (energy_stat(perm) >= r.statistic) ++exceed;
  }
  r.p_value = (exceed + 1.0) / (n_permutations + 1.0);
  r.reject = r.p_value < alpha;
  return r;
}

double clopper_pearson_upper(int64_t successes, int64_t n, double confidence) {
  if (n <= 0) fail(ErrorKind::invalid, "clopper_pearson_upper: n must be > 0");
  if (successes >= n) return 1.0;
  // Solve P(X <= successes | p) = 1 - confidence by bisection on the
  // binomial cdf; adequate for the sample sizes used here.
  double target = 1.0 - confidence;
  auto cdf = [&](double p) {
    // sum_{k<=s} C(n,k) p^k (1-p)^(n-k), accumulated in log space
    double acc = 0.0;
    double logp = std::log(p), log1p_ = std::log1p(-p);
    double logc = 0.0;  // log C(n,0)
    for (int64_t k = 0; k <= successes; ++k) {
      if (k > 0) logc += std::log(static_cast<double>(n - k + 1)) - std::log(static_cast<double>(k));
      acc += std::exp(logc + k * logp + (n - k) * log1p_);
    }
    return std::min(1.0, acc);
  };
  double lo = successes > 0 ? static_cast<double>(successes) / n : 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (cdf(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace fadeldp
