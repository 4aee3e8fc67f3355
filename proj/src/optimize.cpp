#include "fadeldp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace fadeldp {

namespace {

std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x, double fx,
                                double rel_step, bool central) {
  const size_t n = x.size();
  std::vector<double> g(n, 0.0);
  std::vector<double> xp = x;
  for (size_t i = 0; i < n; ++i) {
    double step = rel_step * (1.0 + std::abs(x[i]));
    if (central) {
      xp[i] = x[i] + step;
      double fp = f(xp);
      xp[i] = x[i] - step;
      double fm = f(xp);
      g[i] = (fp - fm) / (2.0 * step);
    } else {
      xp[i] = x[i] + step;
      double fp = f(xp);
      g[i] = (fp - fx) / step;
    }
    xp[i] = x[i];
  }
  return g;
}

double vnorm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double> x0, const LbfgsOptions& opts) {
  const size_t n = x0.size();
  LbfgsResult res;
  res.x = std::move(x0);
  res.value = f(res.x);
  std::vector<double> g = fd_gradient(f, res.x, res.value, opts.fd_step, opts.central_differences);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.grad_norm = vnorm(g);
    if (res.grad_norm <= opts.grad_tol * (1.0 + std::abs(res.value))) {
      res.converged = true;
      res.iterations = iter;
      return res;
    }

    // Two-loop recursion.
    std::vector<double> q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      double a = 0;
      for (size_t k = 0; k < n; ++k) a += s_hist[i][k] * q[k];
      a *= rho_hist[i];
      alpha[i] = a;
      for (size_t k = 0; k < n; ++k) q[k] -= a * y_hist[i][k];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) {
      double sy = 0, yy = 0;
      const auto& s = s_hist.back();
      const auto& y = y_hist.back();
      for (size_t k = 0; k < n; ++k) {
        sy += s[k] * y[k];
        yy += y[k] * y[k];
      }
      if (yy > 0) gamma = sy / yy;
    }
    for (double& v : q) v *= gamma;
    for (size_t i = 0; i < s_hist.size(); ++i) {
      double b = 0;
      for (size_t k = 0; k < n; ++k) b += y_hist[i][k] * q[k];
      b *= rho_hist[i];
      for (size_t k = 0; k < n; ++k) q[k] += (alpha[i] - b) * s_hist[i][k];
    }
    // q is the ascent-direction image; descend along -q.
    double gq = 0;
    for (size_t k = 0; k < n; ++k) gq += g[k] * q[k];
    if (gq <= 0) {  // not a descent direction; fall back to steepest descent
      q = g;
      gq = res.grad_norm * res.grad_norm;
    }

    double step = 1.0;
    std::vector<double> x_new(n);
    double f_new = res.value;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (size_t k = 0; k < n; ++k) x_new[k] = res.x[k] - step * q[k];
      f_new = f(x_new);
      if (f_new <= res.value - 1e-4 * step * gq) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.iterations = iter;
      res.converged = res.grad_norm <= 1e-5 * (1.0 + std::abs(res.value));
      return res;
    }

    std::vector<double> g_new =
        fd_gradient(f, x_new, f_new, opts.fd_step, opts.central_differences);
    std::vector<double> s(n), y(n);
    double sy = 0, snorm = 0;
    for (size_t k = 0; k < n; ++k) {
      s[k] = x_new[k] - res.x[k];
      y[k] = g_new[k] - g[k];
      sy += s[k] * y[k];
      snorm += s[k] * s[k];
    }
    if (sy > 1e-12 * std::sqrt(snorm) * vnorm(y)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    double moved = std::sqrt(snorm);
    res.x = std::move(x_new);
    res.value = f_new;
    g = std::move(g_new);
    res.iterations = iter + 1;
    if (moved <= opts.step_tol * (1.0 + vnorm(res.x))) {
      res.grad_norm = vnorm(g);
      res.converged = true;
      return res;
    }
  }
  res.grad_norm = vnorm(g);
  return res;
}

NelderMeadResult nelder_mead_minimize(const Objective& f, std::vector<double> x0,
                                      const NelderMeadOptions& opts) {
  const size_t n = x0.size();
  NelderMeadResult res;
  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (size_t i = 0; i < n; ++i) simplex[i + 1][i] += opts.initial_step;
  int evals = 0;
  for (size_t i = 0; i <= n; ++i) {
    fv[i] = f(simplex[i]);
    ++evals;
  }
  auto order = [&]() {
    std::vector<size_t> idx(n + 1);
    for (size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (size_t i = 0; i <= n; ++i) {
      s2[i] = simplex[idx[i]];
      f2[i] = fv[idx[i]];
    }
    simplex = std::move(s2);
    fv = std::move(f2);
  };
  order();
  while (evals < opts.max_evals) {
    if (std::abs(fv[n] - fv[0]) <= opts.tol * (1.0 + std::abs(fv[0]))) break;
    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i < n; ++i)
      for (size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / n;
    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (simplex[n][k] - centroid[k]);
      return p;
    };
    auto xr = blend(-1.0);
    double fr = f(xr);
    ++evals;
    if (fr < fv[0]) {
      auto xe = blend(-2.0);
      double fe = f(xe);
      ++evals;
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
    } else {
      auto xc = blend(fr < fv[n] ? -0.5 : 0.5);
      double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fv[n])) {
        simplex[n] = xc;
        fv[n] = fc;
      } else {
        for (size_t i = 1; i <= n; ++i) {
          for (size_t k = 0; k < n; ++k)
            simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
          fv[i] = f(simplex[i]);
          ++evals;
        }
      }
    }
    order();
  }
  res.x = simplex[0];
  res.value = fv[0];
  res.evals = evals;
  return res;
}

}  // namespace fadeldp
