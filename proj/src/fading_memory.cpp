#include "fadeldp/fading_memory.hpp"

#include <algorithm>
#include <cmath>

namespace fadeldp {

static bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

int MemoryParams::lag_count() const {
  double ratio = L / h;
  long n = std::lround(ratio);
  return static_cast<int>(n) + 1;
}

void MemoryParams::validate() const {
  if (!(r > 0.0)) fail(ErrorKind::invalid, "MemoryParams: r must be > 0");
  if (!(h > 0.0)) fail(ErrorKind::invalid, "MemoryParams: h must be > 0");
  if (!(L >= h)) fail(ErrorKind::invalid, "MemoryParams: L must be >= h");
  if (!(tail_tol > 0.0)) fail(ErrorKind::invalid, "MemoryParams: tail_tol must be > 0");
  double ratio = L / h;
  if (std::abs(ratio - std::lround(ratio)) > 1e-9 * std::max(1.0, ratio))
    fail(ErrorKind::invalid, "MemoryParams: L must be an integer multiple of h");
  if (lag_count() > 2'000'000) fail(ErrorKind::invalid, "MemoryParams: window too fine (L/h)");
}

Segment Segment::from_values(double head_time, int dim, const MemoryParams& params,
                             std::vector<double> values, std::vector<double> tail_coeff) {
  params.validate();
  if (dim < 1) fail(ErrorKind::invalid, "Segment: dim must be >= 1");
  const int K = params.lag_count();
  if (static_cast<int>(values.size()) != K * dim)
    fail(ErrorKind::invalid, "Segment: values must have L/h+1 states");
  if (static_cast<int>(tail_coeff.size()) != dim)
    fail(ErrorKind::invalid, "Segment: tail coefficient must have dim entries");
  if (!all_finite(values) || !all_finite(tail_coeff))
    fail(ErrorKind::invalid, "Segment: non-finite entry");

  Segment s;
  s.head_time = head_time;
  s.dim = dim;
  s.params = params;
  s.values = std::move(values);
  s.tail = std::move(tail_coeff);

  // Tail faithfulness check (explicit construction only; shift_segment keeps
  // its own running estimate and bypasses this).
  double grid = 0.0;
  for (int k = 0; k < K; ++k) {
    double w = std::exp(-params.r * k * params.h);
    double n2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      double v = s.values[static_cast<size_t>(k) * dim + j];
      n2 += v * v;
    }
    grid = std::max(grid, w * std::sqrt(n2));
  }
  double gn = 0.0;
  for (int j = 0; j < dim; ++j) gn += s.tail[j] * s.tail[j];
  gn = std::sqrt(gn);
  if (gn > (1.0 + params.tail_tol) * grid && gn > 0.0)
    fail(ErrorKind::invalid, "Segment: tail coefficient exceeds (1+tail_tol) * grid norm");
  return s;
}

Segment Segment::constant(double head_time, int dim, const MemoryParams& params, double value) {
  const int K = params.lag_count();
  return from_values(head_time, dim, params,
                     std::vector<double>(static_cast<size_t>(K) * dim, value),
                     std::vector<double>(dim, 0.0));
}

void Segment::value_at(double tau, std::span<double> out) const {
  if (tau > 0.0) fail(ErrorKind::invalid, "Segment::value_at: tau must be <= 0");
  const double h = params.h;
  const int K = params.lag_count();
  if (tau < -params.L) {
    double w = std::exp(-params.r * tau);
    for (int j = 0; j < dim; ++j) out[j] = tail[j] * w;
    return;
  }
  double pos = -tau / h;
  int k0 = static_cast<int>(pos);
  if (k0 >= K - 1) k0 = K - 2;
  double frac = pos - k0;
  if (frac < 1e-12) frac = 0.0;
  const double* v0 = values.data() + static_cast<size_t>(k0) * dim;
  const double* v1 = values.data() + static_cast<size_t>(k0 + 1) * dim;
  for (int j = 0; j < dim; ++j) out[j] = (1.0 - frac) * v0[j] + frac * v1[j];
}

double cr_norm(const Segment& seg) {
  const int K = seg.params.lag_count();
  const double r = seg.params.r, h = seg.params.h;
  double best = 0.0;
  for (int k = 0; k < K; ++k) {
    double n2 = 0.0;
    for (int j = 0; j < seg.dim; ++j) {
      double v = seg.values[static_cast<size_t>(k) * seg.dim + j];
      if (!std::isfinite(v)) fail(ErrorKind::invalid, "cr_norm: non-finite segment value");
      n2 += v * v;
    }
    best = std::max(best, std::exp(-r * k * h) * std::sqrt(n2));
  }
  // sup over tau < -L of e^{r tau} |g e^{-r tau}| = |g|.
  double gn = 0.0;
  for (int j = 0; j < seg.dim; ++j) gn += seg.tail[j] * seg.tail[j];
  return std::max(best, std::sqrt(gn));
}

Segment shift_segment(const Segment& seg, std::span<const double> new_head) {
  if (static_cast<int>(new_head.size()) != seg.dim)
    fail(ErrorKind::invalid, "shift_segment: head dimension mismatch");
  for (double x : new_head)
    if (!std::isfinite(x)) fail(ErrorKind::invalid, "shift_segment: non-finite head");

  const int K = seg.params.lag_count();
  const int d = seg.dim;
  Segment out;
  out.head_time = seg.head_time + seg.params.h;
  out.dim = d;
  out.params = seg.params;
  out.values.resize(static_cast<size_t>(K) * d);
  for (int j = 0; j < d; ++j) out.values[j] = new_head[j];
  std::copy(seg.values.begin(), seg.values.end() - d, out.values.begin() + d);

  // The dropped edge value carries the weighted sample e^{-rL} phi(-L) of the
  // deep-past limit; blend it into the running estimate g.
  const double alpha = seg.params.h / seg.params.L;
  const double w = std::exp(-seg.params.r * seg.params.L);
  out.tail.resize(d);
  const double* dropped = seg.values.data() + static_cast<size_t>(K - 1) * d;
  for (int j = 0; j < d; ++j) out.tail[j] = (1.0 - alpha) * seg.tail[j] + alpha * w * dropped[j];
  return out;
}

static void check_compatible(const Segment& a, const Segment& b, const char* who) {
  if (a.dim != b.dim || !(a.params == b.params))
    fail(ErrorKind::invalid, std::string(who) + ": incompatible segments");
}

Segment segment_sub(const Segment& a, const Segment& b) {
  check_compatible(a, b, "segment_sub");
  Segment out = a;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  for (size_t i = 0; i < out.tail.size(); ++i) out.tail[i] -= b.tail[i];
  return out;
}

Segment segment_add(const Segment& a, const Segment& b) {
  check_compatible(a, b, "segment_add");
  Segment out = a;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
  for (size_t i = 0; i < out.tail.size(); ++i) out.tail[i] += b.tail[i];
  return out;
}

Segment segment_scale(const Segment& a, double c) {
  Segment out = a;
  for (double& v : out.values) v *= c;
  for (double& v : out.tail) v *= c;
  return out;
}

Segment with_head_time(const Segment& a, double t) {
  Segment out = a;
  out.head_time = t;
  return out;
}

DelayMeasure DelayMeasure::point_mass(double lag) {
  DelayMeasure mu;
  mu.atoms.push_back({lag, 1.0});
  return mu;
}

void DelayMeasure::validate() const {
  double mass = 0.0;
  for (const auto& a : atoms) {
    if (a.lag > 0.0) fail(ErrorKind::invalid, "DelayMeasure: atom lag must be <= 0");
    if (!(a.weight > 0.0)) fail(ErrorKind::invalid, "DelayMeasure: atom weight must be > 0");
    mass += a.weight;
  }
  if (expo) {
    if (!(expo->beta > 0.0)) fail(ErrorKind::invalid, "DelayMeasure: expo beta must be > 0");
    if (expo->mass < 0.0) fail(ErrorKind::invalid, "DelayMeasure: expo mass must be >= 0");
    mass += expo->mass;
  }
  if (std::abs(mass - 1.0) > 1e-9)
    fail(ErrorKind::invalid, "DelayMeasure: total mass must equal 1");
}

bool DelayMeasure::in_M(double kappa) const {
  return !expo || expo->mass == 0.0 || expo->beta > kappa;
}

double DelayMeasure::deepest_atom() const {
  double deep = 0.0;
  for (const auto& a : atoms) deep = std::min(deep, a.lag);
  return deep;
}

double DelayMeasure::weighted_tail_mass(double kappa, double Lcut) const {
  double s = 0.0;
  for (const auto& a : atoms)
    if (a.lag < -Lcut) s += a.weight * std::exp(-kappa * a.lag);
  if (expo && expo->mass > 0.0) {
    if (expo->beta <= kappa)
      fail(ErrorKind::invalid, "DelayMeasure: divergent weighted tail (beta <= kappa)");
    // int_{-inf}^{-L} e^{-kappa tau} c b e^{b tau} dtau = c b e^{-(b-kappa)L}/(b-kappa)
    s += expo->mass * expo->beta * std::exp(-(expo->beta - kappa) * Lcut) / (expo->beta - kappa);
  }
  return s;
}

double measure_moment(const DelayMeasure& mu, double kappa) {
  if (kappa < 0.0) fail(ErrorKind::invalid, "measure_moment: kappa must be >= 0");
  double s = 0.0;
  for (const auto& a : mu.atoms) s += a.weight * std::exp(-kappa * a.lag);
  if (mu.expo && mu.expo->mass > 0.0) {
    if (mu.expo->beta <= kappa)
      fail(ErrorKind::invalid, "measure_moment: divergent moment (beta <= kappa)");
    s += mu.expo->mass * mu.expo->beta / (mu.expo->beta - kappa);
  }
  return s;
}

namespace {

// phi(-k h) linearly interpolated at lag tau in [-L, 0].
inline void interp_on_grid(const Segment& seg, double tau, double* out) {
  const double h = seg.params.h;
  const int K = seg.params.lag_count();
  double pos = -tau / h;
  int k0 = static_cast<int>(pos);
  if (k0 >= K - 1) k0 = K - 2;
  double frac = pos - k0;
  if (frac < 1e-12) frac = 0.0;
  if (frac > 1.0 - 1e-12 && k0 + 2 <= K - 1) {
    frac = 0.0;
    k0 += 1;
  }
  const double* v0 = seg.values.data() + static_cast<size_t>(k0) * seg.dim;
  const double* v1 = seg.values.data() + static_cast<size_t>(k0 + 1) * seg.dim;
  for (int j = 0; j < seg.dim; ++j) out[j] = (1.0 - frac) * v0[j] + frac * v1[j];
}

}  // namespace

std::vector<double> delay_integral(const Segment& seg, const DelayMeasure& mu) {
  const int d = seg.dim;
  const double r = seg.params.r, h = seg.params.h, L = seg.params.L;
  if (!mu.in_M(2.0 * r))
    fail(ErrorKind::invalid, "delay_integral: measure not in M_{2r} (beta <= 2r)");
  std::vector<double> acc(d, 0.0);
  std::vector<double> buf(d);

  for (const auto& a : mu.atoms) {
    if (a.lag >= -L) {
      interp_on_grid(seg, a.lag, buf.data());
      for (int j = 0; j < d; ++j) acc[j] += a.weight * buf[j];
    } else {
      double w = std::exp(-r * a.lag);
      for (int j = 0; j < d; ++j) acc[j] += a.weight * seg.tail[j] * w;
    }
  }

  if (mu.expo && mu.expo->mass > 0.0) {
    const double c = mu.expo->mass, b = mu.expo->beta;
    const int K = seg.params.lag_count();
    // Trapezoid of phi * density on the lag grid, weights normalized so the
    // discrete mass matches the exact interval mass c(1 - e^{-bL}).
    double raw_mass = 0.0;
    for (int k = 0; k < K; ++k) {
      double wk = (k == 0 || k == K - 1) ? 0.5 : 1.0;
      raw_mass += wk * c * b * std::exp(-b * k * h) * h;
    }
    double exact_mass = c * (1.0 - std::exp(-b * L));
    double scale = exact_mass > 0.0 && raw_mass > 0.0 ? exact_mass / raw_mass : 1.0;
    for (int k = 0; k < K; ++k) {
      double wk = (k == 0 || k == K - 1) ? 0.5 : 1.0;
      double weight = scale * wk * c * b * std::exp(-b * k * h) * h;
      const double* v = seg.values.data() + static_cast<size_t>(k) * d;
      for (int j = 0; j < d; ++j) acc[j] += weight * v[j];
    }
    // Analytic tail: int_{-inf}^{-L} g e^{-r tau} c b e^{b tau} dtau.
    if (b <= r)
      fail(ErrorKind::invalid, "delay_integral: divergent tail (beta <= r)");
    double tail_w = c * b * std::exp(-(b - r) * L) / (b - r);
    for (int j = 0; j < d; ++j) acc[j] += tail_w * seg.tail[j];
  }
  return acc;
}

double delay_integral_sq(const Segment& seg, const DelayMeasure& mu) {
  const int d = seg.dim;
  const double r = seg.params.r, h = seg.params.h, L = seg.params.L;
  if (!mu.in_M(2.0 * r))
    fail(ErrorKind::invalid, "delay_integral_sq: measure not in M_{2r} (beta <= 2r)");
  double acc = 0.0;
  std::vector<double> buf(d);

  auto sq = [&](const double* v) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += v[j] * v[j];
    return s;
  };

  for (const auto& a : mu.atoms) {
    if (a.lag >= -L) {
      interp_on_grid(seg, a.lag, buf.data());
      acc += a.weight * sq(buf.data());
    } else {
      double w = std::exp(-2.0 * r * a.lag);
      acc += a.weight * sq(seg.tail.data()) * w;
    }
  }

  if (mu.expo && mu.expo->mass > 0.0) {
    const double c = mu.expo->mass, b = mu.expo->beta;
    const int K = seg.params.lag_count();
    double raw_mass = 0.0;
    for (int k = 0; k < K; ++k) {
      double wk = (k == 0 || k == K - 1) ? 0.5 : 1.0;
      raw_mass += wk * c * b * std::exp(-b * k * h) * h;
    }
    double exact_mass = c * (1.0 - std::exp(-b * L));
    double scale = exact_mass > 0.0 && raw_mass > 0.0 ? exact_mass / raw_mass : 1.0;
    for (int k = 0; k < K; ++k) {
      double wk = (k == 0 || k == K - 1) ? 0.5 : 1.0;
      double weight = scale * wk * c * b * std::exp(-b * k * h) * h;
      acc += weight * sq(seg.values.data() + static_cast<size_t>(k) * d);
    }
    if (b <= 2.0 * r)
      fail(ErrorKind::invalid, "delay_integral_sq: divergent tail (beta <= 2r)");
    double tail_w = c * b * std::exp(-(b - 2.0 * r) * L) / (b - 2.0 * r);
    acc += tail_w * sq(seg.tail.data());
  }
  return acc;
}

double choose_window(double r, double bound_on_norm, const std::vector<DelayMeasure>& mu_list,
                     double tail_tol, double h) {
  if (!(r > 0.0) || !(bound_on_norm > 0.0) || !(tail_tol > 0.0) || !(h > 0.0))
    fail(ErrorKind::invalid, "choose_window: all inputs must be positive");
  for (const auto& mu : mu_list)
    if (!mu.in_M(2.0 * r))
      fail(ErrorKind::invalid, "choose_window: measure not in M_{2r}");
  const double b2 = bound_on_norm * bound_on_norm;
  const long max_steps = 100'000'000;
  for (long n = 1; n <= max_steps; ++n) {
    double L = n * h;
    bool ok = true;
    for (const auto& mu : mu_list) {
      if (b2 * mu.weighted_tail_mass(2.0 * r, L) > tail_tol) {
        ok = false;
        break;
      }
    }
    if (ok) return L;
  }
  fail(ErrorKind::invalid, "choose_window: no finite window achieves the tolerance");
}

int PathOnGrid::index_of(double t) const {
  double pos = (t - t0) / h;
  long idx = std::lround(pos);
  if (std::abs(pos - idx) > 1e-6)
    fail(ErrorKind::invalid, "PathOnGrid: time off the grid");
  if (idx < 0 || idx > steps())
    fail(ErrorKind::invalid, "PathOnGrid: time outside the path");
  return static_cast<int>(idx);
}

Segment PathOnGrid::segment_at(double t) const {
  const int idx = index_of(t);
  const int K = initial.params.lag_count();
  const int d = dim;
  Segment s;
  s.head_time = t0 + idx * h;
  s.dim = d;
  s.params = initial.params;
  s.values.resize(static_cast<size_t>(K) * d);
  for (int k = 0; k < K; ++k) {
    int src = idx - k;  // state index at lag -k*h
    const double* v;
    if (src >= 0) {
      v = states.data() + static_cast<size_t>(src) * d;
    } else {
      v = initial.values.data() + static_cast<size_t>(-src) * d;
    }
    std::copy(v, v + d, s.values.begin() + static_cast<size_t>(k) * d);
  }
  s.tail.assign(gs.begin() + static_cast<size_t>(idx) * d,
                gs.begin() + static_cast<size_t>(idx + 1) * d);
  return s;
}

PathOnGrid PathOnGrid::from_initial(const Segment& initial, double h, int n_steps) {
  if (std::abs(h - initial.params.h) > 1e-12)
    fail(ErrorKind::invalid, "PathOnGrid: step must equal the segment grid step");
  PathOnGrid p;
  p.t0 = initial.head_time;
  p.h = h;
  p.dim = initial.dim;
  p.initial = initial;
  p.states.reserve(static_cast<size_t>(n_steps + 1) * initial.dim);
  p.gs.reserve(static_cast<size_t>(n_steps + 1) * initial.dim);
  p.states.insert(p.states.end(), initial.values.begin(), initial.values.begin() + initial.dim);
  p.gs.insert(p.gs.end(), initial.tail.begin(), initial.tail.end());
  return p;
}

void PathOnGrid::push_state(std::span<const double> x) {
  if (static_cast<int>(x.size()) != dim) fail(ErrorKind::invalid, "push_state: dim mismatch");
  const int K = initial.params.lag_count();
  const int idx = steps();  // index of the segment being shifted away from
  // Same blend as shift_segment: dropped value at lag -L of the current head.
  const double alpha = initial.params.h / initial.params.L;
  const double w = std::exp(-initial.params.r * initial.params.L);
  const int src = idx - (K - 1);
  const double* dropped = src >= 0 ? states.data() + static_cast<size_t>(src) * dim
                                   : initial.values.data() + static_cast<size_t>(-src) * dim;
  size_t base = gs.size() - dim;
  for (int j = 0; j < dim; ++j) {
    double g = (1.0 - alpha) * gs[base + j] + alpha * w * dropped[j];
    gs.push_back(g);
  }
  states.insert(states.end(), x.begin(), x.end());
}

PathOnGrid path_diff(const PathOnGrid& a, const PathOnGrid& b) {
  if (a.dim != b.dim || std::abs(a.t0 - b.t0) > 1e-9 || std::abs(a.h - b.h) > 1e-12 ||
      a.steps() != b.steps())
    fail(ErrorKind::invalid, "path_diff: incompatible paths");
  PathOnGrid out = a;
  out.initial = segment_sub(a.initial, b.initial);
  for (size_t i = 0; i < out.states.size(); ++i) out.states[i] -= b.states[i];
  for (size_t i = 0; i < out.gs.size(); ++i) out.gs[i] -= b.gs[i];
  return out;
}

double path_sup_rnorm_diff(const PathOnGrid& a, const PathOnGrid& b, double t_lo, double t_hi) {
  const int i0 = a.index_of(t_lo), i1 = a.index_of(t_hi);
  double best = 0.0;
  for (int i = i0; i <= i1; ++i) {
    double t = a.t0 + i * a.h;
    Segment d = segment_sub(a.segment_at(t), b.segment_at(t));
    best = std::max(best, cr_norm(d));
  }
  return best;
}

PathNorm path_norm(const PathOnGrid& path, int n_max) {
  if (n_max < 1) fail(ErrorKind::invalid, "path_norm: n_max must be >= 1");
  if (path.t_max() + 1e-9 < path.t0 + n_max)
    fail(ErrorKind::invalid, "path_norm: path does not cover t0 + n_max");
  PathNorm out;
  for (int n = 1; n <= n_max; ++n) {
    double nr = cr_norm(path.segment_at(path.t0 + n));
    out.value_sq += std::pow(2.0, -n) * std::min(nr * nr, 1.0);
  }
  out.remainder_bound = std::pow(2.0, -n_max);
  return out;
}

}  // namespace fadeldp
