#ifndef FADELDP_STATS_HPP
#define FADELDP_STATS_HPP

#include <cstdint>
#include <vector>

namespace fadeldp {

double normal_cdf(double x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
// Weighted least squares with weights w_i (inverse variances).
LinearFit weighted_linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& w);

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;     // unbiased
  double stderr_ = 0.0; // of the mean
  int64_t n = 0;
};
MeanVar mean_var(const std::vector<double>& x);

// Asymptotic Kolmogorov distribution Q(lambda) = P(sqrt(n) D <= lambda).
double kolmogorov_cdf(double lambda);

struct KsResult {
  double statistic = 0.0;  // D
  double p_value = 1.0;
  bool reject = false;     // at the alpha handed in
};

// One-sample KS against a cdf given as a callable table: caller passes
// evaluated cdf at the sorted samples.
KsResult ks_test_against_cdf(std::vector<double> samples, double (*cdf)(double, double, double),
                             double p1, double p2, double alpha);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha);

// Helper cdf for ks_test_against_cdf: normal with mean p1 and std p2.
double normal_cdf_param(double x, double mean, double sd);

// Two-sample energy statistic with a permutation p-value on pooled points in
// R^dim (row-major), seeded and deterministic.
struct EnergyResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
};
EnergyResult energy_distance_test(const std::vector<double>& a, const std::vector<double>& b,
                                  int dim, int n_permutations, double alpha, uint64_t seed);

// One-sided Clopper-Pearson upper bound for x successes in n trials.
double clopper_pearson_upper(int64_t successes, int64_t n, double confidence);

}  // namespace fadeldp

#endif
