#pragma once

#include <cstdint>
#include <vector>

namespace hjlab {

/// Neumaier-compensated running sum.
class NeumaierSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(const std::vector<double>& xs);

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  ///< unbiased sample variance (0 when n < 2)
  double se = 0.0;   ///< sqrt(var / n)
  std::size_t n = 0;
};

/// Two-pass compensated mean and variance.
MeanVar mean_var(const std::vector<double>& xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;
};

/// Ordinary least squares y = intercept + slope x; needs at least two distinct x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> xs, double q);
double median(const std::vector<double>& xs);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);
/// Asymptotic critical value at level alpha in {0.01, 0.05, 0.1}.
double ks_critical(std::size_t n, std::size_t m, double alpha);

}  // namespace hjlab
