#include "hjlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hjlab {

void NeumaierSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(const std::vector<double>& xs) {
  NeumaierSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

MeanVar mean_var(const std::vector<double>& xs) {
  MeanVar r;
  r.n = xs.size();
  if (xs.empty()) return r;
  r.mean = compensated_sum(xs) / static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  NeumaierSum ss;
  for (double x : xs) ss.add((x - r.mean) * (x - r.mean));
  r.var = std::max(0.0, ss.value() / static_cast<double>(xs.size() - 1));
  r.se = std::sqrt(r.var / static_cast<double>(xs.size()));
  return r;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need at least two paired points");
  const MeanVar mx = mean_var(x);
  const MeanVar my = mean_var(y);
  NeumaierSum sxy;
  NeumaierSum sxx;
  NeumaierSum syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy.add((x[i] - mx.mean) * (y[i] - my.mean));
    sxx.add((x[i] - mx.mean) * (x[i] - mx.mean));
    syy.add((y[i] - my.mean) * (y[i] - my.mean));
  }
  if (!(sxx.value() > 0.0)) throw std::invalid_argument("linear_fit: x values are all equal");
  LinearFit f;
  f.slope = sxy.value() / sxx.value();
  f.intercept = my.mean - f.slope * mx.mean;
  NeumaierSum rss;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss.add(r * r);
  }
  f.r2 = syy.value() > 0.0 ? 1.0 - rss.value() / syy.value() : 1.0;
  if (x.size() > 2) f.slope_se = std::sqrt(rss.value() / (x.size() - 2) / sxx.value());
  return f;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  const double h = (xs.size() - 1) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - lo) * (xs[hi] - xs[lo]);
}

double median(const std::vector<double>& xs) { return quantile(xs, 0.5); }

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

double ks_critical(std::size_t n, std::size_t m, double alpha) {
  double c = 1.628;
  if (alpha >= 0.1) {
    c = 1.224;
  } else if (alpha >= 0.05) {
    c = 1.358;
  }
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

}  // namespace hjlab
