#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hjlab {

inline constexpr const char* kLibraryVersion = "0.3.1";

/// Points and vectors in R^d for d in {1, 2}. Unused trailing components stay zero.
using Point = std::array<double, 2>;

inline constexpr int kMaxDim = 2;

inline double dot(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += a[k] * b[k];
  return s;
}

inline double norm(const Point& a, int dim) { return std::sqrt(dot(a, a, dim)); }

inline Point add(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point scale(const Point& a, double s) { return {a[0] * s, a[1] * s}; }

/// Axis-aligned box; bounds may be infinite.
struct Box {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};

  static Box unbounded() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {{-inf, -inf}, {inf, inf}};
  }
  static Box cube(int dim, double radius) {
    Box b;
    for (int k = 0; k < dim; ++k) {
      b.lo[k] = -radius;
      b.hi[k] = radius;
    }
    return b;
  }

  bool contains(const Point& x, int dim, double slack = 0.0) const {
    for (int k = 0; k < dim; ++k)
      if (x[k] < lo[k] - slack || x[k] > hi[k] + slack) return false;
    return true;
  }
  bool empty(int dim) const {
    for (int k = 0; k < dim; ++k)
      if (!(lo[k] <= hi[k])) return true;
    return false;
  }
  Box inflated(double r, int dim) const {
    Box b = *this;
    for (int k = 0; k < dim; ++k) {
      b.lo[k] -= r;
      b.hi[k] += r;
    }
    return b;
  }
  Box scaled(double s, int dim) const {
    Box b = *this;
    for (int k = 0; k < dim; ++k) {
      b.lo[k] *= s;
      b.hi[k] *= s;
    }
    return b;
  }
};

/// Probe outside the region where a field or grid is defined.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Invalid parameters; the message starts with the offending field path when known.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Computational domain too small for the requested horizon.
class UnderMarginedDomain : public std::runtime_error {
 public:
  UnderMarginedDomain(const std::string& what, double required_margin)
      : std::runtime_error(what), required_margin_(required_margin) {}
  double required_margin() const { return required_margin_; }

 private:
  double required_margin_;
};

std::string format_point(const Point& p, int dim);

}  // namespace hjlab
