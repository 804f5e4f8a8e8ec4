#pragma once

// Independent reference computations used only by tests: central finite
// differences and exact great circles. Nothing here calls into the dual
// number machinery.

#include <array>
#include <cmath>
#include <cstddef>

namespace glome::oracle {

template <class F>
double central_diff(F&& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <class F>
double central_diff2(F&& f, double x, double h = 1e-4) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// Five-point stencil for a first derivative, O(h^4).
template <class F>
double five_point(F&& f, double x, double h = 1e-3) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

template <class F>
std::array<double, 3> fd_grad3(F&& f, std::array<double, 3> p, double h = 1e-6) {
  std::array<double, 3> g{};
  for (std::size_t i = 0; i < 3; ++i) {
    auto q = p;
    auto fi = [&](double t) {
      q[i] = t;
      return f(q[0], q[1], q[2]);
    };
    g[i] = central_diff(fi, p[i], h);
  }
  return g;
}

inline std::array<double, 4> embed_plain(double x, double y, double v) {
  return {std::cos(x) * std::cos(y) * std::cos(v), std::cos(x) * std::cos(y) * std::sin(v),
          std::cos(x) * std::sin(y), std::sin(x)};
}

}  // namespace glome::oracle
