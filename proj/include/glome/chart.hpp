#pragma once

// Hyperspherical chart of S^3, its embedding in R^4, and the arclength
// Lagrangian with x as the independent variable.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "glome/jet.hpp"

namespace glome {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDefaultMargin = 0.1;

/// (x, y, v) with x, y in the open interval (-pi/2, pi/2). v is unrestricted
/// so trajectories do not jump at the 2 pi seam.
struct ChartPoint {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;

  static ChartPoint checked(double x, double y, double v) {
    if (!(std::abs(x) < kHalfPi)) throw DomainError("chart x", x);
    if (!(std::abs(y) < kHalfPi)) throw DomainError("chart y", y);
    if (!std::isfinite(v)) throw DomainError("chart v", v);
    return {x, y, v};
  }

  std::array<double, 3> coords() const { return {x, y, v}; }
  /// v reduced to [0, 2 pi), for display only.
  double v_wrapped() const {
    double w = std::fmod(v, kTwoPi);
    return w < 0.0 ? w + kTwoPi : w;
  }
};

struct Jet1 {
  ChartPoint base;
  double y_x = 0.0;
  double v_x = 0.0;

  std::array<double, 5> coords() const { return {base.x, base.y, base.v, y_x, v_x}; }
};

struct Jet2 {
  Jet1 jet1;
  double y_xx = 0.0;
  double v_xx = 0.0;

  std::array<double, 7> coords() const {
    const auto& b = jet1.base;
    return {b.x, b.y, b.v, jet1.y_x, jet1.v_x, y_xx, v_xx};
  }
};

template <class T>
using Ambient = std::array<T, 4>;
using AmbientPoint4 = Ambient<double>;

template <class T>
Ambient<T> embed(const T& x, const T& y, const T& v) {
  T cx = cos(x);
  T cy = cos(y);
  return {cx * cy * cos(v), cx * cy * sin(v), cx * sin(y), sin(x)};
}

inline AmbientPoint4 embed(const ChartPoint& p) { return embed(p.x, p.y, p.v); }

template <class T, std::size_t N>
T dot(const std::array<T, N>& a, const std::array<T, N>& b) {
  T s{};
  for (std::size_t i = 0; i < N; ++i) s = s + a[i] * b[i];
  return s;
}

inline double norm(const AmbientPoint4& a) { return std::sqrt(dot(a, a)); }

/// Lambda = sqrt(1 + cos^2 x y_x^2 + cos^2 x cos^2 y v_x^2). Independent of v.
template <class T>
T lagrangian(const T& x, const T& y, const T& /*v*/, const T& y_x, const T& v_x) {
  T cx2 = square(cos(x));
  T cy2 = square(cos(y));
  return sqrt(T(1.0) + cx2 * y_x * y_x + cx2 * cy2 * v_x * v_x);
}

inline double lagrangian(const Jet1& j) {
  return lagrangian(j.base.x, j.base.y, j.base.v, j.y_x, j.v_x);
}

/// Velocity of embed along the chart curve through the jet, per unit x.
inline AmbientPoint4 ambient_velocity(const Jet1& j) {
  const auto& b = j.base;
  Ambient<D1> e = embed(D1(b.x, 1.0), D1(b.y, j.y_x), D1(b.v, j.v_x));
  return {e[0].der, e[1].der, e[2].der, e[3].der};
}

/// Uniform doubles in [0, 1) from mt19937_64, reproducible across standard
/// libraries (the engine is fully specified, the distributions are not).
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : engine_(seed) {}

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 engine_;
};

inline std::vector<ChartPoint> sample_domain(std::size_t n, double margin, std::uint64_t seed) {
  if (!(margin > 0.0 && margin < kHalfPi)) {
    throw std::invalid_argument("sample_domain: margin must lie in (0, pi/2)");
  }
  if (n < 1) throw std::invalid_argument("sample_domain: n must be at least 1");
  SampleRng rng(seed);
  const double bound = kHalfPi - margin;
  std::vector<ChartPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = rng.uniform(-bound, bound);
    double y = rng.uniform(-bound, bound);
    double v = rng.uniform(0.0, kTwoPi);
    out.push_back({x, y, v});
  }
  return out;
}

/// Jets over sample_domain points with slopes uniform in [-slope, slope].
inline std::vector<Jet1> sample_jets(std::size_t n, double margin, double slope,
                                     std::uint64_t seed) {
  auto base = sample_domain(n, margin, seed);
  SampleRng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Jet1> out;
  out.reserve(n);
  for (const auto& p : base) {
    double yx = rng.uniform(-slope, slope);
    double vx = rng.uniform(-slope, slope);
    out.push_back({p, yx, vx});
  }
  return out;
}

}  // namespace glome
