#pragma once

// Random geodesics that stay clear of the chart poles, for experiments and
// verification runs. Each is drawn as a great circle in R^4 and rejected
// unless the part to be integrated keeps a safety margin from |x|, |y| =
// pi/2 and from the x turning points.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "glome/chart.hpp"
#include "glome/geodesics.hpp"

namespace glome {

struct SampledGeodesic {
  GeodesicState s0;
  double direction = 1.0;  ///< sign of dx/dt at s0
  double x_end = 0.0;      ///< only meaningful for span samples
};

namespace detail {

inline AmbientPoint4 random_unit(SampleRng& rng) {
  for (;;) {
    AmbientPoint4 p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    double n = norm(p);
    if (n > 0.1 && n <= 1.0) {
      for (auto& c : p) c /= n;
      return p;
    }
  }
}

inline AmbientPoint4 random_tangent(SampleRng& rng, const AmbientPoint4& p) {
  for (;;) {
    AmbientPoint4 w = random_unit(rng);
    double d = dot(w, p);
    for (std::size_t i = 0; i < 4; ++i) w[i] -= d * p[i];
    double n = norm(w);
    if (n > 0.1) {
      for (auto& c : w) c /= n;
      return w;
    }
  }
}

inline bool clear_of_poles(const AmbientPoint4& p, const AmbientPoint4& w, double t0, double t1,
                           double margin, std::size_t checks) {
  const double lim = kHalfPi - margin;
  for (std::size_t i = 0; i <= checks; ++i) {
    double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(checks);
    AmbientPoint4 q = great_circle(p, w, t);
    double x = std::asin(std::clamp(q[3], -1.0, 1.0));
    double y = std::atan2(q[2], std::hypot(q[0], q[1]));
    if (std::abs(x) > lim || std::abs(y) > lim) return false;
  }
  return true;
}

inline SampledGeodesic from_circle(const AmbientPoint4& p, const AmbientPoint4& w) {
  SampledGeodesic g;
  g.direction = w[3] >= 0.0 ? 1.0 : -1.0;
  g.s0 = jet_on_great_circle(p, w, 0.0, std::atan2(p[1], p[0]));
  return g;
}

}  // namespace detail

inline constexpr double kSamplingMargin = 0.2;

/// Geodesics whose first x-monotone piece covers [x0, x0 + direction * span]
/// with room to spare before the turning point.
inline std::vector<SampledGeodesic> sample_span_geodesics(std::size_t n, double span,
                                                          std::uint64_t seed,
                                                          double max_slope = 3.0) {
  SampleRng rng(seed);
  std::vector<SampledGeodesic> out;
  for (std::size_t attempts = 0; out.size() < n; ++attempts) {
    if (attempts > 1000 * n + 1000) throw std::runtime_error("sample_span_geodesics: rejection stalled");
    AmbientPoint4 p = detail::random_unit(rng);
    AmbientPoint4 w = detail::random_tangent(rng, p);
    if (std::abs(w[3]) < 1e-3) continue;
    CircleHeight h = CircleHeight::of(p, w);
    SampledGeodesic g = detail::from_circle(p, w);
    const double x0 = g.s0.base.x;
    const double x_turn = g.direction * std::asin(std::min(1.0, h.amplitude));
    if (std::abs(x_turn - x0) < span + 0.15) continue;
    if (std::abs(x_turn + x0) < 0.15) continue;
    if (std::abs(x_turn) > kHalfPi - kSamplingMargin) continue;
    g.x_end = x0 + g.direction * span;
    auto t_end = h.solve_in(std::sin(g.x_end), 0.0, h.first_turn());
    if (!t_end) continue;
    if (!detail::clear_of_poles(p, w, 0.0, *t_end, kSamplingMargin, 400)) continue;
    if (std::abs(g.s0.y_x) > max_slope || std::abs(g.s0.v_x) > max_slope) continue;
    out.push_back(g);
  }
  return out;
}

/// Geodesics whose whole great circle stays clear of the poles, so they can be
/// integrated across any number of x turning points.
inline std::vector<SampledGeodesic> sample_closed_geodesics(std::size_t n, std::uint64_t seed) {
  SampleRng rng(seed);
  std::vector<SampledGeodesic> out;
  for (std::size_t attempts = 0; out.size() < n; ++attempts) {
    if (attempts > 1000 * n + 1000) throw std::runtime_error("sample_closed_geodesics: rejection stalled");
    AmbientPoint4 p = detail::random_unit(rng);
    AmbientPoint4 w = detail::random_tangent(rng, p);
    CircleHeight h = CircleHeight::of(p, w);
    if (h.amplitude < 0.4 || h.amplitude > 0.95) continue;
    if (!detail::clear_of_poles(p, w, 0.0, kTwoPi, kSamplingMargin, 2000)) continue;
    SampledGeodesic g = detail::from_circle(p, w);
    // away from both turning points, where the x-slopes blow up
    if (std::asin(h.amplitude) - std::abs(g.s0.base.x) < 0.3) continue;
    out.push_back(g);
  }
  return out;
}

/// Span geodesics lying in the totally geodesic slice v = const (v_x = 0).
inline std::vector<SampledGeodesic> sample_slice_geodesics(std::size_t n, double span,
                                                           std::uint64_t seed) {
  SampleRng rng(seed);
  std::vector<SampledGeodesic> out;
  for (std::size_t attempts = 0; out.size() < n; ++attempts) {
    if (attempts > 1000 * n + 1000) throw std::runtime_error("sample_slice_geodesics: rejection stalled");
    const double v0 = rng.uniform(0.0, kTwoPi);
    const double x0 = rng.uniform(-0.6, 0.6);
    const double y0 = rng.uniform(-0.8, 0.8);
    const double yx = rng.uniform(-1.5, 1.5);
    GeodesicState s{{x0, y0, v0}, yx, 0.0};
    const double dir = rng.unit() < 0.5 ? -1.0 : 1.0;
    AmbientPoint4 p = embed(s.base);
    AmbientPoint4 w = unit_tangent(s, dir);
    CircleHeight h = CircleHeight::of(p, w);
    const double x_turn = dir * std::asin(std::min(1.0, h.amplitude));
    if (std::abs(x_turn - x0) < span + 0.15) continue;
    const double x_end = x0 + dir * span;
    auto t_end = h.solve_in(std::sin(x_end), 0.0, h.first_turn());
    if (!t_end) continue;
    if (!detail::clear_of_poles(p, w, 0.0, *t_end, kSamplingMargin, 400)) continue;
    out.push_back({s, dir, x_end});
  }
  return out;
}

}  // namespace glome
