#pragma once

/**
 * @file geodesics.hpp
 * @brief Euler-Lagrange system of the S^3 arclength functional, the collapsed
 *        second-order equation E = 0, RK4 integration in x, and Noether-charge
 *        monitoring.
 *
 * x is the independent variable, so a geodesic is integrated as a sequence of
 * x-monotone pieces. integrate() produces one piece; integrate_steps() joins
 * pieces across x turning points by transporting the state along the great
 * circle it currently lies on.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "glome/chart.hpp"
#include "glome/jet.hpp"

namespace glome {

inline constexpr double kPoleMargin = 0.05;
inline constexpr double kSingularDet = 1e-12;
inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kMaxStep = 0.01;

/// x is the independent variable; (y, v, y_x, v_x) is the state.
using GeodesicState = Jet1;

class KConstant {
 public:
  explicit KConstant(double k) : k_(k) {
    if (!(k >= 0.0 && k <= 1.0)) {
      throw std::out_of_range("KConstant: k = " + std::to_string(k) + " outside [0, 1]");
    }
  }
  double value() const { return k_; }

 private:
  double k_;
};

class SingularSystem : public std::runtime_error {
 public:
  SingularSystem(double x, double det)
      : std::runtime_error(format(x, det)), x_(x), det_(det) {}
  double x() const { return x_; }
  double determinant() const { return det_; }

 private:
  static std::string format(double x, double det) {
    std::ostringstream os;
    os.precision(17);
    os << "SingularSystem: scaled Euler-Lagrange determinant " << det << " at x = " << x;
    return os.str();
  }
  double x_;
  double det_;
};

namespace detail {

inline constexpr auto lagrangian_fn = [](auto x, auto y, auto v, auto yx, auto vx) {
  return lagrangian(x, y, v, yx, vx);
};

/// Partials of Lambda needed by the Euler-Lagrange pair at a T-valued jet.
template <class T>
struct LagrangianPartials {
  T d_y;
  T d_v;
  // second[q][k] = d_{slot 3+q} d_{slot k} Lambda, q in {y_x, v_x}
  std::array<std::array<T, 5>, 2> second;
};

template <class T>
LagrangianPartials<T> lagrangian_partials(const std::array<T, 5>& p) {
  LagrangianPartials<T> out{};
  for (std::size_t q = 0; q < 2; ++q) {
    for (std::size_t k = 0; k < 5; ++k) {
      if (q == 1 && k == 3) {
        out.second[1][3] = out.second[0][4];
        continue;
      }
      auto sp = second_partial_at<T, 5>(lagrangian_fn, p, 3 + q, k);
      out.second[q][k] = sp.d_ij;
      if (q == 0 && k == 1) out.d_y = sp.d_j;
      if (q == 0 && k == 2) out.d_v = sp.d_j;
    }
  }
  return out;
}

}  // namespace detail

/// (Lambda_y - D_x Lambda_{y_x}, Lambda_v - D_x Lambda_{v_x}) at a second-order
/// jet, with every partial of Lambda taken by nested duals.
template <class T>
std::array<T, 2> euler_lagrange(const T& x, const T& y, const T& v, const T& yx, const T& vx,
                                const T& yxx, const T& vxx) {
  auto lp = detail::lagrangian_partials<T>({x, y, v, yx, vx});
  auto total = [&](std::size_t q) {
    const auto& s = lp.second[q];
    return s[0] + s[1] * yx + s[2] * vx + s[3] * yxx + s[4] * vxx;
  };
  return {lp.d_y - total(0), lp.d_v - total(1)};
}

struct Accel {
  double y_xx = 0.0;
  double v_xx = 0.0;
};

/// Solves the Euler-Lagrange pair for (y_xx, v_xx).
///
/// The coefficient matrix is the v_x/y_x Hessian of Lambda, whose determinant
/// is cos^4 x cos^2 y / Lambda^4. The singularity test uses det * Lambda^4 so
/// that it fires near the chart poles and not merely for steep slopes.
inline Accel el_rhs(const GeodesicState& s) {
  const auto& b = s.base;
  auto lp = detail::lagrangian_partials<double>({b.x, b.y, b.v, s.y_x, s.v_x});
  const auto& ry = lp.second[0];
  const auto& rv = lp.second[1];
  const double a11 = ry[3], a12 = ry[4];
  const double a21 = rv[3], a22 = rv[4];
  const double f1 = lp.d_y - (ry[0] + ry[1] * s.y_x + ry[2] * s.v_x);
  const double f2 = lp.d_v - (rv[0] + rv[1] * s.y_x + rv[2] * s.v_x);
  const double det = a11 * a22 - a12 * a21;
  const double L2 = square(lagrangian(s));
  if (!(std::abs(det) * L2 * L2 >= kSingularDet)) throw SingularSystem(b.x, det * L2 * L2);
  return {(f1 * a22 - a12 * f2) / det, (a11 * f2 - a21 * f1) / det};
}

inline Jet2 on_shell(const GeodesicState& s) {
  Accel a = el_rhs(s);
  return {s, a.y_xx, a.v_xx};
}

/// c = d Lambda / d v_x = cos^2 x cos^2 y v_x / Lambda; conserved because
/// Lambda does not depend on v.
inline double noether_charge(const GeodesicState& s) {
  const double cx = std::cos(s.base.x);
  const double cy = std::cos(s.base.y);
  return cx * cx * cy * cy * s.v_x / lagrangian(s);
}

/// Left side of the collapsed equation E = 0 for y(x), with v eliminated
/// through the constant k.
template <class T>
T collapsed_E(const T& x, const T& y, const T& yx, const T& yxx, double k) {
  T sx = sin(x), cx = cos(x), sy = sin(y), cy = cos(y);
  T kk(k);
  T a = cx * cx * cy * cy;
  return yx * sx * cy * (kk - T(2.0) * a) + yxx * cx * cy * (a - kk) + kk * sec(x) * sy +
         kk * yx * yx * cx * sy - yx * yx * yx * pow(cx, 4) * sx * pow(cy, 3);
}

inline double collapsed_E(double x, double y, double yx, double yxx, const KConstant& k) {
  return collapsed_E<double>(x, y, yx, yxx, k.value());
}

/**
 * k for the collapsed equation through s0.
 *
 * With A = cos^2 x cos^2 y the charge gives A v_x = c Lambda, so
 * Lambda^2 (1 - c^2 / A) = 1 + cos^2 x y_x^2. Substituting v_x and v_xx from
 * the first Euler-Lagrange equation into the second reproduces E = 0 with
 * k = c^2. Since A > c^2 along any geodesic and A <= 1, k lies in [0, 1).
 */
inline KConstant infer_k(const GeodesicState& s0) {
  const double c = noether_charge(s0);
  const double k = c * c;
  if (!(k >= 0.0 && k <= 1.0)) {
    throw std::out_of_range("infer_k: derived k = " + std::to_string(k) + " outside [0, 1]");
  }
  return KConstant(k);
}

// ---------------------------------------------------------------------------
// integration

struct SampleDiagnostics {
  double noether_c = 0.0;
  double lagrangian = 0.0;
  double ambient_norm_residual = 0.0;
  double unit_speed_residual = 0.0;  ///< | |d embed/dx| / Lambda - 1 |
};

inline SampleDiagnostics diagnose(const GeodesicState& s) {
  SampleDiagnostics d;
  d.noether_c = noether_charge(s);
  d.lagrangian = lagrangian(s);
  d.ambient_norm_residual = std::abs(norm(embed(s.base)) - 1.0);
  d.unit_speed_residual = std::abs(norm(ambient_velocity(s)) / d.lagrangian - 1.0);
  return d;
}

struct Trajectory {
  std::vector<GeodesicState> samples;
  std::vector<SampleDiagnostics> diagnostics;

  void push(const GeodesicState& s) {
    samples.push_back(s);
    diagnostics.push_back(diagnose(s));
  }
  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  const GeodesicState& front() const { return samples.front(); }
  const GeodesicState& back() const { return samples.back(); }
};

enum class IntegrationFailure { DomainExit, SingularSystem };

inline const char* to_string(IntegrationFailure f) {
  return f == IntegrationFailure::DomainExit ? "DomainExit" : "SingularSystem";
}

/// Integration aborted; carries the samples computed before the abort.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(IntegrationFailure kind, double x, const std::string& detail, Trajectory partial)
      : std::runtime_error(std::string(to_string(kind)) + " at x = " + std::to_string(x) + ": " +
                           detail),
        kind_(kind),
        x_(x),
        partial_(std::move(partial)) {}

  IntegrationFailure kind() const { return kind_; }
  double x_reached() const { return x_; }
  const Trajectory& partial() const { return partial_; }

 private:
  IntegrationFailure kind_;
  double x_;
  Trajectory partial_;
};

namespace detail {

using State4 = std::array<double, 4>;  // y, v, y_x, v_x

/// Thrown when an RK stage leaves the pole margin; the solver near the poles
/// would otherwise report a singular system for what is a domain exit.
struct StageOutside {
  double x;
  double y;
};

inline State4 field(double x, const State4& u, double margin) {
  const double lim = kHalfPi - margin;
  if (!(std::abs(x) <= lim && std::abs(u[0]) <= lim)) throw StageOutside{x, u[0]};
  Accel a = el_rhs({{x, u[0], u[1]}, u[2], u[3]});
  return {u[2], u[3], a.y_xx, a.v_xx};
}

inline State4 axpy(const State4& u, double h, const State4& k) {
  return {u[0] + h * k[0], u[1] + h * k[1], u[2] + h * k[2], u[3] + h * k[3]};
}

inline GeodesicState rk4_step(const GeodesicState& s, double h, double margin) {
  const double x = s.base.x;
  State4 u{s.base.y, s.base.v, s.y_x, s.v_x};
  State4 k1 = field(x, u, margin);
  State4 k2 = field(x + 0.5 * h, axpy(u, 0.5 * h, k1), margin);
  State4 k3 = field(x + 0.5 * h, axpy(u, 0.5 * h, k2), margin);
  State4 k4 = field(x + h, axpy(u, h, k3), margin);
  State4 n{};
  for (std::size_t i = 0; i < 4; ++i) n[i] = u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return {{x + h, n[0], n[1]}, n[2], n[3]};
}

inline bool inside(const GeodesicState& s, double margin) {
  const double lim = kHalfPi - margin;
  return std::isfinite(s.base.x) && std::isfinite(s.base.y) && std::isfinite(s.base.v) &&
         std::isfinite(s.y_x) && std::isfinite(s.v_x) && std::abs(s.base.x) <= lim &&
         std::abs(s.base.y) <= lim;
}

inline void check_step(double step) {
  if (!(std::abs(step) > 0.0 && std::abs(step) <= kMaxStep)) {
    throw std::invalid_argument("integrate: |step| must lie in (0, 0.01]");
  }
}

/// One RK4 step with failures mapped to IntegrationError.
inline GeodesicState guarded_step(const GeodesicState& s, double h, double margin,
                                  const Trajectory& traj) {
  GeodesicState next;
  try {
    next = rk4_step(s, h, margin);
  } catch (const StageOutside& e) {
    throw IntegrationError(IntegrationFailure::DomainExit, s.base.x,
                           "RK stage at y = " + std::to_string(e.y) + " outside pole margin", traj);
  } catch (const SingularSystem& e) {
    throw IntegrationError(IntegrationFailure::SingularSystem, s.base.x, e.what(), traj);
  } catch (const DomainError& e) {
    throw IntegrationError(IntegrationFailure::DomainExit, s.base.x, e.what(), traj);
  }
  if (!inside(next, margin)) {
    throw IntegrationError(IntegrationFailure::DomainExit, s.base.x,
                           "pole margin breached or state not finite", traj);
  }
  return next;
}

}  // namespace detail

/// Fixed-step RK4 from s0.base.x to x_end; the step is shrunk so the last
/// sample lands on x_end exactly.
inline Trajectory integrate(const GeodesicState& s0, double x_end, double step = kDefaultStep,
                            double pole_margin = kPoleMargin) {
  detail::check_step(step);
  Trajectory traj;
  if (!detail::inside(s0, pole_margin)) {
    throw IntegrationError(IntegrationFailure::DomainExit, s0.base.x,
                           "initial state outside pole margin", traj);
  }
  traj.push(s0);
  const double span = x_end - s0.base.x;
  if (span == 0.0) return traj;
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(span) / std::abs(step) - 1e-9));
  const double h = span / static_cast<double>(n);
  GeodesicState s = s0;
  for (std::size_t i = 1; i <= n; ++i) {
    s = detail::guarded_step(s, h, pole_margin, traj);
    if (i == n) s.base.x = x_end;
    traj.push(s);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// great circles and chart <-> ambient transport

inline AmbientPoint4 great_circle(const AmbientPoint4& p, const AmbientPoint4& w, double t) {
  constexpr double tol = 1e-10;
  if (std::abs(norm(p) - 1.0) > tol || std::abs(norm(w) - 1.0) > tol || std::abs(dot(p, w)) > tol) {
    throw std::invalid_argument("great_circle: need |p| = |w| = 1 and p . w = 0");
  }
  const double c = std::cos(t), s = std::sin(t);
  return {c * p[0] + s * w[0], c * p[1] + s * w[1], c * p[2] + s * w[2], c * p[3] + s * w[3]};
}

/// Unit ambient tangent of the chart curve, oriented along increasing x when
/// direction > 0.
inline AmbientPoint4 unit_tangent(const GeodesicState& s, double direction) {
  AmbientPoint4 vel = ambient_velocity(s);
  const double scale = (direction >= 0.0 ? 1.0 : -1.0) / norm(vel);
  for (auto& c : vel) c *= scale;
  return vel;
}

/// Chart jet of the great circle cos(t) p + sin(t) w at t. v is unwrapped to
/// the branch nearest v_hint.
inline GeodesicState jet_on_great_circle(const AmbientPoint4& p, const AmbientPoint4& w, double t,
                                         double v_hint) {
  D1 tt(t, 1.0);
  D1 c = cos(tt), s = sin(tt);
  Ambient<D1> q;
  for (std::size_t i = 0; i < 4; ++i) q[i] = c * D1(p[i]) + s * D1(w[i]);
  D1 rho = sqrt(q[0] * q[0] + q[1] * q[1]);
  D1 x = asin(q[3]);
  D1 y = atan2(q[2], rho);
  D1 v = atan2(q[1], q[0]);
  double vv = v.val + kTwoPi * std::round((v_hint - v.val) / kTwoPi);
  return {{x.val, y.val, vv}, y.der / x.der, v.der / x.der};
}

/// Where a great circle sits relative to its x turning points. The ambient
/// height is x4(t) = amplitude * cos(t - phase).
struct CircleHeight {
  double amplitude = 0.0;
  double phase = 0.0;

  static CircleHeight of(const AmbientPoint4& p, const AmbientPoint4& w) {
    return {std::hypot(p[3], w[3]), std::atan2(w[3], p[3])};
  }
  /// First t > 0 at which x4 is stationary.
  double first_turn() const {
    double t = std::fmod(phase, std::numbers::pi);
    if (t <= 0.0) t += std::numbers::pi;
    return t;
  }
  /// t in [lo, hi] with x4(t) = target, if any.
  std::optional<double> solve_in(double target, double lo, double hi) const {
    if (amplitude <= 0.0 || std::abs(target) > amplitude) return std::nullopt;
    const double a = std::acos(target / amplitude);
    constexpr double slack = 1e-12;
    for (int n = -2; n <= static_cast<int>(hi / kTwoPi) + 2; ++n) {
      for (double cand : {phase + a + kTwoPi * n, phase - a + kTwoPi * n}) {
        if (cand >= lo - slack && cand <= hi + slack) return cand;
      }
    }
    return std::nullopt;
  }
};

/// Ambient point of the great circle through s0 (initial direction given by
/// the sign of direction) on its piece-th x-monotone piece at chart height x.
inline std::optional<AmbientPoint4> oracle_point(const GeodesicState& s0, double direction,
                                                 std::size_t piece, double x) {
  const AmbientPoint4 p = embed(s0.base);
  const AmbientPoint4 w = unit_tangent(s0, direction);
  const CircleHeight h = CircleHeight::of(p, w);
  const double t1 = h.first_turn();
  const double lo = piece == 0 ? 0.0 : t1 + std::numbers::pi * static_cast<double>(piece - 1);
  const double hi = t1 + std::numbers::pi * static_cast<double>(piece);
  auto t = h.solve_in(std::sin(x), lo, hi);
  if (!t) return std::nullopt;
  return great_circle(p, w, *t);
}

struct PiecewiseOptions {
  double pole_margin = kPoleMargin;
  /// Bridge to the next piece once the turning point in x is this close.
  double turn_margin = 0.1;
};

/// A geodesic as x-monotone pieces; pieces[i + 1] starts where the transport
/// across the i-th turning point lands.
///
/// The per-sample charge is taken in the x parametrization, so it changes sign
/// on pieces where x decreases along the curve; directions[i] undoes that.
struct GeodesicRun {
  std::vector<Trajectory> pieces;
  std::vector<double> directions;
  double initial_direction = 1.0;
  std::size_t steps = 0;

  const GeodesicState& final_state() const { return pieces.back().back(); }
  double max_noether_drift() const {
    const double c0 = directions.front() * pieces.front().diagnostics.front().noether_c;
    double m = 0.0;
    for (std::size_t i = 0; i < pieces.size(); ++i)
      for (const auto& d : pieces[i].diagnostics)
        m = std::max(m, std::abs(directions[i] * d.noether_c - c0));
    return m;
  }
};

/**
 * Runs exactly `steps` RK4 steps of size |step| starting in the given x
 * direction. When the current state is within turn_margin (in x) of its
 * turning point, it is carried along its own great circle to the mirror point
 * at the same height and integration continues with x running the other way.
 */
inline GeodesicRun integrate_steps(const GeodesicState& s0, double direction, std::size_t steps,
                                   double step = kDefaultStep, PiecewiseOptions opt = {}) {
  detail::check_step(step);
  GeodesicRun run;
  run.initial_direction = direction >= 0.0 ? 1.0 : -1.0;
  double dir = run.initial_direction;
  const double h = std::abs(step);

  Trajectory piece;
  if (!detail::inside(s0, opt.pole_margin)) {
    throw IntegrationError(IntegrationFailure::DomainExit, s0.base.x,
                           "initial state outside pole margin", piece);
  }
  piece.push(s0);
  GeodesicState s = s0;
  while (run.steps < steps) {
    const AmbientPoint4 p = embed(s.base);
    const AmbientPoint4 w = unit_tangent(s, dir);
    const CircleHeight ch = CircleHeight::of(p, w);
    const double x_turn = dir * std::asin(std::min(1.0, ch.amplitude));
    if (std::abs(x_turn - s.base.x) < opt.turn_margin + h) {
      run.pieces.push_back(std::move(piece));
      run.directions.push_back(dir);
      piece = Trajectory{};
      s = jet_on_great_circle(p, w, 2.0 * ch.first_turn(), s.base.v);
      dir = -dir;
      if (!detail::inside(s, opt.pole_margin)) {
        throw IntegrationError(IntegrationFailure::DomainExit, s.base.x,
                               "transported state outside pole margin", piece);
      }
      piece.push(s);
      continue;
    }
    s = detail::guarded_step(s, dir * h, opt.pole_margin, piece);
    piece.push(s);
    ++run.steps;
  }
  run.pieces.push_back(std::move(piece));
  run.directions.push_back(dir);
  return run;
}

/// Ambient distance between the run's final point and the exact great circle.
inline double oracle_endpoint_error(const GeodesicState& s0, const GeodesicRun& run) {
  auto q = oracle_point(s0, run.initial_direction, run.pieces.size() - 1, run.final_state().base.x);
  if (!q) return std::numeric_limits<double>::infinity();
  AmbientPoint4 e = embed(run.final_state().base);
  double d2 = 0.0;
  for (std::size_t i = 0; i < 4; ++i) d2 += square(e[i] - (*q)[i]);
  return std::sqrt(d2);
}

}  // namespace glome
