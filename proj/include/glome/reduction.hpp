#pragma once

// Canonical coordinates of chi_3, its global flow, the reduced first-order
// relation between omega'(tau), omega and tau, and the S^2 geodesic equation.

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
#include "glome/geodesics.hpp"
#include "glome/jet.hpp"

namespace glome {

struct PlanePoint {
  double x = 0.0;
  double y = 0.0;
};

/// omega = cos x cos y is invariant under chi_3; tau = arctan(cot x sin y)
/// is translated by the flow parameter.
struct CanonicalPair {
  double tau = 0.0;
  double omega = 0.0;
};

inline constexpr double kCotEps = 1e-12;

/// arctan(cos x sin y / sin x) taken through atan2 and folded to the principal
/// range (-pi/2, pi/2].
template <class T>
T canonical_tau(const T& x, const T& y) {
  if (std::abs(std::sin(primal(x))) < kCotEps) throw DomainError("canonical tau (cot x)", primal(x));
  T t = atan2(cos(x) * sin(y), sin(x));
  const double tp = primal(t);
  if (tp > kHalfPi) return t - T(std::numbers::pi);
  if (tp <= -kHalfPi) return t + T(std::numbers::pi);
  return t;
}

template <class T>
T canonical_omega(const T& x, const T& y) {
  return cos(x) * cos(y);
}

inline CanonicalPair canonical(const PlanePoint& p) {
  return {canonical_tau(p.x, p.y), canonical_omega(p.x, p.y)};
}

class BranchExit : public std::runtime_error {
 public:
  BranchExit(double lambda, double critical)
      : std::runtime_error(format(lambda, critical)), critical_(critical) {}
  double critical_lambda() const { return critical_; }

 private:
  static std::string format(double lambda, double critical) {
    std::ostringstream os;
    os.precision(17);
    os << "BranchExit: lambda = " << lambda << " beyond critical lambda " << critical;
    return os.str();
  }
  double critical_;
};

/// Open lambda-interval around 0 on which the flowed point keeps the sign of
/// sin x, so that tau stays on its principal branch. Degenerate at x = 0.
/// The arcsin and arctan arguments themselves stay in range for every lambda.
struct FlowWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double lambda) const { return lambda == 0.0 || (lambda > lo && lambda < hi); }
};

inline FlowWindow flow_window(const PlanePoint& p) {
  if (std::abs(std::sin(p.x)) < kCotEps) return {0.0, 0.0};
  const double tau = canonical_tau(p.x, p.y);
  return {-kHalfPi - tau, kHalfPi - tau};
}

/// Closed-form flow of chi_3 without window checks.
template <class T>
std::array<T, 2> flow_unchecked(const T& x, const T& y, const T& lambda) {
  T X = asin(sin(x) * cos(lambda) - cos(x) * sin(y) * sin(lambda));
  T Y = atan(tan(y) * cos(lambda) + tan(x) * sec(y) * sin(lambda));
  return {X, Y};
}

inline PlanePoint global_flow(const PlanePoint& p, double lambda) {
  FlowWindow w = flow_window(p);
  if (!w.contains(lambda)) throw BranchExit(lambda, lambda > 0.0 ? w.hi : w.lo);
  auto r = flow_unchecked(p.x, p.y, lambda);
  return {r[0], r[1]};
}

/**
 * (dX/dmu - sin Y, dY/dmu + tan X cos Y) for the closed form evaluated at
 * lambda = sense * mu, derivatives taken with duals at mu = lambda / sense.
 *
 * The closed form carries (x4, x3) = (sin x, cos x sin y) through a rotation
 * by +lambda, which is the flow of -chi_3: with sense = 1 the residuals are
 * (-2 sin Y, 2 tan X cos Y), and with sense = -1 they vanish.
 */
inline std::array<double, 2> flow_generator_check(const PlanePoint& p, double lambda = 0.0,
                                                  double sense = 1.0) {
  D1 mu(lambda / sense, 1.0);
  auto r = flow_unchecked(D1(p.x), D1(p.y), D1(sense) * mu);
  const double X = r[0].val, Y = r[1].val;
  return {r[0].der - std::sin(Y), r[1].der + tan(X) * std::cos(Y)};
}

// ---------------------------------------------------------------------------
// reduced first-order relation

enum class Branch { Plus, Minus };

inline char branch_symbol(Branch b) { return b == Branch::Plus ? '+' : '-'; }

class InversionDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// angle reduced modulo pi to (-pi/2, pi/2].
inline double fold_half_turn(double a) {
  double r = std::remainder(a, std::numbers::pi);
  if (r <= -kHalfPi) r += std::numbers::pi;
  return r;
}

/// omega^2 cos^2 tau + sin^2 tau
inline double q_factor(double tau, double omega) {
  const double c = std::cos(tau), s = std::sin(tau);
  return omega * omega * c * c + s * s;
}

/// arctan(omega / tan tau) modulo pi, written without dividing by tan tau.
inline double cot_phase(double tau, double omega) {
  return std::atan2(omega * std::cos(tau), std::sin(tau));
}

inline constexpr double kBranchSlack = 1e-9;

}  // namespace detail

/**
 * Inverts omega' = (1 - omega^2) tan[s arccos sqrt(R) + arctan(omega / tan tau)],
 *   R = (alpha - Q) / ((k / omega^2 - 1) Q),  Q = omega^2 cos^2 tau + sin^2 tau,
 * for alpha at one sample. The angle theta = s arccos sqrt(R) must be the
 * representative of arctan(omega' / (1 - omega^2)) - arctan(omega / tan tau)
 * (mod pi) lying in s [0, pi/2]; otherwise the sample is inconsistent with the
 * branch and InversionDomain is thrown.
 */
inline double alpha_from_sample(double tau, double omega, double omega_prime, const KConstant& k,
                                Branch branch) {
  if (!(omega > 0.0 && omega < 1.0)) throw InversionDomain("alpha_from_sample: omega outside (0, 1)");
  if (!std::isfinite(omega_prime)) throw InversionDomain("alpha_from_sample: omega' not finite");
  if (std::abs(std::sin(tau)) < kCotEps) throw InversionDomain("alpha_from_sample: tan tau = 0");
  const double kr = k.value() / (omega * omega) - 1.0;
  if (kr == 0.0) throw InversionDomain("alpha_from_sample: k / omega^2 = 1");
  const double theta = detail::fold_half_turn(std::atan(omega_prime / (1.0 - omega * omega)) -
                                              detail::cot_phase(tau, omega));
  const double s = branch == Branch::Plus ? 1.0 : -1.0;
  if (s * theta < -detail::kBranchSlack) {
    throw InversionDomain("alpha_from_sample: implied arccos argument negative on branch " +
                          std::string(1, branch_symbol(branch)));
  }
  const double c = std::cos(theta);
  const double q = detail::q_factor(tau, omega);
  return q * (1.0 + kr * c * c);
}

/// omega'(tau) from the reduced relation for given alpha.
inline double reduced_omega_prime(double tau, double omega, double alpha, const KConstant& k,
                                  Branch branch) {
  const double q = detail::q_factor(tau, omega);
  const double kr = k.value() / (omega * omega) - 1.0;
  const double r = (alpha - q) / (kr * q);
  if (!(r >= -detail::kBranchSlack && r <= 1.0 + detail::kBranchSlack)) {
    throw InversionDomain("reduced_omega_prime: arccos argument outside [0, 1]");
  }
  const double root = std::sqrt(std::clamp(r, 0.0, 1.0));
  const double s = branch == Branch::Plus ? 1.0 : -1.0;
  const double beta = std::atan(omega / std::tan(tau));
  return (1.0 - omega * omega) * std::tan(s * std::acos(root) + beta);
}

/// d omega / d tau along the chart curve through (x, y) with slope y_x.
inline double omega_prime(double x, double y, double y_x) {
  D1 X(x, 1.0), Y(y, y_x);
  D1 w = canonical_omega(X, Y);
  D1 t = canonical_tau(X, Y);
  return w.der / t.der;
}

/// y_xx - 2 y_x tan x - y_x^3 sin x cos x; zero on geodesics of the v = const
/// great 2-sphere.
template <class T>
T s2_residual(const T& x, const T& /*y*/, const T& y_x, const T& y_xx) {
  return y_xx - T(2.0) * y_x * tan(x) - y_x * y_x * y_x * sin(x) * cos(x);
}

inline double s2_residual(double x, double y, double y_x, double y_xx) {
  return s2_residual<double>(x, y, y_x, y_xx);
}

struct ReductionReport {
  double k = 0.0;
  Branch branch = Branch::Plus;
  double alpha_mean = 0.0;
  double alpha_rel_dev = 0.0;  ///< max |alpha - mean| / |mean|
  std::size_t samples = 0;     ///< samples used on the chosen branch
  std::size_t excluded = 0;    ///< samples rejected on the chosen branch
};

struct AlphaSeries {
  std::vector<double> alpha;
  std::size_t excluded = 0;

  double mean() const {
    double s = 0.0;
    for (double a : alpha) s += a;
    return alpha.empty() ? std::numeric_limits<double>::quiet_NaN() : s / alpha.size();
  }
  double rel_dev() const {
    if (alpha.empty()) return std::numeric_limits<double>::infinity();
    const double m = mean();
    double d = 0.0;
    for (double a : alpha) d = std::max(d, std::abs(a - m));
    return d / std::abs(m);
  }
};

inline AlphaSeries alpha_series(const std::vector<GeodesicState>& samples, const KConstant& k,
                                Branch branch) {
  AlphaSeries out;
  for (const auto& s : samples) {
    try {
      const double x = s.base.x, y = s.base.y;
      CanonicalPair c = canonical({x, y});
      const double wp = omega_prime(x, y, s.y_x);
      out.alpha.push_back(alpha_from_sample(c.tau, c.omega, wp, k, branch));
    } catch (const InversionDomain&) {
      ++out.excluded;
    } catch (const DomainError&) {
      ++out.excluded;
    }
  }
  return out;
}

/// Maps samples through canonical coordinates and picks the branch accepting
/// more samples, breaking ties by the smaller alpha deviation.
inline ReductionReport reduce_samples(const std::vector<GeodesicState>& samples, const KConstant& k) {
  AlphaSeries plus = alpha_series(samples, k, Branch::Plus);
  AlphaSeries minus = alpha_series(samples, k, Branch::Minus);
  bool take_plus = plus.alpha.size() != minus.alpha.size() ? plus.alpha.size() > minus.alpha.size()
                                                           : plus.rel_dev() <= minus.rel_dev();
  const AlphaSeries& chosen = take_plus ? plus : minus;
  ReductionReport r;
  r.k = k.value();
  r.branch = take_plus ? Branch::Plus : Branch::Minus;
  r.alpha_mean = chosen.mean();
  r.alpha_rel_dev = chosen.rel_dev();
  r.samples = chosen.alpha.size();
  r.excluded = chosen.excluded;
  return r;
}

inline ReductionReport reduce_trajectory(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("reduce_trajectory: empty trajectory");
  return reduce_samples(traj.samples, infer_k(traj.front()));
}

}  // namespace glome
