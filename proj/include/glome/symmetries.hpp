#pragma once

/**
 * @file symmetries.hpp
 * @brief Variational point symmetries of the S^3 arclength functional.
 *
 * The six generators chi_1..chi_6 span so(4). This header provides their
 * first and second prolongations, the variational criterion
 * pr v(Lambda) + Lambda D_x xi, the six determining equations obtained from
 * the monomial coefficients in (y_x, v_x), and numerical identification of
 * Lie brackets against the candidate set {0, +-chi_k}.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "glome/chart.hpp"
#include "glome/jet.hpp"
#include "glome/vector_field.hpp"

namespace glome {

inline constexpr int kGeneratorCount = 6;

/// Generator chi_i, i in 1..6.
inline VectorField3 chi(int i) {
  auto f = [](auto fn) { return ScalarField(fn); };
  switch (i) {
    case 1:
      return {f([](auto, auto y, auto v) { return cos(v) * cos(y); }),
              f([](auto x, auto y, auto v) { return cos(v) * tan(x) * sin(y); }),
              f([](auto x, auto y, auto v) { return sin(v) * tan(x) * sec(y); })};
    case 2:
      return {f([](auto, auto y, auto v) { return sin(v) * cos(y); }),
              f([](auto x, auto y, auto v) { return sin(v) * tan(x) * sin(y); }),
              f([](auto x, auto y, auto v) { return -(cos(v) * tan(x) * sec(y)); })};
    case 3:
      return {f([](auto, auto y, auto) { return sin(y); }),
              f([](auto x, auto y, auto) { return -(tan(x) * cos(y)); }),
              ScalarField::constant(0.0)};
    case 4:
      return {ScalarField::constant(0.0), f([](auto, auto, auto v) { return cos(v); }),
              f([](auto, auto y, auto v) { return sin(v) * tan(y); })};
    case 5:
      return {ScalarField::constant(0.0), f([](auto, auto, auto v) { return sin(v); }),
              f([](auto, auto y, auto v) { return -(cos(v) * tan(y)); })};
    case 6:
      return {ScalarField::constant(0.0), ScalarField::constant(0.0),
              ScalarField::constant(1.0)};
    default:
      throw std::out_of_range("chi: generator index must be in 1..6, got " + std::to_string(i));
  }
}

/// sum_{i=1..5} k_i chi_i.
inline VectorField3 general_symmetry(const std::array<double, 5>& k) {
  std::array<VectorField3, 5> g{chi(1), chi(2), chi(3), chi(4), chi(5)};
  return {ScalarField([k, g](auto x, auto y, auto v) {
            using T = decltype(x);
            T s(0.0);
            for (std::size_t i = 0; i < 5; ++i) s = s + T(k[i]) * g[i].xi()(x, y, v);
            return s;
          }),
          ScalarField([k, g](auto x, auto y, auto v) {
            using T = decltype(x);
            T s(0.0);
            for (std::size_t i = 0; i < 5; ++i) s = s + T(k[i]) * g[i].phi()(x, y, v);
            return s;
          }),
          ScalarField([k, g](auto x, auto y, auto v) {
            using T = decltype(x);
            T s(0.0);
            for (std::size_t i = 0; i < 5; ++i) s = s + T(k[i]) * g[i].eta()(x, y, v);
            return s;
          })};
}

namespace detail {

inline std::array<double, 3> partials(const ScalarField& f, const ChartPoint& p) {
  return grad3([&f](auto x, auto y, auto v) { return f(x, y, v); }, p.coords());
}

}  // namespace detail

/// Components of pr^(1) v at a first-order jet.
struct Prolonged1 {
  double xi = 0.0;
  double phi = 0.0;
  double eta = 0.0;
  double phi_x = 0.0;  ///< coefficient of d/dy_x
  double eta_x = 0.0;  ///< coefficient of d/dv_x
  double total_xi = 0.0;  ///< D_x xi = xi_x + xi_y y_x + xi_v v_x
};

inline Prolonged1 prolong1(const VectorField3& V, const Jet1& j) {
  const auto& p = j.base;
  const double yx = j.y_x;
  const double vx = j.v_x;
  auto [xi_x, xi_y, xi_v] = detail::partials(V.xi(), p);
  auto [phi_x, phi_y, phi_v] = detail::partials(V.phi(), p);
  auto [eta_x, eta_y, eta_v] = detail::partials(V.eta(), p);

  Prolonged1 out;
  out.xi = V.xi()(p.x, p.y, p.v);
  out.phi = V.phi()(p.x, p.y, p.v);
  out.eta = V.eta()(p.x, p.y, p.v);
  out.phi_x = phi_x + phi_y * yx + phi_v * vx - (xi_x * yx + xi_y * yx * yx + xi_v * vx * yx);
  out.eta_x = eta_x + eta_y * yx + eta_v * vx - (xi_x * vx + xi_y * yx * vx + xi_v * vx * vx);
  out.total_xi = xi_x + xi_y * yx + xi_v * vx;
  return out;
}

/// pr^(1) v(Lambda) + Lambda D_x xi at j; zero iff the variational criterion
/// holds there.
inline double variational_residual(const VectorField3& V, const Jet1& j) {
  Prolonged1 pr = prolong1(V, j);
  auto grad = gradient<5>(
      [](auto x, auto y, auto v, auto yx, auto vx) { return lagrangian(x, y, v, yx, vx); },
      j.coords());
  double applied = pr.xi * grad[0] + pr.phi * grad[1] + pr.eta * grad[2] + pr.phi_x * grad[3] +
                   pr.eta_x * grad[4];
  return applied + lagrangian(j) * pr.total_xi;
}

/// Left sides of the determining equations (a)..(f), in that order.
inline std::array<double, 6> determining_residuals(const VectorField3& V, const ChartPoint& p) {
  auto [xi_x, xi_y, xi_v] = detail::partials(V.xi(), p);
  auto [phi_x, phi_y, phi_v] = detail::partials(V.phi(), p);
  auto [eta_x, eta_y, eta_v] = detail::partials(V.eta(), p);
  const double xi = V.xi()(p.x, p.y, p.v);
  const double phi = V.phi()(p.x, p.y, p.v);
  const double cx = std::cos(p.x);
  const double sx = std::sin(p.x);
  const double cy = std::cos(p.y);
  const double sy = std::sin(p.y);
  const double cx2 = cx * cx;
  const double cy2 = cy * cy;
  return {
      xi_x,
      phi_x * cx2 + xi_y,
      eta_x * cy2 * cx2 + xi_v,
      -xi * cx * sx + phi_y * cx2,
      -xi * sx * cy - phi * cx * sy + eta_v * cx * cy,
      eta_y * cx2 * cy2 + phi_v * cx2,
  };
}

/**
 * Applies pr^(2) V to F at a second-order jet.
 *
 * F is called as F(x, y, v, y_x, v_x, y_xx, v_xx) with dual arguments.
 * Second-order coefficients follow the jet recursion
 *   phi^xx = D_x(phi^x) - y_xx D_x xi = D_x^2 phi - y_x D_x^2 xi - 2 y_xx D_x xi
 * and analogously for eta^xx. D_x and D_x^2 of a coefficient g(x, y, v) are the
 * first and second derivatives of g along the osculating curve
 * s -> (x + s, y + y_x s + y_xx s^2 / 2, v + v_x s + v_xx s^2 / 2).
 */
template <class F>
double prolong2_apply(const VectorField3& V, F&& f, const Jet2& j) {
  const auto& b = j.jet1.base;
  const double yx = j.jet1.y_x;
  const double vx = j.jet1.v_x;
  const double yxx = j.y_xx;
  const double vxx = j.v_xx;

  auto along = [&](const ScalarField& g) {
    return first_second_at<double>(
        [&](auto s) {
          using T = decltype(s);
          return g(T(b.x) + s, T(b.y) + T(yx) * s + T(0.5 * yxx) * s * s,
                   T(b.v) + T(vx) * s + T(0.5 * vxx) * s * s);
        },
        0.0);
  };
  auto [dxi, ddxi] = along(V.xi());
  auto [dphi, ddphi] = along(V.phi());
  auto [deta, ddeta] = along(V.eta());

  const double xi = V.xi()(b.x, b.y, b.v);
  const double phi = V.phi()(b.x, b.y, b.v);
  const double eta = V.eta()(b.x, b.y, b.v);
  const double phi1 = dphi - yx * dxi;
  const double eta1 = deta - vx * dxi;
  const double phi2 = ddphi - yx * ddxi - 2.0 * yxx * dxi;
  const double eta2 = ddeta - vx * ddxi - 2.0 * vxx * dxi;

  auto g = gradient<7>(f, j.coords());
  return xi * g[0] + phi * g[1] + eta * g[2] + phi1 * g[3] + eta1 * g[4] + phi2 * g[5] +
         eta2 * g[6];
}

// ---------------------------------------------------------------------------
// bracket identification

/// 0 (index == 0) or sign * chi_index.
struct BracketId {
  int sign = 0;
  int index = 0;

  static constexpr BracketId zero() { return {0, 0}; }
  static constexpr BracketId plus(int k) { return {1, k}; }
  static constexpr BracketId minus(int k) { return {-1, k}; }

  bool is_zero() const { return index == 0; }
  friend bool operator==(const BracketId&, const BracketId&) = default;

  std::string str() const {
    if (is_zero()) return "zero";
    return std::string(sign > 0 ? "+" : "-") + "chi" + std::to_string(index);
  }

  static BracketId parse(const std::string& s) {
    if (s == "zero") return zero();
    if (s.size() == 5 && (s[0] == '+' || s[0] == '-') && s.compare(1, 3, "chi") == 0 &&
        s[4] >= '1' && s[4] <= '6') {
      return {s[0] == '+' ? 1 : -1, s[4] - '0'};
    }
    throw std::invalid_argument("BracketId: cannot parse '" + s + "'");
  }
};

class AmbiguousIdentification : public std::runtime_error {
 public:
  AmbiguousIdentification(int i, int j, double best, double runner_up, double tol)
      : std::runtime_error(format(i, j, best, runner_up, tol)) {}

 private:
  static std::string format(int i, int j, double best, double runner_up, double tol) {
    std::ostringstream os;
    os << "bracket [chi" << i << ", chi" << j << "]: best candidate residual " << best
       << ", next " << runner_up << ", tol " << tol;
    return os.str();
  }
};

struct BracketEntry {
  BracketId id;
  double residual = 0.0;
};

struct BracketTable {
  std::array<std::array<BracketEntry, 6>, 6> entries{};

  const BracketEntry& at(int i, int j) const { return entries.at(i - 1).at(j - 1); }

  double max_residual() const {
    double m = 0.0;
    for (const auto& row : entries)
      for (const auto& e : row) m = std::max(m, e.residual);
    return m;
  }
};

/// Structure constants of so(4) in the chi basis: entry (i, j) is [chi_i, chi_j].
inline const std::array<std::array<BracketId, 6>, 6>& expected_brackets() {
  using B = BracketId;
  static const std::array<std::array<BracketId, 6>, 6> table{{
      {B::zero(), B::minus(6), B::minus(4), B::plus(3), B::zero(), B::plus(2)},
      {B::plus(6), B::zero(), B::minus(5), B::zero(), B::plus(3), B::minus(1)},
      {B::plus(4), B::plus(5), B::zero(), B::minus(1), B::minus(2), B::zero()},
      {B::minus(3), B::zero(), B::plus(1), B::zero(), B::minus(6), B::plus(5)},
      {B::zero(), B::minus(3), B::plus(2), B::plus(6), B::zero(), B::minus(4)},
      {B::minus(2), B::plus(1), B::zero(), B::minus(5), B::plus(4), B::zero()},
  }};
  return table;
}

inline constexpr std::size_t kBracketSamples = 50;
inline constexpr double kBracketTol = 1e-8;

/// Matches a bracket field against {0, +-chi_k} over fixed sample points.
class BracketIdentifier {
 public:
  explicit BracketIdentifier(std::size_t samples = kBracketSamples, double tol = kBracketTol,
                             std::uint64_t seed = 0)
      : tol_(tol), points_(sample_domain(samples, kDefaultMargin, seed)) {
    if (samples < 10) throw std::invalid_argument("bracket identification needs >= 10 samples");
    for (int k = 1; k <= kGeneratorCount; ++k) {
      VectorField3 g = chi(k);
      auto& vals = chi_values_[k - 1];
      vals.reserve(points_.size());
      for (const auto& p : points_) vals.push_back(g(p.coords()));
    }
  }

  BracketEntry identify(int i, int j) const {
    VectorField3 b = lie_bracket(chi(i), chi(j));
    std::vector<std::array<double, 3>> vals;
    vals.reserve(points_.size());
    for (const auto& p : points_) vals.push_back(b(p.coords()));

    std::vector<std::pair<double, BracketId>> scored;
    scored.emplace_back(deviation(vals, nullptr, 0.0), BracketId::zero());
    for (int k = 1; k <= kGeneratorCount; ++k) {
      scored.emplace_back(deviation(vals, &chi_values_[k - 1], 1.0), BracketId::plus(k));
      scored.emplace_back(deviation(vals, &chi_values_[k - 1], -1.0), BracketId::minus(k));
    }
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const double best = scored[0].first;
    const double next = scored[1].first;
    if (!(best <= tol_) || !(next > 10.0 * tol_)) {
      throw AmbiguousIdentification(i, j, best, next, tol_);
    }
    return {scored[0].second, best};
  }

  std::size_t samples() const { return points_.size(); }
  double tol() const { return tol_; }

 private:
  double deviation(const std::vector<std::array<double, 3>>& vals,
                   const std::vector<std::array<double, 3>>* cand, double sign) const {
    double m = 0.0;
    for (std::size_t n = 0; n < vals.size(); ++n) {
      for (std::size_t c = 0; c < 3; ++c) {
        double ref = cand ? sign * (*cand)[n][c] : 0.0;
        m = std::max(m, std::abs(vals[n][c] - ref));
      }
    }
    return m;
  }

  double tol_;
  std::vector<ChartPoint> points_;
  std::array<std::vector<std::array<double, 3>>, 6> chi_values_;
};

inline BracketTable bracket_table(std::size_t samples = kBracketSamples, double tol = kBracketTol,
                                  std::uint64_t seed = 0) {
  BracketIdentifier ident(samples, tol, seed);
  BracketTable t;
  for (int i = 1; i <= kGeneratorCount; ++i)
    for (int j = 1; j <= kGeneratorCount; ++j) t.entries[i - 1][j - 1] = ident.identify(i, j);
  return t;
}

/// True iff every pairwise bracket of the three generators is 0 or +-chi_k with
/// k in the set.
inline bool subgroup_closed(const std::set<int>& indices,
                            const BracketIdentifier& ident = BracketIdentifier()) {
  if (indices.size() != 3) throw std::invalid_argument("subgroup_closed: need exactly 3 indices");
  for (int i : indices)
    if (i < 1 || i > kGeneratorCount) throw std::out_of_range("subgroup_closed: index outside 1..6");
  for (int i : indices) {
    for (int j : indices) {
      if (j <= i) continue;
      BracketId id = ident.identify(i, j).id;
      if (!id.is_zero() && !indices.contains(id.index)) return false;
    }
  }
  return true;
}

}  // namespace glome
