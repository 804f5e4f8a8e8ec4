#pragma once

/**
 * @file jet.hpp
 * @brief Forward-mode differentiation with nestable dual numbers.
 *
 * A Dual<T> carries a value and one directional derivative. Nesting
 * (Dual<Dual<double>>) yields second derivatives and mixed partials, which is
 * as high as the prolongation formulas ever need to go.
 *
 * Elementary functions check their open domains on the primal value and throw
 * DomainError instead of producing inf/nan. The checks live in the double
 * overloads, so every nesting level inherits them.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace glome {

/// Raised when an elementary function is evaluated outside its open domain.
class DomainError : public std::domain_error {
 public:
  DomainError(std::string function, double argument)
      : std::domain_error(format(function, argument)),
        function_(std::move(function)),
        argument_(argument) {}

  const std::string& function() const noexcept { return function_; }
  double argument() const noexcept { return argument_; }

 private:
  static std::string format(const std::string& function, double argument) {
    std::ostringstream os;
    os.precision(17);
    os << function << ": argument " << argument << " outside open domain";
    return os.str();
  }

  std::string function_;
  double argument_;
};

template <class T>
struct Dual {
  T val{};
  T der{};

  constexpr Dual() = default;
  constexpr Dual(T v, T d) : val(v), der(d) {}
  constexpr Dual(T v) : val(v), der{} {}  // NOLINT: constant lifting
  template <class U>
    requires(std::is_arithmetic_v<U> && !std::is_same_v<T, double>)
  constexpr Dual(U c) : val(c), der{} {}  // NOLINT: constant lifting

  static constexpr Dual variable(T v) { return {v, T(1.0)}; }
  static constexpr Dual constant(T v) { return {v, T{}}; }

  friend constexpr Dual operator+(const Dual& a, const Dual& b) {
    return {a.val + b.val, a.der + b.der};
  }
  friend constexpr Dual operator-(const Dual& a, const Dual& b) {
    return {a.val - b.val, a.der - b.der};
  }
  friend constexpr Dual operator-(const Dual& a) { return {-a.val, -a.der}; }
  friend constexpr Dual operator+(const Dual& a) { return a; }
  friend constexpr Dual operator*(const Dual& a, const Dual& b) {
    return {a.val * b.val, a.der * b.val + a.val * b.der};
  }
  friend constexpr Dual operator/(const Dual& a, const Dual& b) {
    T q = a.val / b.val;
    return {q, (a.der - q * b.der) / b.val};
  }

  constexpr Dual& operator+=(const Dual& o) { return *this = *this + o; }
  constexpr Dual& operator-=(const Dual& o) { return *this = *this - o; }
  constexpr Dual& operator*=(const Dual& o) { return *this = *this * o; }
  constexpr Dual& operator/=(const Dual& o) { return *this = *this / o; }
};

using D1 = Dual<double>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};
template <class T>
inline constexpr bool is_dual_v = is_dual<T>::value;

/// Nesting depth: 0 for double, 1 for D1, ...
template <class T>
struct dual_depth : std::integral_constant<int, 0> {};
template <class T>
struct dual_depth<Dual<T>>
    : std::integral_constant<int, 1 + dual_depth<T>::value> {};

constexpr double primal(double x) { return x; }
template <class T>
constexpr double primal(const Dual<T>& x) {
  return primal(x.val);
}

inline constexpr double kPoleEps = 1e-12;

// ---------------------------------------------------------------------------
// double overloads (domain checks live here)

inline double sin(double a) { return std::sin(a); }
inline double cos(double a) { return std::cos(a); }
inline double exp(double a) { return std::exp(a); }
inline double atan(double a) { return std::atan(a); }

inline double tan(double a) {
  if (std::abs(std::cos(a)) < kPoleEps) throw DomainError("tan", a);
  return std::tan(a);
}
inline double sec(double a) {
  double c = std::cos(a);
  if (std::abs(c) < kPoleEps) throw DomainError("sec", a);
  return 1.0 / c;
}
inline double sqrt(double a) {
  if (a < 0.0) throw DomainError("sqrt", a);
  return std::sqrt(a);
}
inline double log(double a) {
  if (a <= 0.0) throw DomainError("log", a);
  return std::log(a);
}
inline double asin(double a) {
  if (std::abs(a) > 1.0) throw DomainError("asin", a);
  return std::asin(a);
}
inline double acos(double a) {
  if (std::abs(a) > 1.0) throw DomainError("acos", a);
  return std::acos(a);
}
inline double atan2(double y, double x) {
  if (y == 0.0 && x == 0.0) throw DomainError("atan2", 0.0);
  return std::atan2(y, x);
}
inline double square(double a) { return a * a; }
inline double pow(double a, int n) { return std::pow(a, n); }

// ---------------------------------------------------------------------------
// dual overloads (chain rule)

template <class T> Dual<T> sin(const Dual<T>& a);
template <class T> Dual<T> cos(const Dual<T>& a);
template <class T> Dual<T> tan(const Dual<T>& a);
template <class T> Dual<T> sec(const Dual<T>& a);
template <class T> Dual<T> sqrt(const Dual<T>& a);
template <class T> Dual<T> exp(const Dual<T>& a);
template <class T> Dual<T> log(const Dual<T>& a);
template <class T> Dual<T> atan(const Dual<T>& a);
template <class T> Dual<T> asin(const Dual<T>& a);
template <class T> Dual<T> acos(const Dual<T>& a);
template <class T> Dual<T> atan2(const Dual<T>& y, const Dual<T>& x);
template <class T> Dual<T> square(const Dual<T>& a);
template <class T> Dual<T> pow(const Dual<T>& a, int n);

template <class T>
Dual<T> sin(const Dual<T>& a) {
  return {sin(a.val), a.der * cos(a.val)};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
  return {cos(a.val), -(a.der * sin(a.val))};
}
template <class T>
Dual<T> tan(const Dual<T>& a) {
  T t = tan(a.val);
  return {t, a.der * (T(1.0) + t * t)};
}
template <class T>
Dual<T> sec(const Dual<T>& a) {
  T s = sec(a.val);
  return {s, a.der * s * tan(a.val)};
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  if (primal(a.val) <= 0.0) throw DomainError("sqrt", primal(a.val));
  T s = sqrt(a.val);
  return {s, a.der / (T(2.0) * s)};
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.val);
  return {e, a.der * e};
}
template <class T>
Dual<T> log(const Dual<T>& a) {
  return {log(a.val), a.der / a.val};
}
template <class T>
Dual<T> atan(const Dual<T>& a) {
  return {atan(a.val), a.der / (T(1.0) + a.val * a.val)};
}
template <class T>
Dual<T> asin(const Dual<T>& a) {
  if (std::abs(primal(a.val)) >= 1.0) throw DomainError("asin", primal(a.val));
  return {asin(a.val), a.der / sqrt(T(1.0) - a.val * a.val)};
}
template <class T>
Dual<T> acos(const Dual<T>& a) {
  if (std::abs(primal(a.val)) >= 1.0) throw DomainError("acos", primal(a.val));
  return {acos(a.val), -(a.der / sqrt(T(1.0) - a.val * a.val))};
}
template <class T>
Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
  T r2 = x.val * x.val + y.val * y.val;
  return {atan2(y.val, x.val), (x.val * y.der - y.val * x.der) / r2};
}
template <class T>
Dual<T> square(const Dual<T>& a) {
  return a * a;
}
template <class T>
Dual<T> pow(const Dual<T>& a, int n) {
  if (n == 0) return Dual<T>(T(1.0));
  return {pow(a.val, n), a.der * T(static_cast<double>(n)) * pow(a.val, n - 1)};
}

// ---------------------------------------------------------------------------
// differentiation drivers

/// Gradient of f: T^N -> T at p, with derivatives expressed in T.
template <class T, std::size_t N, class F>
std::array<T, N> gradient_at(F&& f, const std::array<T, N>& p) {
  std::array<T, N> g{};
  for (std::size_t i = 0; i < N; ++i) {
    std::array<Dual<T>, N> args{};
    for (std::size_t k = 0; k < N; ++k) args[k] = Dual<T>(p[k], T(k == i ? 1.0 : 0.0));
    g[i] = std::apply(f, args).der;
  }
  return g;
}

template <std::size_t N, class F>
std::array<double, N> gradient(F&& f, const std::array<double, N>& p) {
  return gradient_at<double, N>(std::forward<F>(f), p);
}

/// (∂f/∂x, ∂f/∂y, ∂f/∂v) for f(x, y, v).
template <class F>
std::array<double, 3> grad3(F&& f, const std::array<double, 3>& p) {
  return gradient<3>(std::forward<F>(f), p);
}

/// Directional derivative of f at p along dir (one evaluation).
template <class T, std::size_t N, class F>
T directional_at(F&& f, const std::array<T, N>& p, const std::array<T, N>& dir) {
  std::array<Dual<T>, N> args{};
  for (std::size_t k = 0; k < N; ++k) args[k] = Dual<T>(p[k], dir[k]);
  return std::apply(f, args).der;
}

template <class T>
struct SecondPartial {
  T value;
  T d_i;
  T d_j;
  T d_ij;
};

/// f, ∂_i f, ∂_j f and ∂_i∂_j f at p from one doubly nested evaluation.
template <class T, std::size_t N, class F>
SecondPartial<T> second_partial_at(F&& f, const std::array<T, N>& p, std::size_t i,
                                   std::size_t j) {
  using Inner = Dual<T>;
  using Outer = Dual<Inner>;
  std::array<Outer, N> args{};
  for (std::size_t k = 0; k < N; ++k) {
    args[k] = Outer(Inner(p[k], T(k == j ? 1.0 : 0.0)), Inner(T(k == i ? 1.0 : 0.0), T{}));
  }
  Outer r = std::apply(f, args);
  return {r.val.val, r.der.val, r.val.der, r.der.der};
}

/// f''(x0) by nesting first-order duals.
template <class F>
double second_deriv(F&& f, double x0) {
  D2 x(D1(x0, 1.0), D1(1.0, 0.0));
  return f(x).der.der;
}

/// First and second derivative of a univariate function at t0, in T.
template <class T, class F>
std::pair<T, T> first_second_at(F&& f, T t0) {
  Dual<Dual<T>> t(Dual<T>(t0, T(1.0)), Dual<T>(T(1.0), T{}));
  auto r = f(t);
  return {r.val.der, r.der.der};
}

}  // namespace glome
