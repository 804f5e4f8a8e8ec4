#pragma once

// Vector fields xi d/dx + phi d/dy + eta d/dv on chart space, stored as
// evaluable coefficient functions. Each coefficient can be evaluated at
// double and at nested duals up to depth 3, which covers second
// prolongations and brackets of brackets.

#include <array>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <type_traits>
#include <utility>

#include "glome/jet.hpp"

namespace glome {

template <class T>
concept FieldScalar = std::is_same_v<T, double> || std::is_same_v<T, D1> ||
                      std::is_same_v<T, D2> || std::is_same_v<T, D3>;

/// Raised when a composed field would need a deeper dual than is supported.
class DerivativeOrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ScalarField {
 public:
  /// f must be callable as f(T, T, T) -> T for every FieldScalar T.
  template <class F>
    requires(!std::is_same_v<std::decay_t<F>, ScalarField>)
  explicit ScalarField(F f) : impl_(std::make_shared<const Model<std::decay_t<F>>>(std::move(f))) {}

  static ScalarField constant(double c) {
    return ScalarField([c](auto x, auto, auto) { return decltype(x)(c); });
  }

  template <FieldScalar T>
  T operator()(const T& x, const T& y, const T& v) const {
    return impl_->eval(x, y, v);
  }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual double eval(const double&, const double&, const double&) const = 0;
    virtual D1 eval(const D1&, const D1&, const D1&) const = 0;
    virtual D2 eval(const D2&, const D2&, const D2&) const = 0;
    virtual D3 eval(const D3&, const D3&, const D3&) const = 0;
  };

  template <class F>
  struct Model final : Concept {
    explicit Model(F fn) : f(std::move(fn)) {}
    double eval(const double& x, const double& y, const double& v) const override {
      return f(x, y, v);
    }
    D1 eval(const D1& x, const D1& y, const D1& v) const override { return f(x, y, v); }
    D2 eval(const D2& x, const D2& y, const D2& v) const override { return f(x, y, v); }
    D3 eval(const D3& x, const D3& y, const D3& v) const override { return f(x, y, v); }
    F f;
  };

  std::shared_ptr<const Concept> impl_;
};

class VectorField3 {
 public:
  VectorField3(ScalarField xi, ScalarField phi, ScalarField eta)
      : c_{std::move(xi), std::move(phi), std::move(eta)} {}

  static VectorField3 zero() {
    return {ScalarField::constant(0.0), ScalarField::constant(0.0), ScalarField::constant(0.0)};
  }

  const ScalarField& xi() const { return c_[0]; }
  const ScalarField& phi() const { return c_[1]; }
  const ScalarField& eta() const { return c_[2]; }
  const ScalarField& component(std::size_t i) const { return c_.at(i); }

  template <FieldScalar T>
  std::array<T, 3> operator()(const T& x, const T& y, const T& v) const {
    return {c_[0](x, y, v), c_[1](x, y, v), c_[2](x, y, v)};
  }
  std::array<double, 3> operator()(const std::array<double, 3>& p) const {
    return (*this)(p[0], p[1], p[2]);
  }

  friend VectorField3 operator+(const VectorField3& a, const VectorField3& b) {
    return combine(1.0, a, 1.0, b);
  }
  friend VectorField3 operator-(const VectorField3& a, const VectorField3& b) {
    return combine(1.0, a, -1.0, b);
  }
  friend VectorField3 operator*(double s, const VectorField3& a) {
    return combine(s, a, 0.0, zero());
  }
  friend VectorField3 operator-(const VectorField3& a) { return (-1.0) * a; }

  /// sa * a + sb * b, coefficientwise.
  static VectorField3 combine(double sa, const VectorField3& a, double sb, const VectorField3& b) {
    auto lin = [sa, sb](ScalarField fa, ScalarField fb) {
      return ScalarField([sa, sb, fa, fb](auto x, auto y, auto v) {
        using T = decltype(x);
        return T(sa) * fa(x, y, v) + T(sb) * fb(x, y, v);
      });
    };
    return {lin(a.c_[0], b.c_[0]), lin(a.c_[1], b.c_[1]), lin(a.c_[2], b.c_[2])};
  }

 private:
  std::array<ScalarField, 3> c_;
};

/// [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i, evaluated pointwise. Each directional
/// derivative is a single dual evaluation seeded with the other field.
inline VectorField3 lie_bracket(const VectorField3& X, const VectorField3& Y) {
  auto coeff = [X, Y](std::size_t i) {
    return ScalarField([X, Y, i](auto x, auto y, auto v) -> decltype(x) {
      using T = decltype(x);
      if constexpr (std::is_same_v<T, D3>) {
        throw DerivativeOrderError("lie_bracket: evaluation depth exhausted");
      } else {
        using U = Dual<T>;
        auto xv = X(x, y, v);
        auto yv = Y(x, y, v);
        T x_dy = Y.component(i)(U(x, xv[0]), U(y, xv[1]), U(v, xv[2])).der;
        T y_dx = X.component(i)(U(x, yv[0]), U(y, yv[1]), U(v, yv[2])).der;
        return x_dy - y_dx;
      }
    });
  };
  return {coeff(0), coeff(1), coeff(2)};
}

}  // namespace glome
