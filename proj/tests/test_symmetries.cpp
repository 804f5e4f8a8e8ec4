#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "glome/geodesics.hpp"
#include "glome/symmetries.hpp"
#include "oracles.hpp"

using namespace glome;

namespace {

double max_abs(const std::array<double, 3>& a) {
  return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])});
}

std::array<double, 3> sub(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

}  // namespace

TEST(Chi, Chi3AndChi6) {
  for (const auto& p : sample_domain(20, 0.1, 1)) {
    auto c3 = chi(3)(p.coords());
    EXPECT_DOUBLE_EQ(c3[0], std::sin(p.y));
    EXPECT_DOUBLE_EQ(c3[1], -std::cos(p.y) * std::tan(p.x));
    EXPECT_EQ(c3[2], 0.0);
    EXPECT_EQ(chi(6)(p.coords()), (std::array<double, 3>{0, 0, 1}));
  }
  auto c1 = chi(1)(std::array<double, 3>{0.5, 0.0, 0.0});
  EXPECT_EQ(c1, (std::array<double, 3>{1, 0, 0}));
}

TEST(Chi, IndexOutOfRange) {
  EXPECT_THROW(chi(0), std::out_of_range);
  EXPECT_THROW(chi(7), std::out_of_range);
}

TEST(GeneralSymmetry, LinearityAndZero) {
  auto pts = sample_domain(100, 0.1, 2);
  auto z = general_symmetry({0, 0, 0, 0, 0});
  auto one = general_symmetry({1, 0, 0, 0, 0});
  auto c1 = chi(1);
  for (const auto& p : pts) {
    EXPECT_EQ(max_abs(z(p.coords())), 0.0);
    EXPECT_LE(max_abs(sub(one(p.coords()), c1(p.coords()))), 1e-15);
  }
}

TEST(GeneralSymmetry, SolvesDeterminingEquations) {
  auto V = general_symmetry({0.3, -1.2, 0.5, 2.0, -0.7});
  for (const auto& p : sample_domain(100, 0.1, 3)) {
    for (double r : determining_residuals(V, p)) ASSERT_LT(std::abs(r), 1e-9);
  }
}

TEST(GeneralSymmetry, RandomCoefficientVectors) {
  SampleRng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<double, 5> k{};
    for (auto& c : k) c = rng.uniform(-2.0, 2.0);
    auto V = general_symmetry(k);
    for (const auto& p : sample_domain(100, 0.1, 100 + trial)) {
      for (double r : determining_residuals(V, p)) ASSERT_LT(std::abs(r), 1e-9);
    }
  }
}

TEST(DeterminingResiduals, HandExamples) {
  for (double r : determining_residuals(chi(6), {0.2, -0.4, 1.0})) EXPECT_EQ(r, 0.0);
  VectorField3 V{ScalarField([](auto, auto y, auto) { return y; }), ScalarField::constant(0.0),
                 ScalarField::constant(0.0)};
  auto r = determining_residuals(V, {0.3, 0.4, 0.0});
  EXPECT_EQ(r[1], 1.0);
}

TEST(Prolong1, Examples) {
  Jet1 j{{0.4, -0.2, 3.0}, 0.9, -1.3};
  auto p6 = prolong1(chi(6), j);
  EXPECT_EQ(p6.xi, 0.0);
  EXPECT_EQ(p6.phi, 0.0);
  EXPECT_EQ(p6.eta, 1.0);
  EXPECT_EQ(p6.phi_x, 0.0);
  EXPECT_EQ(p6.eta_x, 0.0);

  VectorField3 V{ScalarField::constant(0.0), ScalarField([](auto, auto y, auto) { return y; }),
                 ScalarField::constant(0.0)};
  auto pv = prolong1(V, Jet1{{0.1, 0.2, 0.3}, 2.0, 0.0});
  EXPECT_EQ(pv.phi_x, 2.0);
}

TEST(Prolong1, Chi3MatchesFiniteDifferenceAlongCurve) {
  const double x = 0.4, y = 0.2, v = 1.0, yx = 0.5, vx = -0.3, yxx = 0.8;
  Jet1 j{{x, y, v}, yx, vx};
  // Plain-double chi_3 along y(s) = y + yx s + yxx s^2 / 2.
  auto xi = [](double, double yy) { return std::sin(yy); };
  auto phi = [](double xx, double yy) { return -std::tan(xx) * std::cos(yy); };
  auto g = [&](double s) {
    double ys = y + yx * s + 0.5 * yxx * s * s;
    double yps = yx + yxx * s;
    return phi(x + s, ys) - xi(x + s, ys) * yps;
  };
  double ref = oracle::central_diff(g, 0.0, 1e-5) + xi(x, y) * yxx;
  EXPECT_NEAR(prolong1(chi(3), j).phi_x, ref, 1e-6);
}

TEST(VariationalResidual, Chi6IsExactlyZero) {
  for (const auto& j : sample_jets(50, 0.1, 2.0, 4)) EXPECT_EQ(variational_residual(chi(6), j), 0.0);
}

TEST(VariationalResidual, AllGeneratorsSatisfyCriterion) {
  auto jets = sample_jets(1000, 0.1, 2.0, 5);
  for (int i = 1; i <= 6; ++i) {
    auto V = chi(i);
    double worst = 0;
    for (const auto& j : jets) worst = std::max(worst, std::abs(variational_residual(V, j)));
    EXPECT_LT(worst, 1e-9) << "chi" << i;
  }
}

TEST(VariationalResidual, XTranslationIsNotASymmetry) {
  VectorField3 V(ScalarField::constant(1.0), ScalarField::constant(0.0), ScalarField::constant(0.0));
  EXPECT_GT(std::abs(variational_residual(V, Jet1{{0.5, 0.2, 0}, 1, 1})), 1e-3);
}

TEST(LieBracket, Examples) {
  auto pts = sample_domain(100, 0.1, 6);
  auto c1 = chi(1), c2 = chi(2), c3 = chi(3), c6 = chi(6);
  auto xx = lie_bracket(c1, c1);
  auto b12 = lie_bracket(c1, c2);
  auto b36 = lie_bracket(c3, c6);
  for (const auto& p : pts) {
    EXPECT_LE(max_abs(xx(p.coords())), 1e-15);
    auto e = c6(p.coords());
    auto b = b12(p.coords());
    EXPECT_LE(max_abs({b[0] + e[0], b[1] + e[1], b[2] + e[2]}), 1e-9);
    EXPECT_LE(max_abs(b36(p.coords())), 1e-15);
  }
}

TEST(LieBracket, BilinearAndAntisymmetric) {
  auto pts = sample_domain(100, 0.1, 8);
  auto X = chi(1), Y = chi(4), Z = chi(5);
  const double a = 0.7, b = -1.9;
  auto lhs = lie_bracket(VectorField3::combine(a, X, b, Y), Z);
  auto xz = lie_bracket(X, Z), yz = lie_bracket(Y, Z), zx = lie_bracket(Z, X);
  for (const auto& p : pts) {
    auto l = lhs(p.coords());
    auto r1 = xz(p.coords()), r2 = yz(p.coords()), r3 = zx(p.coords());
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(l[c], a * r1[c] + b * r2[c], 1e-12);
      EXPECT_NEAR(r1[c], -r3[c], 1e-12);
    }
  }
}

TEST(LieBracket, JacobiIdentity) {
  auto pts = sample_domain(100, 0.1, 9);
  for (int i = 1; i <= 6; ++i)
    for (int j = i + 1; j <= 6; ++j)
      for (int k = j + 1; k <= 6; ++k) {
        auto a = lie_bracket(chi(i), lie_bracket(chi(j), chi(k)));
        auto b = lie_bracket(chi(j), lie_bracket(chi(k), chi(i)));
        auto c = lie_bracket(chi(k), lie_bracket(chi(i), chi(j)));
        for (const auto& p : pts) {
          auto s = a(p.coords());
          auto t = b(p.coords());
          auto u = c(p.coords());
          ASSERT_LE(max_abs({s[0] + t[0] + u[0], s[1] + t[1] + u[1], s[2] + t[2] + u[2]}), 1e-8)
              << i << j << k;
        }
      }
}

TEST(LieBracket, DepthLimitIsReported) {
  auto b = lie_bracket(chi(1), chi(2));
  D3 z(D2(D1(0.1, 1.0), D1(0.0)), D2(D1(0.0)));
  EXPECT_THROW(b.xi()(z, z, z), DerivativeOrderError);
}

TEST(BracketTable, ReproducesSo4Table) {
  BracketTable t = bracket_table(50, 1e-8);
  const auto& ref = expected_brackets();
  for (int i = 1; i <= 6; ++i)
    for (int j = 1; j <= 6; ++j) {
      EXPECT_EQ(t.at(i, j).id, ref[i - 1][j - 1]) << "entry (" << i << "," << j << ")";
      EXPECT_LT(t.at(i, j).residual, 1e-8);
      EXPECT_EQ(t.at(i, j).id.index, t.at(j, i).id.index);
      EXPECT_EQ(t.at(i, j).id.sign, -t.at(j, i).id.sign);
    }
  EXPECT_TRUE(t.at(3, 6).id.is_zero());
  EXPECT_EQ(t.at(2, 6).id, BracketId::minus(1));
}

TEST(BracketTable, ZeroToleranceIsAmbiguous) {
  BracketIdentifier ident(20, 0.0);
  EXPECT_THROW(ident.identify(1, 2), AmbiguousIdentification);
  EXPECT_THROW(BracketIdentifier(5, 1e-8), std::invalid_argument);
}

TEST(BracketId, ParseRoundTrip) {
  for (const auto& row : expected_brackets())
    for (const auto& id : row) EXPECT_EQ(BracketId::parse(id.str()), id);
  EXPECT_THROW(BracketId::parse("+chi7"), std::invalid_argument);
}

TEST(Subgroups, ListedTriplesAreExactlyTheClosedOnes) {
  BracketIdentifier ident;
  EXPECT_TRUE(subgroup_closed({1, 2, 6}, ident));
  EXPECT_TRUE(subgroup_closed({4, 5, 6}, ident));
  EXPECT_FALSE(subgroup_closed({1, 2, 3}, ident));
  std::set<std::set<int>> closed;
  for (int a = 1; a <= 6; ++a)
    for (int b = a + 1; b <= 6; ++b)
      for (int c = b + 1; c <= 6; ++c)
        if (subgroup_closed({a, b, c}, ident)) closed.insert({a, b, c});
  EXPECT_EQ(closed, (std::set<std::set<int>>{{1, 2, 6}, {1, 3, 4}, {4, 5, 6}, {2, 3, 5}}));
  EXPECT_THROW(subgroup_closed({1, 2}, ident), std::invalid_argument);
  EXPECT_THROW(subgroup_closed({1, 2, 9}, ident), std::out_of_range);
}

TEST(Prolong2, TrivialCases) {
  Jet2 j{{{0.3, 0.1, 2.0}, 0.4, -0.5}, 1.2, 0.3};
  auto indep_of_v = [](auto x, auto y, auto, auto yx, auto vx, auto yxx, auto vxx) {
    return sin(x) * yx + y * y * vxx + vx * yxx;
  };
  EXPECT_EQ(prolong2_apply(chi(6), indep_of_v, j), 0.0);

  VectorField3 V(ScalarField::constant(0.0), ScalarField::constant(1.0), ScalarField::constant(0.0));
  auto yxx_only = [](auto, auto, auto, auto, auto, auto yxx, auto) { return yxx; };
  EXPECT_EQ(prolong2_apply(V, yxx_only, j), 0.0);
}

TEST(Prolong2, Chi3AnnihilatesCollapsedEquationOnShell) {
  const double k = 0.5;
  auto E = [k](auto x, auto y, auto, auto yx, auto, auto yxx, auto) {
    return collapsed_E(x, y, yx, yxx, k);
  };
  int used = 0;
  for (const auto& j1 : sample_jets(400, 0.1, 2.0, 12)) {
    const double x = j1.base.x, y = j1.base.y;
    const double a = std::pow(std::cos(x) * std::cos(y), 2);
    if (std::abs(a - k) < 0.05) continue;
    // E is affine in y_xx: solve E = 0.
    double e0 = collapsed_E(x, y, j1.y_x, 0.0, KConstant(k));
    double e1 = collapsed_E(x, y, j1.y_x, 1.0, KConstant(k)) - e0;
    Jet2 j{j1, -e0 / e1, 0.0};
    ASSERT_LT(std::abs(prolong2_apply(chi(3), E, j)), 1e-8);
    ++used;
  }
  EXPECT_GE(used, 200);
}

TEST(Prolong2, GeneratorsPreserveEulerLagrangeSystem) {
  auto el_y = [](auto x, auto y, auto v, auto yx, auto vx, auto yxx, auto vxx) {
    return euler_lagrange(x, y, v, yx, vx, yxx, vxx)[0];
  };
  auto el_v = [](auto x, auto y, auto v, auto yx, auto vx, auto yxx, auto vxx) {
    return euler_lagrange(x, y, v, yx, vx, yxx, vxx)[1];
  };
  auto jets = sample_jets(200, 0.1, 2.0, 13);
  for (int i = 1; i <= 6; ++i) {
    auto V = chi(i);
    double worst = 0;
    for (const auto& j1 : jets) {
      Jet2 j = on_shell(j1);
      worst = std::max({worst, std::abs(prolong2_apply(V, el_y, j)),
                        std::abs(prolong2_apply(V, el_v, j))});
    }
    EXPECT_LT(worst, 1e-7) << "chi" << i;
  }
}
