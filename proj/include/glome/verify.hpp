#pragma once

/**
 * @file verify.hpp
 * @brief Verification suites behind `glome verify`.
 *
 * Each check samples its own inputs from the run seed, reports the largest
 * residual it saw, and passes when that residual is at most its tolerance.
 * Reports contain no timing or environment data, so equal configs give
 * byte-identical output.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "glome/chart.hpp"
#include "glome/geodesic_sampling.hpp"
#include "glome/geodesics.hpp"
#include "glome/io.hpp"
#include "glome/reduction.hpp"
#include "glome/symmetries.hpp"

namespace glome {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Check names in report order with their default tolerances.
inline const std::vector<std::pair<std::string, double>>& default_tolerances() {
  static const std::vector<std::pair<std::string, double>> t{
      {"determining_equations", 1e-9},
      {"variational_criterion", 1e-9},
      {"bracket_antisymmetry", 1e-12},
      {"jacobi_identity", 1e-8},
      {"bracket_table", 1e-8},
      {"subgroup_closure", 0.0},
      {"euler_lagrange_symmetry", 1e-7},
      {"pr2_chi3_E", 1e-8},
      {"omega_chi3_invariance", 1e-12},
      {"flow_omega_invariance", 1e-12},
      {"flow_tau_shift", 1e-9},
      {"flow_group_property", 1e-9},
      {"noether_drift", 1e-8},
      {"unit_speed", 1e-10},
      {"oracle_equivalence", 1e-7},
      {"collapsed_E", 1e-7},
      {"infer_k_grid_oracle", 1e-3},
      {"slice_v_x", 1e-10},
      {"s2_inheritance", 1e-8},
      {"alpha_constancy", 1e-5},
  };
  return t;
}

struct RunConfig {
  std::uint64_t seed = 1;
  /// Overrides every suite's sample count when set.
  std::optional<std::size_t> samples;
  double margin = kDefaultMargin;
  double step = kDefaultStep;
  /// check name -> tolerance; the key "all" sets every check.
  std::map<std::string, double> tolerances;
  std::string out;

  void validate() const {
    if (!(std::abs(step) > 0.0 && std::abs(step) <= kMaxStep)) throw ConfigError("step must lie in (0, 0.01]");
    if (!(margin > 0.0 && margin < kHalfPi)) throw ConfigError("margin must lie in (0, pi/2)");
    if (samples && *samples < 1) throw ConfigError("samples must be at least 1");
    for (const auto& [name, tol] : tolerances) {
      if (!(tol >= 0.0)) throw ConfigError("tolerance for " + name + " must be >= 0");
      if (name == "all") continue;
      const auto& d = default_tolerances();
      if (std::none_of(d.begin(), d.end(), [&](const auto& e) { return e.first == name; })) {
        throw ConfigError("unknown check name '" + name + "'");
      }
    }
  }

  double tolerance(const std::string& name) const {
    if (auto it = tolerances.find(name); it != tolerances.end()) return it->second;
    if (auto it = tolerances.find("all"); it != tolerances.end()) return it->second;
    for (const auto& [n, t] : default_tolerances())
      if (n == name) return t;
    throw ConfigError("unknown check name '" + name + "'");
  }

  std::size_t count(std::size_t default_count) const { return samples.value_or(default_count); }
};

struct Check {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::size_t count = 0;
  bool passed = false;
  std::string error;  ///< set when the check could not be evaluated
};

struct VerifyReport {
  std::vector<Check> checks;
  std::optional<BracketTable> brackets;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  const Check& check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw std::out_of_range("no check named " + name);
  }
};

namespace detail {

/// Accumulates the largest absolute residual of one check.
struct Worst {
  double value = 0.0;
  std::size_t count = 0;

  void add(double r) {
    r = std::abs(r);
    if (!(r <= value)) value = r;  // NaN sticks
    ++count;
  }
};

template <class F>
Check run_check(const RunConfig& cfg, const std::string& name, F&& body) {
  Check c;
  c.name = name;
  c.tolerance = cfg.tolerance(name);
  try {
    Worst w = body(c.tolerance);
    c.max_residual = w.value;
    c.count = w.count;
    c.passed = w.value <= c.tolerance;
  } catch (const std::exception& e) {
    c.max_residual = std::numeric_limits<double>::infinity();
    c.passed = false;
    c.error = e.what();
  }
  return c;
}

inline std::uint64_t suite_seed(const RunConfig& cfg, std::uint64_t salt) {
  return cfg.seed * 0x9e3779b97f4a7c15ULL + salt;
}

struct FlowTriple {
  PlanePoint p;
  double lambda;
};

/// In-window (x, y, lambda) triples kept 0.1 inside the window and with the
/// flowed point clear of the poles.
inline std::vector<FlowTriple> sample_flow_triples(std::size_t n, double margin, std::uint64_t seed) {
  SampleRng rng(seed);
  const double lim = kHalfPi - margin;
  std::vector<FlowTriple> out;
  while (out.size() < n) {
    PlanePoint p{rng.uniform(-lim, lim), rng.uniform(-lim, lim)};
    if (std::abs(std::sin(p.x)) < 0.05) continue;
    FlowWindow w = flow_window(p);
    const double lam = rng.uniform(w.lo + 0.1, w.hi - 0.1);
    PlanePoint q = global_flow(p, lam);
    if (std::abs(q.x) > lim || std::abs(q.y) > lim || std::abs(std::sin(q.x)) < 1e-6) continue;
    out.push_back({p, lam});
  }
  return out;
}

/// Second-order jets solving E = 0 for k, skipping points where the y_xx
/// coefficient cos x cos y (cos^2 x cos^2 y - k) nearly vanishes.
inline std::vector<Jet2> on_shell_E_jets(std::size_t n, double k, double margin, std::uint64_t seed) {
  std::vector<Jet2> out;
  std::uint64_t round = 0;
  while (out.size() < n) {
    for (const auto& j1 : sample_jets(2 * n, margin, 2.0, seed + round++)) {
      const double x = j1.base.x, y = j1.base.y;
      const double a = square(std::cos(x) * std::cos(y));
      if (std::abs(a - k) < 0.05) continue;
      const double e0 = collapsed_E<double>(x, y, j1.y_x, 0.0, k);
      const double e1 = collapsed_E<double>(x, y, j1.y_x, 1.0, k) - e0;
      out.push_back({j1, -e0 / e1, 0.0});
      if (out.size() == n) break;
    }
  }
  return out;
}

/// Every grid k in [0, 1] (spacing 1e-4) whose max |E| along the samples is
/// within 1e-9 of the best; returns the largest distance from k to that set.
inline double grid_oracle_distance(const Trajectory& t, double k) {
  std::vector<Jet2> jets;
  for (const auto& s : t.samples) jets.push_back(on_shell(s));
  std::vector<double> score(10001);
  for (std::size_t i = 0; i < score.size(); ++i) {
    const double kk = static_cast<double>(i) * 1e-4;
    double m = 0.0;
    for (const auto& j : jets) {
      const auto& b = j.jet1.base;
      m = std::max(m, std::abs(collapsed_E<double>(b.x, b.y, j.jet1.y_x, j.y_xx, kk)));
    }
    score[i] = m;
  }
  const double best = *std::min_element(score.begin(), score.end());
  double d = 0.0;
  for (std::size_t i = 0; i < score.size(); ++i)
    if (score[i] <= best + 1e-9) d = std::max(d, std::abs(static_cast<double>(i) * 1e-4 - k));
  return d;
}

}  // namespace detail

inline VerifyReport run_verify(const RunConfig& cfg) {
  cfg.validate();
  using detail::run_check;
  using detail::suite_seed;
  using detail::Worst;
  VerifyReport rep;
  const double margin = cfg.margin;

  // -- symmetries ----------------------------------------------------------

  rep.checks.push_back(run_check(cfg, "determining_equations", [&](double) {
    Worst w;
    SampleRng rng(suite_seed(cfg, 1));
    const std::size_t vectors = cfg.count(20);
    for (std::size_t t = 0; t < vectors; ++t) {
      std::array<double, 5> k{};
      for (auto& c : k) c = rng.uniform(-2.0, 2.0);
      auto V = general_symmetry(k);
      for (const auto& p : sample_domain(cfg.count(100), margin, suite_seed(cfg, 100 + t)))
        for (double r : determining_residuals(V, p)) w.add(r);
    }
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "variational_criterion", [&](double) {
    Worst w;
    auto jets = sample_jets(cfg.count(1000), margin, 2.0, suite_seed(cfg, 2));
    for (int i = 1; i <= 6; ++i) {
      auto V = chi(i);
      for (const auto& j : jets) w.add(variational_residual(V, j));
    }
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "bracket_antisymmetry", [&](double) {
    Worst w;
    SampleRng rng(suite_seed(cfg, 3));
    auto pts = sample_domain(cfg.count(100), margin, suite_seed(cfg, 4));
    for (int i = 1; i <= 6; ++i)
      for (int j = 1; j <= 6; ++j) {
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        const int k = 1 + (i + j) % 6;
        auto ij = lie_bracket(chi(i), chi(j)), ji = lie_bracket(chi(j), chi(i));
        auto lin = lie_bracket(VectorField3::combine(a, chi(i), b, chi(k)), chi(j));
        auto kj = lie_bracket(chi(k), chi(j));
        for (const auto& p : pts) {
          auto u = ij(p.coords()), v = ji(p.coords()), l = lin(p.coords()), r = kj(p.coords());
          for (int c = 0; c < 3; ++c) {
            w.add(u[c] + v[c]);
            w.add(l[c] - (a * u[c] + b * r[c]));
          }
        }
      }
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "jacobi_identity", [&](double) {
    Worst w;
    auto pts = sample_domain(cfg.count(100), margin, suite_seed(cfg, 5));
    for (int i = 1; i <= 6; ++i)
      for (int j = i + 1; j <= 6; ++j)
        for (int k = j + 1; k <= 6; ++k) {
          auto a = lie_bracket(chi(i), lie_bracket(chi(j), chi(k)));
          auto b = lie_bracket(chi(j), lie_bracket(chi(k), chi(i)));
          auto c = lie_bracket(chi(k), lie_bracket(chi(i), chi(j)));
          for (const auto& p : pts) {
            auto s = a(p.coords()), t = b(p.coords()), u = c(p.coords());
            for (int d = 0; d < 3; ++d) w.add(s[d] + t[d] + u[d]);
          }
        }
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "bracket_table", [&](double tol) {
    const std::size_t n = std::max<std::size_t>(cfg.count(kBracketSamples), 10);
    BracketTable t = bracket_table(n, tol, suite_seed(cfg, 6));
    rep.brackets = t;
    Worst w;
    for (int i = 1; i <= 6; ++i)
      for (int j = 1; j <= 6; ++j) {
        if (t.at(i, j).id != expected_brackets()[i - 1][j - 1]) {
          throw std::runtime_error("entry (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") identified as " + t.at(i, j).id.str());
        }
        w.add(t.at(i, j).residual);
      }
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "subgroup_closure", [&](double) {
    // residual: number of triples classified differently from the listed four
    const std::set<std::set<int>> listed{{1, 2, 6}, {1, 3, 4}, {4, 5, 6}, {2, 3, 5}};
    BracketIdentifier ident(std::max<std::size_t>(cfg.count(kBracketSamples), 10), kBracketTol,
                            suite_seed(cfg, 7));
    Worst w;
    for (int a = 1; a <= 6; ++a)
      for (int b = a + 1; b <= 6; ++b)
        for (int c = b + 1; c <= 6; ++c) {
          const std::set<int> s{a, b, c};
          w.add(subgroup_closed(s, ident) == (listed.count(s) > 0) ? 0.0 : 1.0);
        }
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "euler_lagrange_symmetry", [&](double) {
    auto el_y = [](auto x, auto y, auto v, auto yx, auto vx, auto yxx, auto vxx) {
      return euler_lagrange(x, y, v, yx, vx, yxx, vxx)[0];
    };
    auto el_v = [](auto x, auto y, auto v, auto yx, auto vx, auto yxx, auto vxx) {
      return euler_lagrange(x, y, v, yx, vx, yxx, vxx)[1];
    };
    Worst w;
    auto jets = sample_jets(cfg.count(200), margin, 2.0, suite_seed(cfg, 8));
    for (int i = 1; i <= 6; ++i) {
      auto V = chi(i);
      for (const auto& j1 : jets) {
        Jet2 j = on_shell(j1);
        w.add(prolong2_apply(V, el_y, j));
        w.add(prolong2_apply(V, el_v, j));
      }
    }
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "pr2_chi3_E", [&](double) {
    Worst w;
    for (double k : {0.0, 0.25, 0.5, 0.9}) {
      auto E = [k](auto x, auto y, auto, auto yx, auto, auto yxx, auto) {
        return collapsed_E(x, y, yx, yxx, k);
      };
      for (const auto& j : detail::on_shell_E_jets(cfg.count(200), k, margin, suite_seed(cfg, 9)))
        w.add(prolong2_apply(chi(3), E, j));
    }
    return w;
  }));

  // -- reduction: flow ------------------------------------------------------

  rep.checks.push_back(run_check(cfg, "omega_chi3_invariance", [&](double) {
    Worst w;
    for (const auto& p : sample_domain(cfg.count(1000), margin, suite_seed(cfg, 10))) {
      D1 x(p.x, std::sin(p.y)), y(p.y, -std::cos(p.y) * tan(p.x));
      w.add(canonical_omega(x, y).der);
    }
    return w;
  }));

  const auto triples = detail::sample_flow_triples(cfg.count(1000), margin, suite_seed(cfg, 11));

  rep.checks.push_back(run_check(cfg, "flow_omega_invariance", [&](double) {
    Worst w;
    for (const auto& [p, lam] : triples) {
      PlanePoint q = global_flow(p, lam);
      w.add(canonical_omega(q.x, q.y) - canonical_omega(p.x, p.y));
    }
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "flow_tau_shift", [&](double) {
    Worst w;
    for (const auto& [p, lam] : triples) {
      PlanePoint q = global_flow(p, lam);
      w.add(canonical_tau(q.x, q.y) - (canonical_tau(p.x, p.y) + lam));
    }
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "flow_group_property", [&](double) {
    Worst w;
    SampleRng rng(suite_seed(cfg, 12));
    for (const auto& [p, lam] : triples) {
      const double l1 = lam * rng.unit();
      const double l2 = lam - l1;
      PlanePoint mid = global_flow(p, l1);
      if (!flow_window(mid).contains(l2)) continue;
      PlanePoint a = global_flow(mid, l2), b = global_flow(p, lam);
      w.add(a.x - b.x);
      w.add(a.y - b.y);
    }
    return w;
  }));

  // -- geodesics ------------------------------------------------------------

  const double h = std::abs(cfg.step);

  // Shared integrations; a failure here is reported by every check using them.
  struct Run {
    SampledGeodesic g;
    GeodesicRun run;
  };
  std::vector<Run> closed, spans, slices;
  std::string closed_err, span_err, slice_err;
  auto single = [](const SampledGeodesic& g, double step) {
    GeodesicRun r;
    r.pieces.push_back(integrate(g.s0, g.x_end, g.direction * step));
    r.directions.push_back(g.direction);
    r.initial_direction = g.direction;
    return r;
  };
  try {
    for (const auto& g : sample_closed_geodesics(cfg.count(50), suite_seed(cfg, 13)))
      closed.push_back({g, integrate_steps(g.s0, g.direction, 10000, h)});
  } catch (const std::exception& e) {
    closed_err = e.what();
  }
  try {
    for (const auto& g : sample_span_geodesics(cfg.count(50), 0.8, suite_seed(cfg, 14)))
      spans.push_back({g, single(g, h)});
  } catch (const std::exception& e) {
    span_err = e.what();
  }
  try {
    for (const auto& g : sample_slice_geodesics(cfg.count(20), 0.8, suite_seed(cfg, 15)))
      slices.push_back({g, single(g, h)});
  } catch (const std::exception& e) {
    slice_err = e.what();
  }
  auto require = [](const std::string& err) {
    if (!err.empty()) throw std::runtime_error(err);
  };

  rep.checks.push_back(run_check(cfg, "noether_drift", [&](double) {
    require(closed_err);
    Worst w;
    for (const auto& r : closed) w.add(r.run.max_noether_drift());
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "unit_speed", [&](double) {
    require(span_err);
    require(closed_err);
    Worst w;
    for (const auto* set : {&spans, &closed})
      for (const auto& r : *set)
        for (const auto& p : r.run.pieces)
          for (const auto& d : p.diagnostics) w.add(d.unit_speed_residual);
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "oracle_equivalence", [&](double) {
    require(span_err);
    require(closed_err);
    Worst w;
    for (const auto* set : {&spans, &closed})
      for (const auto& r : *set) w.add(oracle_endpoint_error(r.g.s0, r.run));
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "collapsed_E", [&](double) {
    require(span_err);
    Worst w;
    for (const auto& r : spans) {
      const double k = infer_k(r.g.s0).value();
      for (const auto& s : r.run.pieces.front().samples)
        w.add(collapsed_E<double>(s.base.x, s.base.y, s.y_x, el_rhs(s).y_xx, k));
    }
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "infer_k_grid_oracle", [&](double) {
    require(span_err);
    Worst w;
    const std::size_t n = std::min<std::size_t>(cfg.count(5), spans.size());
    for (std::size_t i = 0; i < n; ++i)
      w.add(detail::grid_oracle_distance(spans[i].run.pieces.front(), infer_k(spans[i].g.s0).value()));
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "slice_v_x", [&](double) {
    require(slice_err);
    Worst w;
    for (const auto& r : slices)
      for (const auto& s : r.run.pieces.front().samples) w.add(s.v_x);
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "s2_inheritance", [&](double) {
    require(slice_err);
    Worst w;
    for (const auto& r : slices)
      for (const auto& s : r.run.pieces.front().samples)
        w.add(s2_residual(s.base.x, s.base.y, s.y_x, el_rhs(s).y_xx));
    return w;
  }));

  rep.checks.push_back(run_check(cfg, "alpha_constancy", [&](double) {
    require(span_err);
    Worst w;
    for (const auto& r : spans) {
      ReductionReport red = reduce_trajectory(r.run.pieces.front());
      if (red.samples == 0) throw std::runtime_error("no sample accepted on either branch");
      w.add(red.alpha_rel_dev);
    }
    return w;
  }));

  // report order follows default_tolerances()
  std::vector<Check> ordered;
  for (const auto& [name, tol] : default_tolerances())
    for (const auto& c : rep.checks)
      if (c.name == name) ordered.push_back(c);
  rep.checks = std::move(ordered);
  return rep;
}

inline nlohmann::json to_json(const Check& c) {
  nlohmann::json j{{"name", c.name},
                   {"passed", c.passed},
                   {"tolerance", c.tolerance},
                   {"count", c.count}};
  if (std::isfinite(c.max_residual)) {
    j["max_residual"] = c.max_residual;
  } else {
    j["max_residual"] = nullptr;
  }
  if (!c.error.empty()) j["error"] = c.error;
  return j;
}

inline nlohmann::json to_json(const VerifyReport& r, const RunConfig& cfg) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  nlohmann::json config{{"seed", cfg.seed}, {"margin", cfg.margin}, {"step", cfg.step}};
  if (cfg.samples) config["samples"] = *cfg.samples;
  nlohmann::json j{{"config", config}, {"passed", r.passed()}, {"checks", checks}};
  j["bracket_table"] = r.brackets ? to_json(*r.brackets) : nlohmann::json(nullptr);
  if (r.brackets) {
    bool equal = true;
    for (int i = 1; i <= 6; ++i)
      for (int k = 1; k <= 6; ++k) equal = equal && r.brackets->at(i, k).id == expected_brackets()[i - 1][k - 1];
    j["bracket_table_matches_expected"] = equal;
  }
  return j;
}

}  // namespace glome
