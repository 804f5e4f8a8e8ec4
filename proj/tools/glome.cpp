// Command-line front end: verification suites, bracket table, geodesic
// integration, reduction of trajectories and the chi_3 flow.
//
// Exit codes: 0 success, 1 failed check or runtime failure, 2 usage or
// configuration error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glome/geodesics.hpp"
#include "glome/io.hpp"
#include "glome/reduction.hpp"
#include "glome/symmetries.hpp"
#include "glome/verify.hpp"

namespace {

using glome::format_double;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Common {
  std::uint64_t seed = 1;
  std::size_t samples = 0;  // 0: suite defaults
  double margin = glome::kDefaultMargin;
  double step = glome::kDefaultStep;
  std::string out;
  bool json = false;
  std::vector<std::string> tol;

  glome::RunConfig config() const {
    glome::RunConfig c;
    c.seed = seed;
    if (samples > 0) c.samples = samples;
    c.margin = margin;
    c.step = step;
    c.out = out;
    for (const auto& t : tol) {
      auto eq = t.find('=');
      if (eq == std::string::npos || eq == 0) throw glome::ConfigError("--tol expects name=value, got '" + t + "'");
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(t.substr(eq + 1), &used);
        if (used != t.size() - eq - 1) throw std::invalid_argument(t);
      } catch (const std::exception&) {
        throw glome::ConfigError("--tol value is not a number in '" + t + "'");
      }
      c.tolerances[t.substr(0, eq)] = v;
    }
    c.validate();
    return c;
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "RNG seed");
  sub->add_option("--samples", c.samples, "sample count for every suite (default: per suite)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--margin", c.margin, "distance kept from the chart poles when sampling (rad)");
  sub->add_option("--step", c.step, "RK4 step in x");
  sub->add_option("--out", c.out, "output file");
  sub->add_flag("--json", c.json, "print JSON instead of text");
  sub->add_option("--tol", c.tol, "tolerance override name=value (name 'all' sets every check)");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
}

std::string sidecar_path(const std::string& csv) {
  const std::string ext = ".csv";
  if (csv.size() > ext.size() && csv.compare(csv.size() - ext.size(), ext.size(), ext) == 0) {
    return csv.substr(0, csv.size() - ext.size()) + ".json";
  }
  return csv + ".json";
}

json finite_or_null(double d) { return std::isfinite(d) ? json(d) : json(nullptr); }

// -- verify -------------------------------------------------------------------

int cmd_verify(const Common& common) {
  glome::RunConfig cfg = common.config();
  glome::VerifyReport rep = glome::run_verify(cfg);
  const std::string text = glome::to_json(rep, cfg).dump(2) + "\n";
  if (!cfg.out.empty()) write_file(cfg.out, text);
  if (common.json) {
    std::cout << text;
  } else {
    for (const auto& c : rep.checks) {
      char res[32] = "n/a";
      if (std::isfinite(c.max_residual)) std::snprintf(res, sizeof res, "%.3e", c.max_residual);
      std::printf("%-4s %-24s max_residual %-10s  tolerance %g%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                  res, c.tolerance, c.error.empty() ? "" : "  error: ", c.error.c_str());
    }
    std::printf("%s\n", rep.passed() ? "all checks passed" : "some checks failed");
  }
  return rep.passed() ? kOk : kFail;
}

// -- brackets -----------------------------------------------------------------

int cmd_brackets(const Common& common) {
  glome::RunConfig cfg = common.config();
  const std::size_t n = std::max<std::size_t>(cfg.count(glome::kBracketSamples), 10);
  glome::BracketTable t = glome::bracket_table(n, cfg.tolerance("bracket_table"), cfg.seed);
  bool matches = true;
  for (int i = 1; i <= 6; ++i)
    for (int j = 1; j <= 6; ++j) matches = matches && t.at(i, j).id == glome::expected_brackets()[i - 1][j - 1];
  json j = glome::to_json(t);
  j["matches_expected"] = matches;
  j["max_residual"] = t.max_residual();
  const std::string text = j.dump(2) + "\n";
  if (!cfg.out.empty()) write_file(cfg.out, text);
  if (common.json) {
    std::cout << text;
  } else {
    std::printf("%-8s", "[,]");
    for (int k = 1; k <= 6; ++k) std::printf("%-8s", ("chi" + std::to_string(k)).c_str());
    std::printf("\n");
    for (int i = 1; i <= 6; ++i) {
      std::printf("%-8s", ("chi" + std::to_string(i)).c_str());
      for (int k = 1; k <= 6; ++k) std::printf("%-8s", t.at(i, k).id.str().c_str());
      std::printf("\n");
    }
    std::printf("max identification residual %s; %s\n", format_double(t.max_residual()).c_str(),
                matches ? "matches the expected table" : "DIFFERS from the expected table");
  }
  return matches ? kOk : kFail;
}

// -- integrate ----------------------------------------------------------------

int cmd_integrate(const Common& common, const std::vector<double>& initial, double x_end) {
  glome::RunConfig cfg = common.config();
  if (initial.size() != 5) throw glome::ConfigError("--initial expects x,y,v,y_x,v_x");
  for (double d : initial)
    if (!std::isfinite(d)) throw glome::ConfigError("--initial values must be finite");
  if (!std::isfinite(x_end)) throw glome::ConfigError("--x-end must be finite");
  const glome::GeodesicState s0{{initial[0], initial[1], initial[2]}, initial[3], initial[4]};
  if (std::abs(s0.base.x) >= glome::kHalfPi || std::abs(s0.base.y) >= glome::kHalfPi) {
    throw glome::ConfigError("initial (x, y) outside the open chart domain");
  }
  const double direction = x_end >= s0.base.x ? 1.0 : -1.0;

  glome::Trajectory traj;
  std::string status = "ok", message;
  double x_reached = x_end;
  try {
    traj = glome::integrate(s0, x_end, direction * std::abs(cfg.step));
  } catch (const glome::IntegrationError& e) {
    traj = e.partial();
    status = glome::to_string(e.kind());
    message = e.what();
    x_reached = e.x_reached();
  }

  json side{{"status", status},
            {"partial", status != "ok"},
            {"initial", initial},
            {"x_end", x_end},
            {"x_reached", x_reached},
            {"step", std::abs(cfg.step)},
            {"samples", traj.size()}};
  if (!message.empty()) side["message"] = message;
  try {
    side["k"] = glome::infer_k(s0).value();
  } catch (const std::out_of_range& e) {
    side["k"] = nullptr;
    side["k_error"] = e.what();
  }
  if (!traj.empty()) {
    glome::GeodesicRun run;
    run.pieces.push_back(traj);
    run.directions.push_back(direction);
    run.initial_direction = direction;
    side["noether_drift"] = run.max_noether_drift();
    side["oracle_endpoint_error"] = finite_or_null(glome::oracle_endpoint_error(s0, run));
  }

  std::ostringstream csv;
  glome::write_csv(csv, traj);
  const std::string side_text = side.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << csv.str();
    std::cerr << side_text;
  } else {
    write_file(cfg.out, csv.str());
    write_file(sidecar_path(cfg.out), side_text);
    if (common.json) {
      std::cout << side_text;
    } else {
      std::printf("%s: %zu samples to %s, sidecar %s\n", status.c_str(), traj.size(), cfg.out.c_str(),
                  sidecar_path(cfg.out).c_str());
      if (!message.empty()) std::printf("%s\n", message.c_str());
    }
  }
  return status == "ok" ? kOk : kFail;
}

// -- reduce -------------------------------------------------------------------

int cmd_reduce(const Common& common, const std::string& path) {
  glome::RunConfig cfg = common.config();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw glome::ParseError("cannot open " + path);
  glome::Trajectory traj = glome::read_csv(in);
  glome::ReductionReport r = glome::reduce_trajectory(traj);
  const json j = glome::to_json(r);
  const std::string text = j.dump(2) + "\n";
  if (!cfg.out.empty()) write_file(cfg.out, text);
  const bool ok = r.samples > 0 && std::isfinite(r.alpha_rel_dev);
  if (common.json) {
    std::cout << text;
  } else {
    std::printf("k %s  branch %c  alpha %s  rel_dev %s  samples %zu  excluded %zu\n", format_double(r.k).c_str(),
                glome::branch_symbol(r.branch), format_double(r.alpha_mean).c_str(),
                format_double(r.alpha_rel_dev).c_str(), r.samples, r.excluded);
  }
  return ok ? kOk : kFail;
}

// -- flow ---------------------------------------------------------------------

int cmd_flow(const Common& common, const std::vector<double>& point, double lambda) {
  glome::RunConfig cfg = common.config();
  if (point.size() != 2) throw glome::ConfigError("--point expects x,y");
  const glome::PlanePoint p{point[0], point[1]};
  if (!(std::abs(p.x) < glome::kHalfPi && std::abs(p.y) < glome::kHalfPi)) {
    throw glome::ConfigError("--point outside the open chart domain");
  }
  const glome::PlanePoint q = glome::global_flow(p, lambda);
  const double omega_res = glome::canonical_omega(q.x, q.y) - glome::canonical_omega(p.x, p.y);
  json j{{"point", point}, {"lambda", lambda}, {"X", q.x}, {"Y", q.y}, {"omega_residual", omega_res}};
  double tau_res = std::nan("");
  try {
    tau_res = glome::canonical_tau(q.x, q.y) - (glome::canonical_tau(p.x, p.y) + lambda);
    j["tau_residual"] = tau_res;
  } catch (const glome::DomainError& e) {
    // x = 0 has no tau; only the invariant is meaningful there
    j["tau_residual"] = nullptr;
  }
  const std::string text = j.dump(2) + "\n";
  if (!cfg.out.empty()) write_file(cfg.out, text);
  if (common.json) {
    std::cout << text;
  } else {
    std::printf("X %s\nY %s\nomega residual %s\ntau residual %s\n", format_double(q.x).c_str(),
                format_double(q.y).c_str(), format_double(omega_res).c_str(),
                std::isnan(tau_res) ? "n/a" : format_double(tau_res).c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetries and geodesics of the 3-sphere in hyperspherical coordinates"};
  app.require_subcommand(1);

  Common common;
  std::vector<double> initial, point;
  double x_end = 0.0, lambda = 0.0;
  std::string csv_path;

  auto* verify = app.add_subcommand("verify", "run every verification suite");
  auto* brackets = app.add_subcommand("brackets", "identify the 6x6 Lie bracket table");
  auto* integrate = app.add_subcommand("integrate", "integrate a geodesic in x with RK4");
  auto* reduce = app.add_subcommand("reduce", "reduce a trajectory CSV through canonical coordinates");
  auto* flow = app.add_subcommand("flow", "evaluate the global flow of chi_3");
  for (auto* sub : {verify, brackets, integrate, reduce, flow}) add_common(sub, common);

  integrate->add_option("--initial", initial, "initial state x,y,v,y_x,v_x")
      ->required()
      ->delimiter(',')
      ->expected(5);
  integrate->add_option("--x-end", x_end, "final x")->required();
  reduce->add_option("csv", csv_path, "trajectory CSV")->required();
  flow->add_option("--point", point, "x,y")->required()->delimiter(',')->expected(2);
  flow->add_option("--lambda", lambda, "flow parameter")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*verify) return cmd_verify(common);
    if (*brackets) return cmd_brackets(common);
    if (*integrate) return cmd_integrate(common, initial, x_end);
    if (*reduce) return cmd_reduce(common, csv_path);
    if (*flow) return cmd_flow(common, point, lambda);
  } catch (const glome::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kUsage;
  } catch (const glome::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
