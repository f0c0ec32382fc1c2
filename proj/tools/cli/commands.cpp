#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "thetaem/gamma.hpp"

namespace thetaem::cli {

namespace fs = std::filesystem;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::string out;
};

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  return f;
}

double F_squared(const SdeModel& model, std::span<const double> x0, const SchemeConfig& s) {
  double sq = 0.0;
  for (double v : f_map(model, x0, 0.0, s.theta, s.dt)) sq += v * v;
  return sq;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out) {
  const auto model = cfg.make_model();
  auto csv = open_output(cfg.out_dir, "trajectory.csv");
  csv << "path_id,k,t";
  for (std::size_t i = 0; i < model->state_dim(); ++i) csv << ",x" << i;
  csv << '\n';

  const std::size_t d = model->state_dim();
  std::uint64_t frozen = 0;
  for (std::uint64_t p = 0; p < cfg.n_paths; ++p) {
    const auto traj = simulate_path(*model, cfg.x0, cfg.scheme, cfg.n_steps, p);
    const std::uint64_t last = traj.status == PathStatus::Active ? cfg.n_steps : traj.frozen_at;
    if (traj.status != PathStatus::Active) ++frozen;
    for (std::uint64_t k = 0; k <= last; ++k) {
      csv << p << ',' << k << ',' << format_real(static_cast<double>(k) * cfg.scheme.dt);
      for (std::size_t i = 0; i < d; ++i) csv << ',' << format_real(traj.states[k * d + i]);
      csv << '\n';
    }
  }
  out << "simulate paths=" << cfg.n_paths << " steps=" << cfg.n_steps << " frozen=" << frozen
      << " out=" << (cfg.out_dir / "trajectory.csv").string() << '\n';
  return frozen == cfg.n_paths ? kDegenerate : kOk;
}

// Analytic bound column; empty when the constants needed are absent.
std::vector<double> bound_column(const ExperimentConfig& cfg, const SdeModel& model,
                                 const MomentSeries& s) {
  std::vector<double> col(s.size(), std::nan(""));
  const auto& a = cfg.analysis;
  if (!a.epsilon || !(cfg.scheme.theta > 0.5) || s.size() == 0) return col;
  const double fsq = F_squared(model, cfg.x0, cfg.scheme);
  const std::uint64_t k_max = s.k.back();
  if (a.axis == RateAxis::LogTime) {
    if (!cfg.constants.K1) return col;
    const auto curve = polynomial_bound_curve(fsq, cfg.constants.C, *cfg.constants.K1, *a.epsilon,
                                              cfg.scheme.theta, cfg.scheme.dt, k_max);
    for (std::size_t i = 0; i < s.size(); ++i) col[i] = curve.bound[s.k[i]];
  } else {
    const double rate = cfg.constants.C * (1.0 - *a.epsilon);
    for (std::size_t i = 0; i < s.size(); ++i) col[i] = fsq * std::exp(-rate * s.t[i]);
  }
  return col;
}

int cmd_estimate_rate(const ExperimentConfig& cfg, int workers, std::ostream& out) {
  const auto model = cfg.make_model();
  const auto series =
      estimate_moments(*model, cfg.x0, cfg.scheme, cfg.n_steps, cfg.n_paths, {workers});
  const auto bound = bound_column(cfg, *model, series);
  {
    auto csv = open_output(cfg.out_dir, "moments.csv");
    csv << "k,t,moment,stderr,n_alive,bound\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      csv << series.k[i] << ',' << format_real(series.t[i]) << ',' << format_real(series.moment[i])
          << ',' << format_real(series.stderr_[i]) << ',' << series.n_alive[i] << ','
          << format_real(bound[i]) << '\n';
    }
  }

  const auto& a = cfg.analysis;
  std::ostringstream line;
  line << "rate axis=" << (a.axis == RateAxis::LogTime ? "log-time" : "linear-time")
       << " dt=" << format_real(cfg.scheme.dt) << " n_paths=" << cfg.n_paths
       << " frozen=" << (series.size() ? series.n_frozen.back() : cfg.n_paths);
  int code = series.truncated ? kDegenerate : kOk;
  try {
    const auto fit = fit_rate(series, a.axis, a.fit_window);
    line << " slope=" << format_real(fit.slope) << " stderr=" << format_real(fit.slope_stderr)
         << " window=" << series.k[fit.first] << ".." << series.k[fit.last]
         << " r2=" << format_real(fit.r_squared);
    std::optional<double> target;
    if (a.epsilon) {
      if (a.axis == RateAxis::LogTime && cfg.constants.K1) {
        target = -(*cfg.constants.K1 - 1.0 - *a.epsilon);
      } else if (a.axis == RateAxis::LinearTime && cfg.constants_given) {
        target = -cfg.constants.C * (1.0 - *a.epsilon);
      }
    }
    if (target) {
      const bool ok = fit.slope <= *target + 3.0 * fit.slope_stderr;
      line << " target=" << format_real(*target)
           << " bound=" << (ok ? "satisfied" : "violated");
    }
  } catch (const std::invalid_argument& e) {
    line << " status=no-fit";
    code = kDegenerate;
  }
  const std::string summary = line.str();
  open_output(cfg.out_dir, "rate.txt") << summary << '\n';
  out << summary << '\n';
  return code;
}

std::string format_point(const std::vector<double>& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ';';
    s += format_real(x[i]);
  }
  return s;
}

int cmd_check(const ExperimentConfig& cfg, std::ostream& out) {
  const auto model = cfg.make_model();
  std::vector<ConditionReport> reports;
  for (auto id : cfg.check.conditions) {
    reports.push_back(check_condition(*model, id, cfg.constants, cfg.check.grid));
  }
  if (cfg.check.inequality) {
    reports.push_back(check_theorem_inequality(*model, *cfg.check.inequality, cfg.scheme.theta,
                                               cfg.scheme.dt, *cfg.analysis.epsilon,
                                               cfg.constants, cfg.check.grid));
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-20s %-9s %24s %24s %24s %10s\n", "condition", "status",
                "margin", "worst_x", "worst_t", "samples");
  out << buf;
  auto csv = open_output(cfg.out_dir, "check.csv");
  csv << "condition,holds,margin,worst_x,worst_y,worst_t,lhs,rhs,samples\n";
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-20s %-9s %24s %24s %24s %10zu\n", r.condition.c_str(),
                  r.holds ? "holds" : "violated", format_real(r.margin).c_str(),
                  format_point(r.worst_x).c_str(), format_real(r.worst_t).c_str(), r.samples);
    out << buf;
    csv << r.condition << ',' << (r.holds ? "true" : "false") << ',' << format_real(r.margin)
        << ',' << format_point(r.worst_x) << ',' << format_point(r.worst_y) << ','
        << format_real(r.worst_t) << ',' << format_real(r.worst_lhs) << ','
        << format_real(r.worst_rhs) << ',' << r.samples << '\n';
  }
  return kOk;
}

int cmd_diverge(const ExperimentConfig& cfg, int workers, std::ostream& out) {
  const auto& p = cfg.model.poly;
  const auto& d = cfg.diverge;
  const auto report =
      d.regime == DivergenceRegime::Superlinear
          ? divergence_superlinear(p, cfg.scheme.dt, d.horizon, cfg.n_paths, d.x1_multiple,
                                   cfg.scheme.seed, {workers})
          : divergence_sublinear(p, cfg.scheme.dt, d.horizon, cfg.n_paths, d.x1_multiple,
                                 cfg.scheme.seed, {workers});
  std::ostringstream set;
  set << to_string(d.regime) << " a=" << p.a << " b=" << p.b << " c=" << p.c << " q=" << p.q
      << " gamma=" << p.gamma << " dt=" << cfg.scheme.dt << " horizon=" << report.horizon;
  auto csv = open_output(cfg.out_dir, "divergence.csv");
  csv << "param_set,p_hat,stderr,bound,alpha,log_bound,x1,survivors,n_paths\n";
  csv << set.str() << ',' << format_real(report.p_hat) << ',' << format_real(report.p_stderr)
      << ',' << format_real(report.bound) << ',' << format_real(report.alpha) << ','
      << format_real(report.log_bound) << ',' << format_real(report.x1) << ','
      << report.survivors << ',' << report.n_paths << '\n';
  const bool consistent = report.p_hat + 3.0 * report.p_stderr >= report.bound;
  out << "diverge " << set.str() << " p_hat=" << format_real(report.p_hat)
      << " stderr=" << format_real(report.p_stderr) << " bound=" << format_real(report.bound)
      << " alpha=" << format_real(report.alpha)
      << " consistent=" << (consistent ? "yes" : "no") << '\n';
  return kOk;
}

int cmd_gamma_verify(const std::optional<fs::path>& out_dir, std::ostream& out) {
  const auto product = verify_product_grid();
  const auto ratio = verify_ratio_grid();
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-6s %8s %9s %24s\n", "grid", "status", "points",
                "failures", "worst");
  out << buf;
  const std::pair<const char*, const GridCheck*> rows[] = {{"product-identity", &product},
                                                           {"ratio-bounds", &ratio}};
  for (const auto& [name, g] : rows) {
    std::snprintf(buf, sizeof buf, "%-16s %-6s %8zu %9zu %24s\n", name,
                  g->passed() ? "pass" : "FAIL", g->points, g->failures,
                  format_real(g->worst).c_str());
    out << buf;
  }
  if (out_dir) {
    auto csv = open_output(*out_dir, "gamma_verify.csv");
    csv << "grid,passed,points,failures,worst\n";
    for (const auto& [name, g] : rows) {
      csv << name << ',' << (g->passed() ? "true" : "false") << ',' << g->points << ','
          << g->failures << ',' << format_real(g->worst) << '\n';
    }
  }
  return product.passed() && ratio.passed() ? kOk : kCheckFailed;
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("THETA_EM_SEED");
  if (!v || !*v) return std::nullopt;
  std::uint64_t seed = 0;
  const std::string s(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ConfigError("THETA_EM_SEED", "expected a non-negative integer, got '" + s + "'");
  }
  return seed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"theta-EM stability laboratory", "thetaem"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "experiment config file");
  app.add_option("--seed", g.seed, "RNG seed (overrides the config and THETA_EM_SEED)");
  app.add_option("--workers", g.workers, "worker threads (0: runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "output directory");

  auto* simulate = app.add_subcommand("simulate", "write sample trajectories");
  auto* rate = app.add_subcommand("estimate-rate", "estimate the mean-square decay rate");
  auto* check = app.add_subcommand("check", "check stability conditions on a grid");
  auto* diverge = app.add_subcommand("diverge", "explicit-scheme divergence experiment");
  auto* gamma = app.add_subcommand("gamma-verify", "verify the gamma identities on fixed grids");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    Overrides ov;
    ov.seed = g.seed;
    ov.env_seed = env_seed();
    if (!g.out.empty()) ov.out_dir = g.out;

    if (gamma->parsed()) {
      return cmd_gamma_verify(ov.out_dir, out);
    }
    if (g.config.empty()) throw ConfigError("--config", "a config file is required");
    Command command = Command::Simulate;
    if (rate->parsed()) command = Command::EstimateRate;
    if (check->parsed()) command = Command::Check;
    if (diverge->parsed()) command = Command::Diverge;
    const auto cfg = load_config(g.config, command, ov);

    switch (command) {
      case Command::Simulate:
        (void)simulate;
        return cmd_simulate(cfg, out);
      case Command::EstimateRate:
        return cmd_estimate_rate(cfg, g.workers, out);
      case Command::Check:
        return cmd_check(cfg, out);
      case Command::Diverge:
        return cmd_diverge(cfg, g.workers, out);
      case Command::GammaVerify:
        break;
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDegenerate;
  }
}

}  // namespace thetaem::cli
