#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace thetaem::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"model", {"family", "a", "b", "c", "q", "gamma", "K1", "C", "lambda", "sigma"}},
      {"scheme",
       {"theta", "dt", "dt_max", "seed", "newton_tol", "newton_max_iter", "divergence_threshold"}},
      {"run", {"n_steps", "n_paths", "x0"}},
      {"analysis", {"axis", "fit_window", "epsilon", "theorem"}},
      {"constants", {"K1", "C", "L", "K"}},
      {"check",
       {"conditions", "inequality", "x_min", "x_max", "n_x", "t_min", "t_max", "n_t",
        "include_zero"}},
      {"diverge", {"regime", "horizon", "x1_multiple"}},
      {"output", {"dir"}},
  };
  return keys;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  bool has(const std::string& field) const { return tree_.get_optional<std::string>(field).has_value(); }

  std::optional<std::string> text(const std::string& field) const {
    auto v = tree_.get_optional<std::string>(field);
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::optional<double> real(const std::string& field) const {
    auto v = text(field);
    if (!v) return std::nullopt;
    return parse_real(field, *v);
  }

  double real_or(const std::string& field, double fallback) const {
    return real(field).value_or(fallback);
  }

  double real_required(const std::string& field) const {
    auto v = real(field);
    if (!v) throw ConfigError(field, "missing required value");
    return *v;
  }

  std::optional<std::uint64_t> count(const std::string& field) const {
    auto v = text(field);
    if (!v) return std::nullopt;
    return parse_u64(field, *v);
  }

  static double parse_real(const std::string& field, const std::string& s) {
    try {
      std::size_t used = 0;
      const double x = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      if (!std::isfinite(x)) throw ConfigError(field, "value must be finite");
      return x;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError(field, "expected a number, got '" + s + "'");
    }
  }

  static std::uint64_t parse_u64(const std::string& field, const std::string& s) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end || s.empty()) {
      throw ConfigError(field, "expected a non-negative integer, got '" + s + "'");
    }
    return v;
  }

 private:
  const pt::ptree& tree_;
};

void reject_unknown(const pt::ptree& tree) {
  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    auto it = keys.find(section);
    if (it == keys.end()) throw ConfigError(section, "unknown section");
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section, "key outside of any section");
    }
    for (const auto& [key, _] : body) {
      if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
    }
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ModelFamily parse_family(const std::string& s) {
  if (s == "poly") return ModelFamily::Poly;
  if (s == "time-decay") return ModelFamily::TimeDecay;
  if (s == "linear") return ModelFamily::Linear;
  if (s == "zero") return ModelFamily::Zero;
  throw ConfigError("model.family", "expected poly, time-decay, linear or zero, got '" + s + "'");
}

RateAxis parse_axis(const std::string& s) {
  if (s == "log-time" || s == "polynomial") return RateAxis::LogTime;
  if (s == "linear-time" || s == "exponential") return RateAxis::LinearTime;
  throw ConfigError("analysis.axis", "expected log-time or linear-time, got '" + s + "'");
}

template <class F>
auto rethrow_as(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

void read_model(const Reader& r, ExperimentConfig& cfg) {
  auto& m = cfg.model;
  m.family = parse_family(r.text("model.family").value_or("poly"));
  switch (m.family) {
    case ModelFamily::Poly:
      m.poly.a = r.real_or("model.a", 0.0);
      m.poly.b = r.real_or("model.b", 0.0);
      m.poly.c = r.real_or("model.c", 0.0);
      m.poly.q = r.real_or("model.q", 1.0);
      m.poly.gamma = r.real_or("model.gamma", 1.0);
      if (!(m.poly.q > 0.0)) throw ConfigError("model.q", "must be > 0");
      if (!(m.poly.gamma >= 0.5)) throw ConfigError("model.gamma", "must be >= 0.5");
      break;
    case ModelFamily::TimeDecay:
      m.K1 = r.real_required("model.K1");
      m.C = r.real_required("model.C");
      m.gamma = r.real_or("model.gamma", 1.0);
      if (!(m.K1 > 1.0)) throw ConfigError("model.K1", "must be > 1");
      if (!(m.C > 0.0)) throw ConfigError("model.C", "must be > 0");
      if (!(m.gamma >= 1.0)) throw ConfigError("model.gamma", "must be >= 1");
      break;
    case ModelFamily::Linear:
      m.lambda = r.real_required("model.lambda");
      m.sigma = r.real_or("model.sigma", 0.0);
      break;
    case ModelFamily::Zero:
      break;
  }
}

void read_constants(const Reader& r, ExperimentConfig& cfg) {
  auto& c = cfg.constants;
  cfg.constants_given = r.has("constants.K1") || r.has("constants.C") || r.has("constants.L") ||
                        r.has("constants.K");
  // The time-decay family carries its own decay constants.
  if (cfg.model.family == ModelFamily::TimeDecay) {
    c.K1 = cfg.model.K1;
    c.C = cfg.model.C;
    cfg.constants_given = true;
  }
  if (auto v = r.real("constants.K1")) c.K1 = *v;
  if (auto v = r.real("constants.C")) c.C = *v;
  if (auto v = r.real("constants.L")) c.L = *v;
  if (auto v = r.real("constants.K")) c.K = *v;
  if (c.K1 && !(*c.K1 > 1.0)) throw ConfigError("constants.K1", "must be > 1");
  if (!(c.C > 0.0)) throw ConfigError("constants.C", "must be > 0");
  if (c.K && !(*c.K > 0.0)) throw ConfigError("constants.K", "must be > 0");
}

void read_analysis(const Reader& r, ExperimentConfig& cfg) {
  auto& a = cfg.analysis;
  if (auto v = r.text("analysis.axis")) a.axis = parse_axis(*v);
  a.fit_window = r.real_or("analysis.fit_window", 0.5);
  if (!(a.fit_window > 0.0 && a.fit_window <= 1.0)) {
    throw ConfigError("analysis.fit_window", "must lie in (0, 1]");
  }
  a.epsilon = r.real("analysis.epsilon");
  if (auto v = r.text("analysis.theorem")) {
    a.theorem = rethrow_as("analysis.theorem", [&] { return parse_theorem(*v); });
  }
  if (a.epsilon) {
    const double eps = *a.epsilon;
    if (a.axis == RateAxis::LogTime) {
      if (!cfg.constants.K1) throw ConfigError("constants.K1", "required when analysis.epsilon is set");
      if (!(eps > 0.0 && eps < *cfg.constants.K1 - 1.0)) {
        throw ConfigError("analysis.epsilon", "must lie in (0, K1 - 1)");
      }
    } else if (!(eps > 0.0 && eps < 1.0)) {
      throw ConfigError("analysis.epsilon", "must lie in (0, 1)");
    }
  }
}

void read_scheme(const Reader& r, ExperimentConfig& cfg, bool need_dt) {
  auto& s = cfg.scheme;
  s.theta = r.real_or("scheme.theta", 1.0);
  if (!(s.theta >= 0.0 && s.theta <= 1.0)) throw ConfigError("scheme.theta", "must lie in [0, 1]");
  s.newton_tol = r.real_or("scheme.newton_tol", s.newton_tol);
  if (!(s.newton_tol > 0.0)) throw ConfigError("scheme.newton_tol", "must be > 0");
  if (auto v = r.count("scheme.newton_max_iter")) {
    if (*v < 1) throw ConfigError("scheme.newton_max_iter", "must be >= 1");
    s.newton_max_iter = static_cast<int>(std::min<std::uint64_t>(*v, 1000000));
  }
  s.divergence_threshold = r.real_or("scheme.divergence_threshold", s.divergence_threshold);
  if (!(s.divergence_threshold > 0.0)) {
    throw ConfigError("scheme.divergence_threshold", "must be > 0");
  }
  if (auto v = r.count("scheme.seed")) s.seed = *v;
  cfg.dt_max = r.real_or("scheme.dt_max", cfg.dt_max);
  if (!(cfg.dt_max > 0.0)) throw ConfigError("scheme.dt_max", "must be > 0");

  auto dt = r.text("scheme.dt");
  if (!dt) {
    if (need_dt) throw ConfigError("scheme.dt", "missing required value");
    return;
  }
  if (*dt == "auto") {
    cfg.dt_auto = true;
    return;
  }
  s.dt = Reader::parse_real("scheme.dt", *dt);
  if (!(s.dt > 0.0)) throw ConfigError("scheme.dt", "must be > 0");
}

// Resolves dt = auto after [analysis] and [constants] are known.
void resolve_auto_dt(ExperimentConfig& cfg) {
  if (!cfg.dt_auto) return;
  if (!cfg.analysis.theorem) throw ConfigError("analysis.theorem", "required when scheme.dt = auto");
  if (!cfg.analysis.epsilon) throw ConfigError("analysis.epsilon", "required when scheme.dt = auto");
  const double rec = rethrow_as("scheme.dt", [&] {
    return recommend_dt(*cfg.analysis.theorem, cfg.scheme.theta, *cfg.analysis.epsilon,
                        cfg.constants);
  });
  cfg.scheme.dt = std::min(rec, cfg.dt_max);
}

void read_run(const Reader& r, ExperimentConfig& cfg, std::size_t dim, bool need_steps) {
  auto steps = r.count("run.n_steps");
  if (need_steps) {
    if (!steps) throw ConfigError("run.n_steps", "missing required value");
    if (*steps < 1) throw ConfigError("run.n_steps", "must be >= 1");
    cfg.n_steps = *steps;
  }
  cfg.n_paths = r.count("run.n_paths").value_or(1);
  if (cfg.n_paths < 1) throw ConfigError("run.n_paths", "must be >= 1");
  cfg.x0.clear();
  if (auto v = r.text("run.x0")) {
    for (const auto& item : split_list(*v)) cfg.x0.push_back(Reader::parse_real("run.x0", item));
  } else {
    cfg.x0.assign(dim, 1.0);
  }
  if (cfg.x0.size() != dim) {
    throw ConfigError("run.x0", "expected " + std::to_string(dim) + " component(s)");
  }
}

void read_check(const Reader& r, ExperimentConfig& cfg) {
  auto& c = cfg.check;
  auto list = r.text("check.conditions");
  if (list) {
    for (const auto& name : split_list(*list)) {
      c.conditions.push_back(rethrow_as("check.conditions", [&] { return parse_condition_id(name); }));
    }
  }
  if (auto v = r.text("check.inequality")) {
    if (*v == "polynomial") {
      c.inequality = DecayForm::Polynomial;
    } else if (*v == "exponential") {
      c.inequality = DecayForm::Exponential;
    } else if (*v != "none") {
      throw ConfigError("check.inequality", "expected none, polynomial or exponential");
    }
  }
  if (c.conditions.empty() && !c.inequality) {
    throw ConfigError("check.conditions", "name at least one condition or set check.inequality");
  }
  if (c.inequality) {
    if (!cfg.analysis.epsilon) throw ConfigError("analysis.epsilon", "required by check.inequality");
    if (*c.inequality == DecayForm::Polynomial && !cfg.constants.K1) {
      throw ConfigError("constants.K1", "required by check.inequality = polynomial");
    }
  }
  for (auto id : c.conditions) {
    if (id == ConditionId::PolyDecay && !cfg.constants.K1) {
      throw ConfigError("constants.K1", "required by condition c1");
    }
    if ((id == ConditionId::GrowthPoly || id == ConditionId::GrowthExp) && !cfg.constants.K) {
      throw ConfigError("constants.K", "required by growth conditions");
    }
  }
  auto& g = c.grid;
  g.x_min = r.real_or("check.x_min", g.x_min);
  g.x_max = r.real_or("check.x_max", g.x_max);
  g.t_min = r.real_or("check.t_min", g.t_min);
  g.t_max = r.real_or("check.t_max", g.t_max);
  g.n_x = r.count("check.n_x").value_or(g.n_x);
  g.n_t = r.count("check.n_t").value_or(g.n_t);
  if (auto v = r.text("check.include_zero")) {
    if (*v == "true" || *v == "1") {
      g.include_zero = true;
    } else if (*v == "false" || *v == "0") {
      g.include_zero = false;
    } else {
      throw ConfigError("check.include_zero", "expected true or false");
    }
  }
  if (!(g.x_min > 0.0 && g.x_max >= g.x_min)) {
    throw ConfigError("check.x_min", "need 0 < x_min <= x_max");
  }
  if (!(g.t_min >= 0.0 && g.t_max >= g.t_min)) {
    throw ConfigError("check.t_min", "need 0 <= t_min <= t_max");
  }
  if (g.n_x < 1) throw ConfigError("check.n_x", "must be >= 1");
  if (g.n_t < 1) throw ConfigError("check.n_t", "must be >= 1");
}

void read_diverge(const Reader& r, ExperimentConfig& cfg) {
  if (cfg.model.family != ModelFamily::Poly) {
    throw ConfigError("model.family", "diverge needs the poly family");
  }
  auto& d = cfg.diverge;
  if (auto v = r.text("diverge.regime")) {
    d.regime = rethrow_as("diverge.regime", [&] { return parse_divergence_regime(*v); });
  }
  d.horizon = r.count("diverge.horizon")
                  .value_or(d.regime == DivergenceRegime::Superlinear ? 20 : 10000);
  if (d.horizon < 1) throw ConfigError("diverge.horizon", "must be >= 1");
  d.x1_multiple = r.real_or("diverge.x1_multiple", 1.0);
  if (!(d.x1_multiple >= 1.0)) throw ConfigError("diverge.x1_multiple", "must be >= 1");

  const auto& p = cfg.model.poly;
  if (d.regime == DivergenceRegime::Superlinear) {
    if (!(p.q > 1.0)) throw ConfigError("model.q", "superlinear regime needs q > 1");
    if (!(p.q > p.gamma)) throw ConfigError("model.q", "superlinear regime needs q > gamma");
    if (p.b == 0.0) throw ConfigError("model.b", "superlinear regime needs b != 0");
    if (p.c == 0.0) throw ConfigError("model.c", "superlinear regime needs c != 0");
    if (!(std::abs(p.a) * cfg.scheme.dt <= 1.0)) {
      throw ConfigError("scheme.dt", "superlinear regime needs |a| dt <= 1");
    }
  } else {
    if (!(p.q > 0.0 && p.q < 1.0)) throw ConfigError("model.q", "sublinear regime needs 0 < q < 1");
    if (!(p.gamma >= 0.5 && p.gamma < 1.0)) {
      throw ConfigError("model.gamma", "sublinear regime needs 1/2 <= gamma < 1");
    }
    if (!(std::abs(p.b) < p.a)) throw ConfigError("model.b", "sublinear regime needs |b| < a");
    if (p.c == 0.0) throw ConfigError("model.c", "sublinear regime needs c != 0");
  }
}

}  // namespace

std::unique_ptr<SdeModel> ExperimentConfig::make_model() const {
  switch (model.family) {
    case ModelFamily::Poly:
      return make_poly_model(model.poly);
    case ModelFamily::TimeDecay:
      return make_time_decay_model(model.K1, model.C, model.gamma);
    case ModelFamily::Linear:
      return make_linear_model(model.lambda, model.sigma);
    case ModelFamily::Zero:
      return make_zero_model();
  }
  return nullptr;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin, Command command,
                              const Overrides& overrides) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()), e.message());
  }
  reject_unknown(tree);
  Reader r(tree);

  ExperimentConfig cfg;
  read_model(r, cfg);
  read_constants(r, cfg);
  read_analysis(r, cfg);
  const bool stepping = command == Command::Simulate || command == Command::EstimateRate ||
                        command == Command::Diverge;
  read_scheme(r, cfg, stepping);
  if (!r.has("scheme.seed") && overrides.env_seed) cfg.scheme.seed = *overrides.env_seed;
  if (overrides.seed) cfg.scheme.seed = *overrides.seed;
  if (stepping) {
    resolve_auto_dt(cfg);
    if (cfg.scheme.theta > 0.0 && cfg.constants.L > 0.0 &&
        !(cfg.scheme.theta * cfg.constants.L * cfg.scheme.dt < 1.0)) {
      throw ConfigError("scheme.dt", "must be < 1/(theta L) for a well-posed implicit step");
    }
    read_run(r, cfg, 1, command != Command::Diverge);
  }
  if (command == Command::EstimateRate && cfg.n_paths < 2) {
    throw ConfigError("run.n_paths", "estimate-rate needs at least 2 paths");
  }
  if (command == Command::Check) read_check(r, cfg);
  if (command == Command::Diverge) read_diverge(r, cfg);

  if (auto v = r.text("output.dir")) cfg.out_dir = *v;
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file, Command command,
                             const Overrides& overrides) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string(), "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), file.string(), command, overrides);
}

}  // namespace thetaem::cli
