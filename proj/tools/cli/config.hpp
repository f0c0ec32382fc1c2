#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "thetaem/conditions.hpp"
#include "thetaem/lab.hpp"
#include "thetaem/models.hpp"
#include "thetaem/step_size.hpp"
#include "thetaem/stepper.hpp"

namespace thetaem::cli {

/// Invalid or missing configuration. `where` names the offending field
/// ("scheme.dt") or file position ("run.ini:12").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

enum class ModelFamily { Poly, TimeDecay, Linear, Zero };

struct ModelSection {
  ModelFamily family = ModelFamily::Poly;
  PolyModelParams poly;
  double K1 = 2.0;
  double C = 1.0;
  double gamma = 1.0;
  double lambda = -1.0;
  double sigma = 0.0;
};

struct AnalysisSection {
  RateAxis axis = RateAxis::LinearTime;
  double fit_window = 0.5;
  std::optional<double> epsilon;
  std::optional<StabilityTheorem> theorem;
};

struct CheckSection {
  std::vector<ConditionId> conditions;
  std::optional<DecayForm> inequality;
  GridSpec grid;
};

struct DivergeSection {
  DivergenceRegime regime = DivergenceRegime::Superlinear;
  std::uint64_t horizon = 20;
  double x1_multiple = 1.0;
};

/// Everything one CLI run needs; see README for the file schema.
struct ExperimentConfig {
  ModelSection model;
  SchemeConfig scheme;
  bool dt_auto = false;
  double dt_max = 0.01;
  std::uint64_t n_steps = 0;
  std::uint64_t n_paths = 1;
  std::vector<double> x0;
  AnalysisSection analysis;
  ConditionConstants constants;
  bool constants_given = false;
  CheckSection check;
  DivergeSection diverge;
  std::filesystem::path out_dir = ".";

  /// Builds the model selected in [model].
  std::unique_ptr<SdeModel> make_model() const;
};

/// Which sections a command requires.
enum class Command { Simulate, EstimateRate, Check, Diverge, GammaVerify };

/// Command-line values that override the file.
struct Overrides {
  std::optional<std::uint64_t> seed;      ///< --seed; beats scheme.seed
  std::optional<std::uint64_t> env_seed;  ///< THETA_EM_SEED; used when scheme.seed is absent
  std::optional<std::filesystem::path> out_dir;
};

/// Parses an INI-style file and validates the fields `command` uses.
ExperimentConfig load_config(const std::filesystem::path& file, Command command,
                             const Overrides& overrides);

/// As load_config, from text already in memory (`origin` names it in errors).
ExperimentConfig parse_config(const std::string& text, const std::string& origin,
                              Command command, const Overrides& overrides);

}  // namespace thetaem::cli
