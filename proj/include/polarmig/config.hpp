#pragma once

#include <json.hpp>

#include "polarmig/migrate.hpp"
#include "polarmig/stochastic.hpp"

namespace polarmig {

struct ExperimentConfig {
  std::string name = "experiment";
  double wave_speed = 3e8;
  double lambda0 = 0;  // wave_speed / center frequency
  Scene scene;
  FrequencyBand band;
  double window_step = 0;
  std::vector<double> cross_slices_x3;
  std::vector<double> range_slices_x2;

  bool second_born = false;
  bool stochastic = false;
  bool use_full_response = false;  // image Pi instead of preprocessed coherency
  bool write_datasets = true;
  double gamma = 3;
  double delta_rel = 1e-6;
  RecoveryMode mode = RecoveryMode::exact;
  double glyph_threshold = 0.5;

  SourceProcessSpec process;
  int smooth = 0;
  bool run_ergodicity = false;
  ErgodicityOptions ergodicity;

  std::string output = "out";
  std::uint64_t seed = 1;
  nlohmann::json source_json;  // the parsed input, echoed into the artifact directory
};

// Lengths are numbers in meters or strings like "20 lambda0", "0.5 m".
double parse_length(const nlohmann::json& v, double lambda0, const std::string& field);

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

struct RegimeCheck {
  std::string name;
  double lhs = 0, rhs = 0;
  bool pass = false;
};

struct RegimeReport {
  double k0 = 0, L = 0;
  double theta_a = 0, theta_b = 0, theta_h = 0, kL = 0, kh = 0;
  std::vector<RegimeCheck> checks;
  std::string text() const;
};

// "much greater" means a ratio of at least ten.
RegimeReport regime_report(const ExperimentConfig& cfg);

}  // namespace polarmig
