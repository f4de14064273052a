#pragma once

#include "polarmig/config.hpp"
#include "polarmig/preprocess.hpp"

namespace polarmig {

struct PipelineResult {
  std::string directory;
  std::vector<std::string> files;  // written artifacts, relative to directory
  double peak_image_norm = 0;      // largest |I_KM| over all slices
  std::string report;
};

// Forward data for the config: stochastic or deterministic coherency, or the full response.
ArrayDataSet simulate_data(const ExperimentConfig& cfg);

// Data ready for migration: preprocessed coherency or the response as is.
ArrayDataSet imaging_data(const ArrayDataSet& ds, PreprocessReport* rep = nullptr);

std::string scene_report(const ExperimentConfig& cfg);

// Image grids requested by the config, named for the artifact files.
std::vector<std::pair<std::string, ImageGrid>> config_slices(const ExperimentConfig& cfg);

// Recovered tensors at the scatterer positions, phase corrected jointly.
std::string recovered_table(const ExperimentConfig& cfg, const ArrayDataSet& imaging);

PipelineResult run_pipeline(const ExperimentConfig& cfg);

}  // namespace polarmig
