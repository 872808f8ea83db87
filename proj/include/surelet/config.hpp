#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "surelet/degradation.hpp"
#include "surelet/frame.hpp"

namespace surelet {

/// Environment variable naming the config file read when none is given.
inline constexpr const char* kConfigEnvVar = "SURELET_CONFIG";

enum class Estimator { Blu, Tanh, Identity, Zero, Wiener };
Estimator parse_estimator(const std::string& name);
std::string estimator_name(Estimator e);

enum class NoiseVarianceMode { Known, Mad };

/// One restoration experiment. Defaults follow the reference protocol:
/// undecimated sym8 over 4 levels, BluExp LET with omega 3, heuristic
/// lambda, automatic chi, known noise variance.
struct ExperimentConfig {
  std::filesystem::path input;
  /// Label for reports; defaults to the input file stem.
  std::string image_id;
  std::string blur = "uniform:5";
  /// When set, the noise variance is calibrated to this BSNR.
  std::optional<double> bsnr_db = 30.0;
  /// Explicit noise variance (mutually exclusive with bsnr_db when degrading).
  std::optional<double> gamma;
  /// False when the input already is the observation r.
  bool degrade = true;
  std::uint64_t seed = 0;
  /// Centered square crop before processing; 0 keeps the full image.
  std::size_t crop = 0;

  FrameFlavor frame;
  Estimator estimator = Estimator::Blu;
  double omega = 3.0;
  double xi = 3.5;
  double omega_p = 2.25;

  /// Unset means the variance-ratio heuristic.
  std::optional<double> lambda;
  /// Unset means the automatic risk-variance search.
  std::optional<double> chi;
  /// Used when the automatic search finds no admissible chi.
  std::optional<double> chi_fallback;
  NoiseVarianceMode noise_var = NoiseVarianceMode::Known;
  /// Compute the risk-variance estimate for the report.
  bool variance = true;
  /// Truncation radius for the variance cross terms; negative is exact.
  long cross_radius = -1;

  std::filesystem::path out;
  std::filesystem::path csv;
  std::filesystem::path report;
  /// Noise realizations per table cell.
  std::size_t seeds = 10;

  std::string method_id() const;
  void validate() const;
};

/// Applies one key=value setting. Throws Config on unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Reads a flat key=value file ('#' starts a comment) on top of `base`.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Path from the environment variable, if set and non-empty.
std::optional<std::filesystem::path> default_config_path();

/// Documented keys with their default values, one "key = value" per line.
std::string describe_config_keys();

}  // namespace surelet
