#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "surelet/config.hpp"
#include "surelet/risk.hpp"
#include "surelet/solver.hpp"

namespace surelet {

/// (median|d| / 0.6745)^2 over the finest all-highpass orthonormal sym8
/// coefficients of r.
double mad_noise_estimate(const SpatialField& r);

/// conj(H) R / (|H|^2 + D gamma / P) with P = signal_power (a flat
/// spectral power proxy). Bins where the denominator vanishes are zeroed.
SpatialField wiener_baseline(const SpatialField& r, const SpectrumField& H, double gamma, double signal_power);
/// Uses P = max(mean(r^2) - mean(r)^2 - gamma, 1e-12) D.
SpatialField wiener_baseline(const SpatialField& r, const SpectrumField& H, double gamma);

/// Error-to-signal power ratio below which two fields count as identical
/// (SNR above 200 dB is round-off).
inline constexpr double kIdenticalRatio = 1e-20;

/// 10 log10(mean(s^2) / mean((s - s_hat)^2)); +inf when the fields are
/// identical (or throws IdenticalFields when `strict`).
double snr_db(const SpatialField& s, const SpatialField& s_hat, bool strict = false);

struct ScoreRow {
  std::string image;
  std::string blur;
  double bsnr_db = std::numeric_limits<double>::quiet_NaN();
  std::string method;
  std::uint64_t seed = 0;
  double snr_db = std::numeric_limits<double>::quiet_NaN();
  double snr_input_db = std::numeric_limits<double>::quiet_NaN();
  double e_hat = std::numeric_limits<double>::quiet_NaN();
  double variance_hat = std::numeric_limits<double>::quiet_NaN();
  double chi = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double runtime_s = 0.0;
};

struct RestoreResult {
  SpatialField truth;  // empty shape when the input was the observation
  SpatialField observed;
  SpatialField estimate;
  ScoreRow row;
  RiskReport report;
  std::vector<double> weights;
  bool lambda_clamped = false;
  bool chi_fell_back = false;
};

/// Restores with the configured estimator. `image` is the clean signal when
/// cfg.degrade is set, otherwise the observation.
RestoreResult run_restore(const ExperimentConfig& cfg, const SpatialField& image);
/// Loads cfg.input (with crop) and calls the overload above.
RestoreResult run_restore(const ExperimentConfig& cfg);

/// One JSON object describing the score and risk report.
std::string report_json(const RestoreResult& result);

struct TableCell {
  ScoreRow median;
  std::size_t seeds = 0;
  std::size_t failures = 0;
  std::string status;
};

/// Runs every config over seeds cfg.seed .. cfg.seed + cfg.seeds - 1 on a
/// pool of `jobs` workers and reports per-cell medians.
std::vector<TableCell> run_table(const std::vector<ExperimentConfig>& cells, std::size_t jobs = 1);

/// image,blur,bsnr_db,method,seeds,failures,snr_db,snr_input_db,e_hat,
/// variance_hat,chi,gamma,lambda[,runtime_s],status. The runtime column is
/// opt-in so that reruns produce byte-identical files.
std::string csv_header(bool timing = false);
void write_csv(std::ostream& out, const std::vector<TableCell>& cells, bool timing = false);
void write_score_csv(std::ostream& out, const ScoreRow& row, bool timing = false);

double median(std::vector<double> values);

}  // namespace surelet
