#pragma once

#include <limits>
#include <span>

#include "surelet/frame.hpp"
#include "surelet/let.hpp"

namespace surelet {

/// Observable-part risk estimate. e_hat = data_term + delta_hat and may be
/// negative; it is never clamped.
struct RiskReport {
  double data_term = 0.0;
  double delta_hat = 0.0;
  double e_hat = 0.0;
  /// NaN until sure_variance_estimate has been run.
  double variance_hat = std::numeric_limits<double>::quiet_NaN();
  double chi = 0.0;
  std::size_t card_Q = 0;
};

/// E_o-hat = mean((s_hat - pilot)^2) + (gamma/D)(2 sum_l Theta'_l gamma-bar_l - sum_Q |H|^-2).
RiskReport sure_estimate(const SpatialField& s_hat, const SpatialField& pilot, const FrameCoefficients& theta_prime,
                         std::span<const double> gamma_bars, const DegradationModel& model);

/// Field whose spectrum is X/H on Q and 0 elsewhere (the "_H" weighting).
SpatialField divide_by_response(const SpatialField& x, const DegradationModel& model);

/// Plug-in estimate of Var[E_o - E_o-hat]:
/// (4 gamma/D) mean((s_hat_H - pilot_H)^2)
///   + (4 gamma^2/D^2) sum_{l,i} Theta'_l Theta'_i gb_{l,i} gb_{i,l}
///   - (2 gamma^2/D^2) sum_Q |H|^-4.
double sure_variance_estimate(const SpatialField& s_hat_H, const SpatialField& pilot_H,
                              const FrameCoefficients& theta_prime, const CrossCorrelation& cross,
                              const DegradationModel& model);

/// Risk quantities of the identity estimator (Theta = id) in closed form.
/// For any frame with a dual, the identity estimate has spectrum
/// conj(H) R / (|H|^2 + lambda) on Q, which makes every sum diagonal in frequency.
struct ProbeRisk {
  double data_term = 0.0;
  double delta_hat = 0.0;
  double e_hat = 0.0;
  double variance_hat = 0.0;
  /// variance_hat without its negative |H|^-4 term.
  double v_max = 0.0;
};

ProbeRisk identity_probe(const SpectrumField& R, const DegradationModel& model, double lambda);

struct ChiSelection {
  double chi = 0.0;
  DegradationModel model;
  ProbeRisk probe;
  /// Largest rejected candidate (0 when chi = 0 was accepted outright).
  double rejected = 0.0;
};

/// Smallest chi on a 20-step bisection grid over [0, max|H|] such that the
/// identity probe satisfies E_o-hat > 10 sqrt(V_max).
ChiSelection select_chi(const SpatialField& r, const SpectrumField& H, double gamma, double lambda,
                        int iterations = 20);

bool chi_rule_holds(const ProbeRisk& probe);

/// Per-subband term sum_{K_m} (Theta(r_l) - pilot_l)^2 + 2 gamma sum_{K_m} Theta'(r_l) gamma-bar_m.
/// Requires an orthonormal synthesis family on the whole grid (Q = D).
double subband_criterion(const FrameCoefficients& coeffs, const FrameCoefficients& pilot_coeffs, const LetSpec& spec,
                         std::span<const double> sigmas, std::span<const double> gamma_bars, std::size_t m,
                         const FrameTransform& frame, const DegradationModel& model);

struct LambdaChoice {
  double lambda = 0.0;
  /// True when the signal-variance estimate was not positive and lambda was clamped to 0.
  bool clamped = false;
};

/// lambda = 3 gamma / (mean(r^2) - mean(r)^2 - gamma).
LambdaChoice lambda_heuristic(const SpatialField& r, double gamma);

}  // namespace surelet
