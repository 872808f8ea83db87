#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "surelet/let.hpp"
#include "surelet/risk.hpp"

namespace surelet {

/// Normal equations of the LET weights: gram a = rhs, with
/// gram = <beta, beta'> and rhs = <beta, pilot> - gamma sum f' gamma-bar.
/// D E_o-hat(a) = a^T gram a - 2 a^T rhs + constant.
struct NormalSystem {
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  /// ||pilot||^2 - gamma sum_Q |H|^-2
  double constant = 0.0;
  std::size_t grid_size = 0;

  std::size_t dim() const { return static_cast<std::size_t>(rhs.size()); }
  /// E_o-hat for arbitrary weights, from the quadratic form.
  double risk(const Eigen::VectorXd& a) const;
};

NormalSystem assemble(const std::vector<SpatialField>& betas, const SpatialField& pilot,
                      std::span<const double> fprime_sums, double gamma);

/// Adds the data-independent constant (only needed for NormalSystem::risk).
void attach_constant(NormalSystem& system, const SpatialField& pilot, const DegradationModel& model);

struct WeightSolution {
  Eigen::VectorXd a;
  /// Largest relative ridge used by any block (0 when no block needed one).
  double ridge = 0.0;
  /// Largest ratio of Cholesky pivots over the scaled blocks.
  double condition = 0.0;
};

/// Solves the Jacobi-scaled system (S gram S + ridge I) y = S rhs, a = S y with
/// S = diag(gram)^{-1/2}, climbing the ridge ladder {ridge, 1e-8, 1e-6} until
/// the Cholesky factorization is well posed. On the scaled system tr/dim = 1.
/// Uncoupled blocks of the scaled gram are solved independently, each with
/// its own rung of the ladder.
WeightSolution solve(const NormalSystem& system, double ridge = 0.0);

struct LetFit {
  LetSpec spec;
  FrameCoefficients coeffs;
  ThetaResult theta;
  std::vector<double> gamma_bars;
  std::vector<double> sigmas;
  SpatialField estimate;
  RiskReport report;
  NormalSystem system;
  WeightSolution solution;
};

struct FitOptions {
  bool variance = false;
  /// Truncation radius of the cross-correlation sequences (negative = exact).
  long cross_radius = -1;
  double ridge = 0.0;
};

/// analyze -> beta fields -> normal equations -> weights -> estimate -> SURE.
LetFit optimize_let(const SpatialField& r, const FrameTransform& frame, const DegradationModel& model, LetSpec spec,
                    const FitOptions& options = {});

/// Same pipeline with the weights already set in `spec` (no solve).
LetFit evaluate_let(const SpatialField& r, const FrameTransform& frame, const DegradationModel& model, LetSpec spec,
                    const FitOptions& options = {});

/// Weights of subband m minimizing its own criterion in the coefficient
/// domain (orthonormal synthesis, Q = grid).
Eigen::VectorXd solve_subband(const FrameCoefficients& coeffs, const FrameCoefficients& pilot_coeffs,
                              const LetSpec& spec, std::span<const double> sigmas,
                              std::span<const double> gamma_bars, double gamma, std::size_t m);

}  // namespace surelet
