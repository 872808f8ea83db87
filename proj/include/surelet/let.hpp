#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "surelet/frame.hpp"

namespace surelet {

namespace let {
struct Identity {};
/// (1 - exp(-(rho/(omega sigma))^8)) rho
struct BluExp {
  double omega = 3.0;
};
/// (tanh((rho + xi sigma)/(omega' sigma)) - tanh((rho - xi sigma)/(omega' sigma))) rho
struct TanhGate {
  double xi = 3.5;
  double omega_p = 2.25;
};
}  // namespace let

using ElementaryFunction = std::variant<let::Identity, let::BluExp, let::TanhGate>;

struct ValueAndSlope {
  double value;
  double derivative;
};

ValueAndSlope f_blu(double rho, double omega, double sigma);
ValueAndSlope f_tanh(double rho, double xi, double omega_p, double sigma);
ValueAndSlope evaluate(const ElementaryFunction& f, double rho, double sigma);
std::string function_name(const ElementaryFunction& f);

/// Per-subband lists of elementary functions and (once solved) their weights.
struct LetSpec {
  std::vector<std::vector<ElementaryFunction>> functions;
  std::vector<std::vector<double>> weights;

  /// Same function list on every one of `subbands` subbands, weights unset.
  static LetSpec uniform(std::size_t subbands, std::vector<ElementaryFunction> per_subband);

  bool has_weights() const { return !weights.empty(); }
  std::size_t subband_count() const { return functions.size(); }
  /// Total number of weights, sum over m of I_m.
  std::size_t parameter_count() const;
  /// Flat (m, i) -> index in subband-major order.
  std::size_t flat_index(std::size_t m, std::size_t i) const;
  void set_flat_weights(std::span<const double> a);
  std::vector<double> flat_weights() const;
};

/// Theta_l(r_l) and Theta'_l(r_l), grouped like the coefficients.
struct ThetaResult {
  FrameCoefficients value;
  FrameCoefficients derivative;
};

ThetaResult apply_theta(const FrameCoefficients& coeffs, const LetSpec& spec, std::span<const double> sigmas);

/// beta_{m,i} = Pi(sum_{l in K_m} f_{m,i}(r_l) psi~_l), in flat (m, i) order.
std::vector<SpatialField> beta_fields(const FrameCoefficients& coeffs, const FrameTransform& frame,
                                      const DegradationModel& model, const LetSpec& spec,
                                      std::span<const double> sigmas);

/// sum_{l in K_m} f'_{m,i}(r_l) gamma-bar_l, in flat (m, i) order.
std::vector<double> fprime_sums(const FrameCoefficients& coeffs, const LetSpec& spec, std::span<const double> sigmas,
                                std::span<const double> gamma_bars);

}  // namespace surelet
