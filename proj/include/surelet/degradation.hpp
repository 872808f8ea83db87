#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "surelet/grid.hpp"

namespace surelet {

namespace blur {
struct Dirac {};
/// Box average; one odd size per axis (a single entry is reused on every axis).
struct Uniform {
  std::vector<std::size_t> sizes;
};
/// Isotropic Gaussian, truncated at +-4 sigma and renormalized.
struct Gaussian {
  double sigma;
};
/// Separable raised-cosine frequency response with cutoff fc in [0, 1/2).
struct Cosine {
  double fc;
};
/// Arbitrary real kernel; its center tap (floor(n/2) per axis) lands on the origin.
struct Explicit {
  SpatialField kernel;
};
}  // namespace blur

using BlurSpec = std::variant<blur::Dirac, blur::Uniform, blur::Gaussian, blur::Cosine, blur::Explicit>;

/// Parses "dirac", "uniform:5", "uniform:5x7", "gaussian:2", "cosine:0.09375"
/// or "cosine:3/32". Explicit kernels are not expressible as text.
BlurSpec parse_blur(const std::string& text);
std::string blur_name(const BlurSpec& spec);

/// Observation model: frequency response, noise variance, threshold chi and
/// the observable set Q = {p : |H(p)| > chi}.
struct DegradationModel {
  SpectrumField H;
  double gamma = 0.0;
  double chi = 0.0;
  FrequencySet Q;

  const GridShape& shape() const { return H.shape(); }
  /// sum over Q of |H|^-power.
  double inverse_power_sum(int power) const;
};

SpectrumField make_blur_response(const BlurSpec& spec, const GridShape& shape);

/// Noise variance that makes 10 log10(||h*s||^2 / (D gamma)) equal bsnr_db.
double gamma_for_bsnr(const SpatialField& s, const SpectrumField& H, double bsnr_db);
double bsnr_db(const SpatialField& s, const SpectrumField& H, double gamma);

/// Periodic convolution h*s computed as idft(H S).
SpatialField convolve(const SpatialField& s, const SpectrumField& H);

/// r = h*s + n with n i.i.d. N(0, gamma) drawn in raster order from GaussianRng(seed).
SpatialField degrade(const SpatialField& s, const SpectrumField& H, double gamma, std::uint64_t seed);

/// White Gaussian noise field of the given variance.
SpatialField white_noise(const GridShape& shape, double gamma, std::uint64_t seed);

/// Q = {p : |H(p)| > chi}. Bins with |H| below 1e-12 max|H| count as exact
/// zeros regardless of chi. Throws EmptyObservableSet when Q is empty.
FrequencySet compute_observable_set(const SpectrumField& H, double chi);

DegradationModel make_model(SpectrumField H, double gamma, double chi);

/// Inverse-filtered observation restricted to Q (R/H on Q, 0 elsewhere).
/// With `doubly` set, returns the field with spectrum R/H^2 on Q.
SpatialField pilot_inverse(const SpatialField& r, const DegradationModel& model, bool doubly = false);

}  // namespace surelet
