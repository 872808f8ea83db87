#pragma once

#include <string>
#include <vector>

#include "surelet/degradation.hpp"
#include "surelet/grid.hpp"

namespace surelet {

enum class FrameKind {
  /// Critically sampled periodic wavelet basis.
  OrthonormalWavelet,
  /// Union of periodically shifted orthonormal wavelet bases (tight, bound = #shifts).
  ShiftedUnion,
  /// Translation-invariant (a-trous) wavelet frame, tight with bound 1.
  Undecimated,
  /// Standard basis: a single subband of Kronecker atoms at every shift.
  Canonical,
};

FrameKind parse_frame_kind(const std::string& name);
std::string frame_kind_name(FrameKind kind);

struct FrameFlavor {
  FrameKind kind = FrameKind::Undecimated;
  std::size_t levels = 4;
  std::string filter = "sym8";
  /// ShiftedUnion only. Empty means every corner of {0,1}^d.
  std::vector<std::vector<std::size_t>> shifts;
};

/// One class K_m of the partition: every atom is a periodic shift of the
/// generator psi_{m,0}; shifts form the lattice offset + step * Z^d.
struct Subband {
  std::string name;
  std::size_t level = 0;
  SpectrumField psi;
  /// Dual generator spectrum is dual_scale * psi (tight frames).
  double dual_scale = 1.0;
  std::vector<std::size_t> offset;
  std::vector<std::size_t> step;

  std::size_t count(const GridShape& shape) const;
  /// Flat grid positions of the shifts k_l, in row-major lattice order.
  std::vector<std::size_t> positions(const GridShape& shape) const;
  Complex dual(std::size_t p) const { return dual_scale * psi[p]; }
};

/// Coefficients grouped by subband.
struct FrameCoefficients {
  std::vector<std::vector<double>> bands;

  std::size_t total() const;
  static FrameCoefficients zeros_like(const FrameCoefficients& other);
};

/// Analysis family phi_l = G * psi_{m,k_l} and synthesis family psi~_{m,k_l}.
struct FrameTransform {
  FrameFlavor flavor;
  GridShape shape;
  std::vector<Subband> subbands;
  /// Prefilter H/(|H|^2+lambda) on Q, zero elsewhere.
  SpectrumField G;
  double lambda = 0.0;

  std::size_t subband_count() const { return subbands.size(); }
  std::size_t total_coefficients() const;
  bool orthonormal() const {
    return flavor.kind == FrameKind::OrthonormalWavelet || flavor.kind == FrameKind::Canonical;
  }
};

/// Generator spectra only (no prefilter); G is left empty.
FrameTransform build_generators(const FrameFlavor& flavor, const GridShape& shape);

FrameTransform build_frame(const FrameFlavor& flavor, const GridShape& shape, const DegradationModel& model,
                           double lambda);

/// Prefilter spectrum H/(|H|^2 + lambda) on Q and 0 on the complement.
SpectrumField prefilter(const DegradationModel& model, double lambda);

/// <x, psi_{m,k}> for every atom, no prefilter and no projection.
FrameCoefficients analyze_raw(const SpatialField& x, const FrameTransform& frame);
/// sum_l c_l psi~_l, no projection.
SpatialField synthesize_raw(const FrameCoefficients& coeffs, const FrameTransform& frame);

/// r_l = <r_check, psi_{m,k_l}> with R_check = conj(G) R on Q.
FrameCoefficients analyze(const SpatialField& r, const FrameTransform& frame, const DegradationModel& model);

/// Pi(sum_l c_l psi~_l).
SpatialField synthesize(const FrameCoefficients& coeffs, const FrameTransform& frame, const DegradationModel& model);

/// Pi(sum_{l in K_m} c_l psi~_l) for one subband.
SpatialField synthesize_band(std::span<const double> values, std::size_t m, const FrameTransform& frame,
                             const DegradationModel& model);

/// Per-subband gamma-bar: (1/D) sum_Q Phi conj(Phi~) / H.
std::vector<double> gamma_bar(const FrameTransform& frame, const DegradationModel& model,
                              double imaginary_tolerance = 1e-8);

/// Per-subband kappa: (1/D) sum_Q Phi conj(Phi~) / (H |H|^2).
std::vector<double> kappa(const FrameTransform& frame, const DegradationModel& model,
                          double imaginary_tolerance = 1e-8);

/// Per-subband standard deviation of n_l = <Pi n, phi_l>.
std::vector<double> subband_noise_std(const FrameTransform& frame, const DegradationModel& model);

/// Cross-correlation constants gamma-bar_{l,i}. They depend only on the
/// subband pair (m, m') and on k_i - k_l, so each pair is one periodic
/// sequence a_{m,m'} with gamma-bar_{l,i} = a_{m,m'}(k_i - k_l).
/// Holds references: must not outlive the frame or model it was built from.
class CrossCorrelation {
 public:
  /// radius < 0 keeps the full sequences; otherwise values whose periodic
  /// distance exceeds radius on some axis are treated as zero.
  CrossCorrelation(const FrameTransform& frame, const DegradationModel& model, long radius = -1);

  long radius() const { return radius_; }

  /// a_{m,m'} as a spatial field indexed by shift difference.
  SpatialField sequence(std::size_t m, std::size_t m_prime) const;

  /// gamma-bar_{l,i} for global coefficient indices (subband-major order).
  double value(std::size_t ell, std::size_t i) const;

  /// sum_{l,i} t_l t_i gamma-bar_{l,i} gamma-bar_{i,l}, evaluated pairwise
  /// through the shift structure with FFT correlations.
  double weighted_double_sum(const FrameCoefficients& t) const;

 private:
  SpectrumField pair_spectrum(std::size_t m, std::size_t m_prime) const;
  void truncate(SpatialField& seq) const;

  const FrameTransform* frame_;
  const DegradationModel* model_;
  long radius_;
};

CrossCorrelation gamma_bar_cross(const FrameTransform& frame, const DegradationModel& model, long radius = -1);

}  // namespace surelet
