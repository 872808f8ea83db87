#include "surelet/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

namespace surelet {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ImaginaryResidueTooLarge: return "ImaginaryResidueTooLarge";
    case ErrorCode::KernelLargerThanGrid: return "KernelLargerThanGrid";
    case ErrorCode::ZeroBlurredSignal: return "ZeroBlurredSignal";
    case ErrorCode::EmptyObservableSet: return "EmptyObservableSet";
    case ErrorCode::UnsupportedDepth: return "UnsupportedDepth";
    case ErrorCode::UnknownFilter: return "UnknownFilter";
    case ErrorCode::WeightsUnset: return "WeightsUnset";
    case ErrorCode::NotOrthonormalFlavor: return "NotOrthonormalFlavor";
    case ErrorCode::NoAdmissibleChi: return "NoAdmissibleChi";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InvalidCovariance: return "InvalidCovariance";
    case ErrorCode::IdenticalFields: return "IdenticalFields";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return 2;
    case ErrorCode::Config: return 3;
    case ErrorCode::Io: return 4;
    case ErrorCode::ShapeMismatch: return 10;
    case ErrorCode::LengthMismatch: return 11;
    case ErrorCode::ImaginaryResidueTooLarge: return 12;
    case ErrorCode::KernelLargerThanGrid: return 20;
    case ErrorCode::ZeroBlurredSignal: return 21;
    case ErrorCode::EmptyObservableSet: return 22;
    case ErrorCode::UnsupportedDepth: return 30;
    case ErrorCode::UnknownFilter: return 31;
    case ErrorCode::WeightsUnset: return 40;
    case ErrorCode::NotOrthonormalFlavor: return 41;
    case ErrorCode::NoAdmissibleChi: return 50;
    case ErrorCode::SingularSystem: return 51;
    case ErrorCode::InvalidCovariance: return 60;
    case ErrorCode::IdenticalFields: return 61;
  }
  return 1;
}

// ---------------------------------------------------------------- GridShape

GridShape::GridShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw Error(ErrorCode::InvalidArgument, "grid needs at least one axis");
  size_ = 1;
  for (auto d : dims_) {
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "grid axes must be positive");
    size_ *= d;
  }
}

std::vector<std::size_t> GridShape::coords(std::size_t flat) const {
  std::vector<std::size_t> c(dims_.size());
  for (std::size_t a = dims_.size(); a-- > 0;) {
    c[a] = flat % dims_[a];
    flat /= dims_[a];
  }
  return c;
}

std::size_t GridShape::flat(std::span<const std::size_t> coords) const {
  std::size_t f = 0;
  for (std::size_t a = 0; a < dims_.size(); ++a) f = f * dims_[a] + coords[a] % dims_[a];
  return f;
}

std::size_t GridShape::mirror(std::size_t flat) const {
  std::size_t out = 0;
  std::size_t stride = 1;
  for (std::size_t a = dims_.size(); a-- > 0;) {
    const std::size_t c = flat % dims_[a];
    flat /= dims_[a];
    out += ((dims_[a] - c) % dims_[a]) * stride;
    stride *= dims_[a];
  }
  return out;
}

// ------------------------------------------------------------- FrequencySet

FrequencySet::FrequencySet(GridShape shape, bool all)
    : shape_(std::move(shape)), mask_(shape_.size(), all ? 1 : 0) {}

FrequencySet::FrequencySet(GridShape shape, std::vector<unsigned char> mask)
    : shape_(std::move(shape)), mask_(std::move(mask)) {
  if (mask_.size() != shape_.size()) throw Error(ErrorCode::ShapeMismatch, "mask size");
}

std::size_t FrequencySet::count() const noexcept {
  return static_cast<std::size_t>(std::count_if(mask_.begin(), mask_.end(), [](unsigned char m) { return m != 0; }));
}

FrequencySet FrequencySet::complement() const {
  FrequencySet out(shape_, false);
  for (std::size_t p = 0; p < mask_.size(); ++p) out.mask_[p] = mask_[p] ? 0 : 1;
  return out;
}

// ---------------------------------------------------------------------- FFT

namespace {

// FFTW's planner is not re-entrant; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void fft_inplace(std::span<Complex> data, const GridShape& shape, int sign) {
  if (data.size() != shape.size()) throw Error(ErrorCode::ShapeMismatch, "fft buffer size");
  std::vector<int> n(shape.dims().begin(), shape.dims().end());
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf,
                         sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

SpectrumField dft_forward(const SpatialField& x) {
  std::vector<Complex> buf(x.values().begin(), x.values().end());
  fft_inplace(buf, x.shape(), -1);
  return SpectrumField(x.shape(), std::move(buf));
}

SpectrumField dft_forward(const SpectrumField& x) {
  SpectrumField out = x;
  fft_inplace(out.values(), out.shape(), -1);
  return out;
}

SpectrumField dft_inverse_complex(const SpectrumField& spectrum) {
  SpectrumField out = spectrum;
  fft_inplace(out.values(), out.shape(), +1);
  const double scale = 1.0 / static_cast<double>(out.size());
  for (auto& v : out.values()) v *= scale;
  return out;
}

SpatialField dft_inverse(const SpectrumField& spectrum, const DftOptions& opts) {
  double sup = 0.0;
  for (const auto& v : spectrum.values()) sup = std::max(sup, std::abs(v));
  SpectrumField c = dft_inverse_complex(spectrum);
  SpatialField out(spectrum.shape());
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[i] = c[i].real();
    worst = std::max(worst, std::abs(c[i].imag()));
  }
  if (worst > opts.imaginary_tolerance * sup) {
    throw Error(ErrorCode::ImaginaryResidueTooLarge,
                "inverse DFT imaginary residue " + std::to_string(worst) + " exceeds tolerance");
  }
  return out;
}

// ---------------------------------------------------------------- utilities

void require_same_shape(const GridShape& a, const GridShape& b, const char* what) {
  if (!(a == b)) throw Error(ErrorCode::ShapeMismatch, what);
}

SpectrumField project_frequencies(const SpectrumField& spectrum, const FrequencySet& keep) {
  require_same_shape(spectrum.shape(), keep.shape(), "project_frequencies: shapes differ");
  SpectrumField out = spectrum;
  for (std::size_t p = 0; p < out.size(); ++p) {
    if (!keep.contains(p)) out[p] = 0.0;
  }
  return out;
}

SpatialField project(const SpatialField& x, const FrequencySet& keep) {
  if (keep.is_full()) return x;
  return dft_inverse(project_frequencies(dft_forward(x), keep));
}

double squared_norm(const SpatialField& x) {
  double s = 0.0;
  for (double v : x.values()) s += v * v;
  return s;
}

double squared_norm(const SpectrumField& x) {
  double s = 0.0;
  for (const auto& v : x.values()) s += std::norm(v);
  return s;
}

double mean_square(const SpatialField& x) { return squared_norm(x) / static_cast<double>(x.size()); }

double mean_square_difference(const SpatialField& a, const SpatialField& b) {
  require_same_shape(a.shape(), b.shape(), "mean_square_difference: shapes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double inner(const SpatialField& a, const SpatialField& b) {
  require_same_shape(a.shape(), b.shape(), "inner: shapes differ");
  return std::inner_product(a.values().begin(), a.values().end(), b.values().begin(), 0.0);
}

SpatialField operator-(const SpatialField& a, const SpatialField& b) {
  require_same_shape(a.shape(), b.shape(), "difference: shapes differ");
  SpatialField out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

SpatialField operator+(const SpatialField& a, const SpatialField& b) {
  require_same_shape(a.shape(), b.shape(), "sum: shapes differ");
  SpatialField out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

SpatialField operator*(double c, const SpatialField& a) {
  SpatialField out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

}  // namespace surelet
