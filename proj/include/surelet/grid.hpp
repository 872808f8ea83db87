#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "surelet/error.hpp"

namespace surelet {

using Complex = std::complex<double>;

/// Periodic d-dimensional grid {0..D1-1} x ... x {0..Dd-1}, row-major with
/// the last axis varying fastest.
class GridShape {
 public:
  GridShape() = default;
  explicit GridShape(std::vector<std::size_t> dims);
  GridShape(std::initializer_list<std::size_t> dims)
      : GridShape(std::vector<std::size_t>(dims)) {}

  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return size_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }

  std::vector<std::size_t> coords(std::size_t flat) const;
  std::size_t flat(std::span<const std::size_t> coords) const;

  /// Flat index of (D*1 - p) mod D, the Hermitian partner of bin p.
  std::size_t mirror(std::size_t flat) const;

  bool operator==(const GridShape&) const = default;

 private:
  std::vector<std::size_t> dims_;
  std::size_t size_ = 0;
};

template <class T>
class Field {
 public:
  Field() = default;
  explicit Field(GridShape shape, T fill = T{})
      : shape_(std::move(shape)), values_(shape_.size(), fill) {}
  Field(GridShape shape, std::vector<T> values) : shape_(std::move(shape)), values_(std::move(values)) {
    if (values_.size() != shape_.size()) {
      throw Error(ErrorCode::ShapeMismatch, "value count does not match grid size");
    }
  }

  const GridShape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }

  T& operator[](std::size_t i) noexcept { return values_[i]; }
  const T& operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }
  T* data() noexcept { return values_.data(); }
  const T* data() const noexcept { return values_.data(); }

 private:
  GridShape shape_;
  std::vector<T> values_;
};

using SpatialField = Field<double>;
using SpectrumField = Field<Complex>;

/// Membership mask over the frequency grid (used for the observable set
/// and its complement).
class FrequencySet {
 public:
  FrequencySet() = default;
  FrequencySet(GridShape shape, bool all);
  FrequencySet(GridShape shape, std::vector<unsigned char> mask);

  static FrequencySet full(const GridShape& shape) { return {shape, true}; }
  static FrequencySet none(const GridShape& shape) { return {shape, false}; }

  const GridShape& shape() const noexcept { return shape_; }
  bool contains(std::size_t p) const noexcept { return mask_[p] != 0; }
  void set(std::size_t p, bool in) noexcept { mask_[p] = in ? 1 : 0; }
  std::size_t count() const noexcept;
  bool is_full() const noexcept { return count() == shape_.size(); }
  FrequencySet complement() const;
  std::span<const unsigned char> mask() const noexcept { return mask_; }

 private:
  GridShape shape_;
  std::vector<unsigned char> mask_;
};

struct DftOptions {
  /// Relative tolerance on the imaginary residue of an inverse transform,
  /// measured against the sup-norm of the spectrum.
  double imaginary_tolerance = 1e-6;
};

/// Unnormalized forward DFT: X(p) = sum_x x(x) exp(-2 pi i x^T D^-1 p).
SpectrumField dft_forward(const SpatialField& x);
SpectrumField dft_forward(const SpectrumField& x);

/// Inverse DFT carrying the 1/D factor. Throws ImaginaryResidueTooLarge when
/// the result is not real to tolerance.
SpatialField dft_inverse(const SpectrumField& spectrum, const DftOptions& opts = {});

/// Inverse DFT keeping the complex result.
SpectrumField dft_inverse_complex(const SpectrumField& spectrum);

/// In-place transform on raw storage. sign = -1 forward, +1 backward
/// (unnormalized both ways).
void fft_inplace(std::span<Complex> data, const GridShape& shape, int sign);

SpectrumField project_frequencies(const SpectrumField& spectrum, const FrequencySet& keep);

/// Real field whose spectrum is the projection of x's spectrum onto `keep`.
SpatialField project(const SpatialField& x, const FrequencySet& keep);

/// (1/D) sum x^2.
double mean_square(const SpatialField& x);
double mean_square_difference(const SpatialField& a, const SpatialField& b);
/// Euclidean inner product sum_x a(x) b(x).
double inner(const SpatialField& a, const SpatialField& b);
double squared_norm(const SpatialField& x);
double squared_norm(const SpectrumField& x);

SpatialField operator-(const SpatialField& a, const SpatialField& b);
SpatialField operator+(const SpatialField& a, const SpatialField& b);
SpatialField operator*(double c, const SpatialField& a);

void require_same_shape(const GridShape& a, const GridShape& b, const char* what);

}  // namespace surelet
