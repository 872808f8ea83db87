#pragma once

// Shared fixtures and brute-force oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "surelet/degradation.hpp"
#include "surelet/frame.hpp"
#include "surelet/grid.hpp"
#include "surelet/rng.hpp"

namespace surelet::testing {

inline SpatialField random_field(const GridShape& shape, std::uint64_t seed, double sd = 1.0, double mean = 0.0) {
  GaussianRng rng(seed);
  SpatialField x(shape);
  for (auto& v : x.values()) v = mean + sd * rng.standard_normal();
  return x;
}

/// Piecewise-smooth test image on [0, 255]: a ramp, two discs and a bar.
inline SpatialField synthetic_image(std::size_t n) {
  SpatialField s(GridShape{n, n});
  const double dn = static_cast<double>(n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double u = static_cast<double>(x) / dn, v = static_cast<double>(y) / dn;
      double val = 60.0 + 80.0 * u + 30.0 * std::sin(6.0 * v);
      if ((u - 0.35) * (u - 0.35) + (v - 0.4) * (v - 0.4) < 0.04) val += 90.0;
      if ((u - 0.7) * (u - 0.7) + (v - 0.7) * (v - 0.7) < 0.015) val -= 50.0;
      if (u > 0.15 && u < 0.25 && v > 0.6 && v < 0.9) val += 70.0;
      s[y * n + x] = std::clamp(val, 0.0, 255.0);
    }
  }
  return s;
}

/// Hermitian response with |H| uniform in [lo, hi] and random phase
/// (self-conjugate bins get a random sign). H(0) is set to 1.
inline SpectrumField random_hermitian_response(const GridShape& shape, std::uint64_t seed, double lo, double hi) {
  GaussianRng rng(seed);
  SpectrumField H(shape);
  std::vector<bool> done(shape.size(), false);
  for (std::size_t p = 0; p < shape.size(); ++p) {
    if (done[p]) continue;
    const std::size_t q = shape.mirror(p);
    const double mag = lo + (hi - lo) * rng.uniform_open();
    if (q == p) {
      H[p] = rng.uniform_open() < 0.5 ? -mag : mag;
    } else {
      H[p] = std::polar(mag, 2.0 * std::numbers::pi * rng.uniform_open());
      H[q] = std::conj(H[p]);
      done[q] = true;
    }
    done[p] = true;
  }
  H[0] = 1.0;
  return H;
}

/// Direct O(D^2) DFT with the library's sign convention.
inline SpectrumField direct_dft(const SpectrumField& x, int sign = -1) {
  const GridShape& shape = x.shape();
  SpectrumField X(shape, Complex(0.0, 0.0));
  for (std::size_t p = 0; p < shape.size(); ++p) {
    const auto pc = shape.coords(p);
    Complex acc = 0.0;
    for (std::size_t k = 0; k < shape.size(); ++k) {
      const auto kc = shape.coords(k);
      double phase = 0.0;
      for (std::size_t a = 0; a < shape.rank(); ++a) {
        phase += static_cast<double>(pc[a] * kc[a] % shape.dim(a)) / static_cast<double>(shape.dim(a));
      }
      acc += x[k] * std::polar(1.0, sign * 2.0 * std::numbers::pi * phase);
    }
    X[p] = acc;
  }
  return X;
}

inline SpectrumField complexify(const SpatialField& x) {
  SpectrumField c(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i];
  return c;
}

/// Spectrum of the translate of a generator to flat position k:
/// S(p) exp(-2 pi i k^T D^-1 p).
inline SpectrumField shifted_spectrum(const SpectrumField& S, std::size_t k) {
  const GridShape& shape = S.shape();
  const auto kc = shape.coords(k);
  SpectrumField out(shape);
  for (std::size_t p = 0; p < shape.size(); ++p) {
    const auto pc = shape.coords(p);
    double phase = 0.0;
    for (std::size_t a = 0; a < shape.rank(); ++a) {
      phase += static_cast<double>(pc[a] * kc[a] % shape.dim(a)) / static_cast<double>(shape.dim(a));
    }
    out[p] = S[p] * std::polar(1.0, -2.0 * std::numbers::pi * phase);
  }
  return out;
}

/// Every atom of the frame as an explicit spatial field, subband-major.
struct ExplicitAtoms {
  std::vector<SpatialField> primal;
  std::vector<SpatialField> dual;
  std::vector<std::size_t> band;
};

inline ExplicitAtoms explicit_atoms(const FrameTransform& frame) {
  ExplicitAtoms out;
  for (std::size_t m = 0; m < frame.subbands.size(); ++m) {
    const auto& sb = frame.subbands[m];
    for (std::size_t k : sb.positions(frame.shape)) {
      const SpectrumField S = shifted_spectrum(sb.psi, k);
      const SpatialField atom = dft_inverse(S);
      out.primal.push_back(atom);
      out.dual.push_back(sb.dual_scale * atom);
      out.band.push_back(m);
    }
  }
  return out;
}

}  // namespace surelet::testing
