#include "surelet/frame.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "surelet/wavelet_filters.hpp"

namespace surelet {

FrameKind parse_frame_kind(const std::string& name) {
  if (name == "orthonormal" || name == "ortho" || name == "dwt") return FrameKind::OrthonormalWavelet;
  if (name == "shifted" || name == "shifted-union") return FrameKind::ShiftedUnion;
  if (name == "undecimated" || name == "swt" || name == "atrous") return FrameKind::Undecimated;
  if (name == "canonical" || name == "identity") return FrameKind::Canonical;
  throw Error(ErrorCode::Config, "unknown frame '" + name + "'");
}

std::string frame_kind_name(FrameKind kind) {
  switch (kind) {
    case FrameKind::OrthonormalWavelet: return "orthonormal";
    case FrameKind::ShiftedUnion: return "shifted";
    case FrameKind::Undecimated: return "undecimated";
    case FrameKind::Canonical: return "canonical";
  }
  return "?";
}

std::size_t Subband::count(const GridShape& shape) const {
  std::size_t n = 1;
  for (std::size_t a = 0; a < shape.rank(); ++a) n *= shape.dim(a) / step[a];
  return n;
}

std::vector<std::size_t> Subband::positions(const GridShape& shape) const {
  std::vector<std::size_t> lattice_dims(shape.rank());
  for (std::size_t a = 0; a < shape.rank(); ++a) lattice_dims[a] = shape.dim(a) / step[a];
  const GridShape lattice(lattice_dims);
  std::vector<std::size_t> out(lattice.size());
  std::vector<std::size_t> pos(shape.rank());
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const auto c = lattice.coords(k);
    for (std::size_t a = 0; a < shape.rank(); ++a) pos[a] = (offset[a] + step[a] * c[a]) % shape.dim(a);
    out[k] = shape.flat(pos);
  }
  return out;
}

std::size_t FrameCoefficients::total() const {
  std::size_t n = 0;
  for (const auto& b : bands) n += b.size();
  return n;
}

FrameCoefficients FrameCoefficients::zeros_like(const FrameCoefficients& other) {
  FrameCoefficients out;
  for (const auto& b : other.bands) out.bands.emplace_back(b.size(), 0.0);
  return out;
}

std::size_t FrameTransform::total_coefficients() const {
  std::size_t n = 0;
  for (const auto& sb : subbands) n += sb.count(shape);
  return n;
}

namespace {

// Filter spectrum on a periodic axis of length n, taps centered at (L-1)/2.
std::vector<Complex> filter_spectrum(std::span<const double> taps, std::size_t n) {
  const long center = static_cast<long>(taps.size() - 1) / 2;
  std::vector<Complex> out(n);
  for (std::size_t q = 0; q < n; ++q) {
    Complex acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) {
      const double t = static_cast<double>((static_cast<long>(k) - center) * static_cast<long>(q) %
                                           static_cast<long>(n)) /
                       static_cast<double>(n);
      acc += taps[k] * std::polar(1.0, -2.0 * std::numbers::pi * t);
    }
    out[q] = acc;
  }
  return out;
}

// Per-axis factors of the level-j atoms.
struct AxisFactors {
  std::vector<std::vector<Complex>> low;   // low[j-1]: scaling chain at level j
  std::vector<std::vector<Complex>> high;  // high[j-1]: detail at level j
};

AxisFactors axis_factors(std::span<const double> lowpass, std::size_t n, std::size_t levels) {
  const auto g0 = filter_spectrum(lowpass, n);
  const auto hp = highpass_from_lowpass(lowpass);
  const auto g1 = filter_spectrum(hp, n);
  AxisFactors f;
  std::vector<Complex> chain(n, 1.0);  // prod_{i<j-1} G0(2^i p)
  for (std::size_t j = 1; j <= levels; ++j) {
    const std::size_t up = std::size_t{1} << (j - 1);
    std::vector<Complex> hi(n), lo(n);
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t q = (up * p) % n;
      hi[p] = chain[p] * g1[q];
      lo[p] = chain[p] * g0[q];
    }
    f.high.push_back(std::move(hi));
    chain = lo;
    f.low.push_back(std::move(lo));
  }
  return f;
}

void check_depth(const FrameFlavor& flavor, const GridShape& shape) {
  if (flavor.kind == FrameKind::Canonical) return;
  if (flavor.levels < 1) throw Error(ErrorCode::UnsupportedDepth, "at least one decomposition level is required");
  const std::size_t scale = std::size_t{1} << flavor.levels;
  for (std::size_t a = 0; a < shape.rank(); ++a) {
    const std::size_t n = shape.dim(a);
    if (scale > n) {
      throw Error(ErrorCode::UnsupportedDepth,
                  std::to_string(flavor.levels) + " levels exceed axis length " + std::to_string(n));
    }
    if (flavor.kind != FrameKind::Undecimated && n % scale != 0) {
      throw Error(ErrorCode::UnsupportedDepth, "decimated frames need axis lengths divisible by 2^levels");
    }
  }
}

// Wavelet subbands (details of levels 1..J, then the approximation) with a
// common lattice offset.
std::vector<Subband> wavelet_subbands(const FrameFlavor& flavor, const GridShape& shape, bool decimated,
                                      const std::vector<std::size_t>& offset, double dual_scale,
                                      const std::string& prefix) {
  const auto lowpass = lowpass_filter(flavor.filter);
  const std::size_t d = shape.rank();
  std::vector<AxisFactors> axes;
  for (std::size_t a = 0; a < d; ++a) axes.push_back(axis_factors(lowpass, shape.dim(a), flavor.levels));

  auto make = [&](std::size_t level, unsigned pattern, bool approximation) {
    Subband sb;
    sb.level = level;
    sb.offset = offset;
    sb.step.assign(d, decimated ? (std::size_t{1} << level) : 1);
    sb.dual_scale = dual_scale;
    std::string tag;
    for (std::size_t a = 0; a < d; ++a) tag += (approximation || !((pattern >> (d - 1 - a)) & 1u)) ? 'L' : 'H';
    sb.name = prefix + "j" + std::to_string(level) + "." + tag;
    // Undecimated atoms carry 2^{-j/2} per axis so the frame is Parseval.
    const double amp = decimated ? 1.0 : std::pow(2.0, -0.5 * static_cast<double>(level * d));
    sb.psi = SpectrumField(shape);
    for (std::size_t p = 0; p < shape.size(); ++p) {
      const auto pc = shape.coords(p);
      Complex v = amp;
      for (std::size_t a = 0; a < d; ++a) {
        const bool high = !approximation && ((pattern >> (d - 1 - a)) & 1u);
        v *= high ? axes[a].high[level - 1][pc[a]] : axes[a].low[level - 1][pc[a]];
      }
      sb.psi[p] = v;
    }
    return sb;
  };

  std::vector<Subband> out;
  const unsigned patterns = 1u << d;
  for (std::size_t j = 1; j <= flavor.levels; ++j) {
    for (unsigned pattern = 1; pattern < patterns; ++pattern) out.push_back(make(j, pattern, false));
  }
  out.push_back(make(flavor.levels, 0, true));
  return out;
}

}  // namespace

FrameTransform build_generators(const FrameFlavor& flavor, const GridShape& shape) {
  check_depth(flavor, shape);
  FrameTransform f;
  f.flavor = flavor;
  f.shape = shape;
  const std::size_t d = shape.rank();
  const std::vector<std::size_t> origin(d, 0);
  switch (flavor.kind) {
    case FrameKind::Canonical: {
      Subband sb;
      sb.name = "canonical";
      sb.psi = SpectrumField(shape, Complex(1.0, 0.0));
      sb.offset = origin;
      sb.step.assign(d, 1);
      f.subbands.push_back(std::move(sb));
      break;
    }
    case FrameKind::OrthonormalWavelet:
      f.subbands = wavelet_subbands(flavor, shape, true, origin, 1.0, "");
      break;
    case FrameKind::Undecimated:
      f.subbands = wavelet_subbands(flavor, shape, false, origin, 1.0, "");
      break;
    case FrameKind::ShiftedUnion: {
      auto shifts = flavor.shifts;
      if (shifts.empty()) {
        for (unsigned corner = 0; corner < (1u << d); ++corner) {
          std::vector<std::size_t> s(d);
          for (std::size_t a = 0; a < d; ++a) s[a] = (corner >> a) & 1u;
          shifts.push_back(s);
        }
        f.flavor.shifts = shifts;
      }
      const double scale = 1.0 / static_cast<double>(shifts.size());
      for (std::size_t k = 0; k < shifts.size(); ++k) {
        if (shifts[k].size() != d) throw Error(ErrorCode::InvalidArgument, "shift rank differs from grid rank");
        auto bands = wavelet_subbands(flavor, shape, true, shifts[k], scale, "s" + std::to_string(k) + ".");
        for (auto& b : bands) f.subbands.push_back(std::move(b));
      }
      break;
    }
  }
  return f;
}

SpectrumField prefilter(const DegradationModel& model, double lambda) {
  if (lambda < 0) throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
  SpectrumField G(model.shape(), Complex(0.0, 0.0));
  for (std::size_t p = 0; p < G.size(); ++p) {
    if (model.Q.contains(p)) G[p] = model.H[p] / (std::norm(model.H[p]) + lambda);
  }
  return G;
}

FrameTransform build_frame(const FrameFlavor& flavor, const GridShape& shape, const DegradationModel& model,
                           double lambda) {
  require_same_shape(shape, model.shape(), "build_frame: model shape differs");
  FrameTransform f = build_generators(flavor, shape);
  f.G = prefilter(model, lambda);
  f.lambda = lambda;
  return f;
}

namespace {

FrameCoefficients analyze_spectrum(const SpectrumField& X, const FrameTransform& frame) {
  FrameCoefficients out;
  out.bands.reserve(frame.subbands.size());
  std::vector<Complex> buf(X.size());
  for (const auto& sb : frame.subbands) {
    for (std::size_t p = 0; p < X.size(); ++p) buf[p] = X[p] * std::conj(sb.psi[p]);
    fft_inplace(buf, X.shape(), +1);
    const double scale = 1.0 / static_cast<double>(X.size());
    const auto pos = sb.positions(X.shape());
    std::vector<double> c(pos.size());
    for (std::size_t k = 0; k < pos.size(); ++k) c[k] = buf[pos[k]].real() * scale;
    out.bands.push_back(std::move(c));
  }
  return out;
}

void check_lengths(const FrameCoefficients& coeffs, const FrameTransform& frame) {
  if (coeffs.bands.size() != frame.subbands.size()) {
    throw Error(ErrorCode::LengthMismatch, "coefficient subband count differs from frame");
  }
  for (std::size_t m = 0; m < coeffs.bands.size(); ++m) {
    if (coeffs.bands[m].size() != frame.subbands[m].count(frame.shape)) {
      throw Error(ErrorCode::LengthMismatch, "coefficient count differs in subband " + frame.subbands[m].name);
    }
  }
}

// Adds (DFT of the lattice-placed coefficients) * dual generator to acc.
void accumulate_band(std::span<const double> values, const Subband& sb, const GridShape& shape,
                     std::vector<Complex>& acc, std::vector<Complex>& work) {
  std::fill(work.begin(), work.end(), Complex(0.0, 0.0));
  const auto pos = sb.positions(shape);
  for (std::size_t k = 0; k < pos.size(); ++k) work[pos[k]] += values[k];
  fft_inplace(work, shape, -1);
  for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += work[p] * sb.dual(p);
}

}  // namespace

FrameCoefficients analyze_raw(const SpatialField& x, const FrameTransform& frame) {
  require_same_shape(x.shape(), frame.shape, "analyze: shapes differ");
  return analyze_spectrum(dft_forward(x), frame);
}

SpatialField synthesize_raw(const FrameCoefficients& coeffs, const FrameTransform& frame) {
  check_lengths(coeffs, frame);
  std::vector<Complex> acc(frame.shape.size(), Complex(0.0, 0.0)), work(frame.shape.size());
  for (std::size_t m = 0; m < frame.subbands.size(); ++m) {
    accumulate_band(coeffs.bands[m], frame.subbands[m], frame.shape, acc, work);
  }
  return dft_inverse(SpectrumField(frame.shape, std::move(acc)));
}

FrameCoefficients analyze(const SpatialField& r, const FrameTransform& frame, const DegradationModel& model) {
  require_same_shape(r.shape(), frame.shape, "analyze: shapes differ");
  require_same_shape(r.shape(), model.shape(), "analyze: model shape differs");
  SpectrumField R = dft_forward(r);
  for (std::size_t p = 0; p < R.size(); ++p) {
    R[p] = model.Q.contains(p) ? std::conj(frame.G[p]) * R[p] : Complex(0.0, 0.0);
  }
  return analyze_spectrum(R, frame);
}

SpatialField synthesize(const FrameCoefficients& coeffs, const FrameTransform& frame, const DegradationModel& model) {
  check_lengths(coeffs, frame);
  std::vector<Complex> acc(frame.shape.size(), Complex(0.0, 0.0)), work(frame.shape.size());
  for (std::size_t m = 0; m < frame.subbands.size(); ++m) {
    accumulate_band(coeffs.bands[m], frame.subbands[m], frame.shape, acc, work);
  }
  for (std::size_t p = 0; p < acc.size(); ++p) {
    if (!model.Q.contains(p)) acc[p] = 0.0;
  }
  return dft_inverse(SpectrumField(frame.shape, std::move(acc)));
}

SpatialField synthesize_band(std::span<const double> values, std::size_t m, const FrameTransform& frame,
                             const DegradationModel& model) {
  const Subband& sb = frame.subbands.at(m);
  if (values.size() != sb.count(frame.shape)) throw Error(ErrorCode::LengthMismatch, "band length");
  std::vector<Complex> acc(frame.shape.size(), Complex(0.0, 0.0)), work(frame.shape.size());
  accumulate_band(values, sb, frame.shape, acc, work);
  for (std::size_t p = 0; p < acc.size(); ++p) {
    if (!model.Q.contains(p)) acc[p] = 0.0;
  }
  return dft_inverse(SpectrumField(frame.shape, std::move(acc)));
}

namespace {

template <class Weight>
std::vector<double> band_constants(const FrameTransform& frame, const DegradationModel& model, double tol,
                                   const char* what, Weight weight) {
  if (model.Q.count() == 0) throw Error(ErrorCode::EmptyObservableSet, what);
  const double D = static_cast<double>(frame.shape.size());
  std::vector<double> out;
  for (const auto& sb : frame.subbands) {
    Complex acc = 0.0;
    for (std::size_t p = 0; p < sb.psi.size(); ++p) {
      if (!model.Q.contains(p)) continue;
      acc += frame.G[p] * sb.psi[p] * std::conj(sb.dual(p)) * weight(model.H[p]);
    }
    acc /= D;
    if (std::abs(acc.imag()) > tol * (std::abs(acc.real()) + 1.0)) {
      throw Error(ErrorCode::ImaginaryResidueTooLarge, std::string(what) + " in subband " + sb.name);
    }
    out.push_back(acc.real());
  }
  return out;
}

}  // namespace

std::vector<double> gamma_bar(const FrameTransform& frame, const DegradationModel& model, double tol) {
  return band_constants(frame, model, tol, "gamma_bar", [](Complex h) { return 1.0 / h; });
}

std::vector<double> kappa(const FrameTransform& frame, const DegradationModel& model, double tol) {
  return band_constants(frame, model, tol, "kappa", [](Complex h) { return 1.0 / (h * std::norm(h)); });
}

std::vector<double> subband_noise_std(const FrameTransform& frame, const DegradationModel& model) {
  const double D = static_cast<double>(frame.shape.size());
  std::vector<double> out;
  for (const auto& sb : frame.subbands) {
    double acc = 0.0;
    for (std::size_t p = 0; p < sb.psi.size(); ++p) {
      if (model.Q.contains(p)) acc += std::norm(frame.G[p]) * std::norm(sb.psi[p]);
    }
    out.push_back(std::sqrt(model.gamma * acc / D));
  }
  return out;
}

// --------------------------------------------------------- CrossCorrelation

CrossCorrelation::CrossCorrelation(const FrameTransform& frame, const DegradationModel& model, long radius)
    : frame_(&frame), model_(&model), radius_(radius) {
  if (model.Q.count() == 0) throw Error(ErrorCode::EmptyObservableSet, "gamma_bar_cross");
}

CrossCorrelation gamma_bar_cross(const FrameTransform& frame, const DegradationModel& model, long radius) {
  return CrossCorrelation(frame, model, radius);
}

SpectrumField CrossCorrelation::pair_spectrum(std::size_t m, std::size_t mp) const {
  const auto& a = frame_->subbands.at(m);
  const auto& b = frame_->subbands.at(mp);
  SpectrumField A(frame_->shape, Complex(0.0, 0.0));
  for (std::size_t p = 0; p < A.size(); ++p) {
    if (model_->Q.contains(p)) A[p] = frame_->G[p] * a.psi[p] * std::conj(b.dual(p)) / model_->H[p];
  }
  return A;
}

void CrossCorrelation::truncate(SpatialField& seq) const {
  if (radius_ < 0) return;
  const GridShape& shape = seq.shape();
  for (std::size_t x = 0; x < seq.size(); ++x) {
    const auto c = shape.coords(x);
    for (std::size_t a = 0; a < shape.rank(); ++a) {
      const std::size_t dist = std::min(c[a], shape.dim(a) - c[a]);
      if (static_cast<long>(dist) > radius_) {
        seq[x] = 0.0;
        break;
      }
    }
  }
}

SpatialField CrossCorrelation::sequence(std::size_t m, std::size_t mp) const {
  SpatialField seq = dft_inverse(pair_spectrum(m, mp));
  truncate(seq);
  return seq;
}

double CrossCorrelation::value(std::size_t ell, std::size_t i) const {
  auto locate = [&](std::size_t g) {
    for (std::size_t m = 0; m < frame_->subbands.size(); ++m) {
      const std::size_t n = frame_->subbands[m].count(frame_->shape);
      if (g < n) return std::pair{m, frame_->subbands[m].positions(frame_->shape)[g]};
      g -= n;
    }
    throw Error(ErrorCode::LengthMismatch, "coefficient index out of range");
  };
  const auto [m, kl] = locate(ell);
  const auto [mp, ki] = locate(i);
  const GridShape& shape = frame_->shape;
  const auto cl = shape.coords(kl);
  const auto ci = shape.coords(ki);
  std::vector<std::size_t> delta(shape.rank());
  for (std::size_t a = 0; a < shape.rank(); ++a) delta[a] = (ci[a] + shape.dim(a) - cl[a]) % shape.dim(a);
  return sequence(m, mp)[shape.flat(delta)];
}

double CrossCorrelation::weighted_double_sum(const FrameCoefficients& t) const {
  const FrameTransform& frame = *frame_;
  const GridShape& shape = frame.shape;
  const std::size_t M = frame.subbands.size();
  if (t.bands.size() != M) throw Error(ErrorCode::LengthMismatch, "weights per subband");
  const std::size_t D = shape.size();

  // Lattice-placed weights in the frequency domain.
  std::vector<std::vector<Complex>> T(M, std::vector<Complex>(D));
  for (std::size_t m = 0; m < M; ++m) {
    const auto pos = frame.subbands[m].positions(shape);
    if (t.bands[m].size() != pos.size()) throw Error(ErrorCode::LengthMismatch, "weights in subband");
    std::fill(T[m].begin(), T[m].end(), Complex(0.0, 0.0));
    for (std::size_t k = 0; k < pos.size(); ++k) T[m][pos[k]] = t.bands[m][k];
    fft_inplace(T[m], shape, -1);
  }

  std::vector<std::size_t> mirror(D);
  for (std::size_t x = 0; x < D; ++x) mirror[x] = shape.mirror(x);

  double total = 0.0;
  std::vector<Complex> b(D);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t mp = m; mp < M; ++mp) {
      // b(delta) = a_{m,m'}(delta) a_{m',m}(-delta)
      const SpatialField a = sequence(m, mp);
      const SpatialField a_rev = m == mp ? a : sequence(mp, m);
      for (std::size_t x = 0; x < D; ++x) b[x] = a[x] * a_rev[mirror[x]];
      fft_inplace(b, shape, -1);
      Complex term = 0.0;
      for (std::size_t p = 0; p < D; ++p) term += std::conj(T[m][p]) * T[mp][p] * std::conj(b[p]);
      term /= static_cast<double>(D);
      total += m == mp ? term.real() : 2.0 * term.real();
    }
  }
  return total;
}

}  // namespace surelet
