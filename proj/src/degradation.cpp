#include "surelet/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "surelet/rng.hpp"

namespace surelet {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
    }
    return std::stod(text);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Config, "not a number: '" + text + "'");
  }
}

// 1D kernels, each with its center tap at index taps.size()/2.
std::vector<double> box_taps(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::vector<double> gaussian_taps(double sigma) {
  const auto radius = static_cast<std::size_t>(std::ceil(4.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(radius);
    taps[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

// Places a centered kernel on the periodic grid (negative taps wrap) and
// returns its DFT.
SpectrumField response_of_kernel(const SpatialField& kernel, const GridShape& shape) {
  const GridShape& ks = kernel.shape();
  if (ks.rank() != shape.rank()) throw Error(ErrorCode::ShapeMismatch, "kernel rank differs from grid rank");
  for (std::size_t a = 0; a < shape.rank(); ++a) {
    if (ks.dim(a) > shape.dim(a)) throw Error(ErrorCode::KernelLargerThanGrid, "kernel does not fit the grid");
  }
  SpatialField h(shape, 0.0);
  std::vector<std::size_t> pos(shape.rank());
  for (std::size_t k = 0; k < kernel.size(); ++k) {
    const auto kc = ks.coords(k);
    for (std::size_t a = 0; a < shape.rank(); ++a) {
      const std::size_t center = ks.dim(a) / 2;
      pos[a] = (kc[a] + shape.dim(a) - center) % shape.dim(a);
    }
    h[shape.flat(pos)] += kernel[k];
  }
  return dft_forward(h);
}

SpatialField separable_kernel(const std::vector<std::vector<double>>& axes) {
  std::vector<std::size_t> dims;
  for (const auto& a : axes) dims.push_back(a.size());
  GridShape ks(dims);
  SpatialField k(ks);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const auto c = ks.coords(i);
    double v = 1.0;
    for (std::size_t a = 0; a < axes.size(); ++a) v *= axes[a][c[a]];
    k[i] = v;
  }
  return k;
}

double cosine_axis(std::size_t p, std::size_t n, double fc) {
  const double dn = static_cast<double>(n);
  if (2 * p > n) p = n - p;  // real symmetric completion
  const double pd = static_cast<double>(p);
  if (pd <= fc * dn) return 1.0;
  return std::cos(std::numbers::pi * (pd - fc * dn) / ((1.0 - 2.0 * fc) * dn));
}

}  // namespace

BlurSpec parse_blur(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  if (kind == "dirac" || kind == "none") return blur::Dirac{};
  if (kind == "uniform") {
    if (arg.empty()) throw Error(ErrorCode::Config, "uniform blur needs a size, e.g. uniform:5");
    blur::Uniform u;
    for (const auto& part : split(arg, 'x')) {
      const double v = parse_number(part);
      if (v < 1 || std::floor(v) != v || static_cast<long>(v) % 2 == 0) {
        throw Error(ErrorCode::Config, "uniform blur sizes must be odd positive integers");
      }
      u.sizes.push_back(static_cast<std::size_t>(v));
    }
    return u;
  }
  if (kind == "gaussian") {
    const double s = parse_number(arg);
    if (!(s > 0)) throw Error(ErrorCode::Config, "gaussian sigma must be positive");
    return blur::Gaussian{s};
  }
  if (kind == "cosine") {
    const double fc = parse_number(arg);
    if (!(fc >= 0 && fc < 0.5)) throw Error(ErrorCode::Config, "cosine cutoff must lie in [0, 1/2)");
    return blur::Cosine{fc};
  }
  throw Error(ErrorCode::Config, "unknown blur '" + text + "'");
}

std::string blur_name(const BlurSpec& spec) {
  struct Namer {
    std::string operator()(const blur::Dirac&) const { return "dirac"; }
    std::string operator()(const blur::Uniform& u) const {
      std::string s = "uniform:";
      for (std::size_t i = 0; i < u.sizes.size(); ++i) s += (i ? "x" : "") + std::to_string(u.sizes[i]);
      return s;
    }
    std::string operator()(const blur::Gaussian& g) const {
      std::ostringstream os;
      os << "gaussian:" << g.sigma;
      return os.str();
    }
    std::string operator()(const blur::Cosine& c) const {
      std::ostringstream os;
      os << "cosine:" << c.fc;
      return os.str();
    }
    std::string operator()(const blur::Explicit&) const { return "explicit"; }
  };
  return std::visit(Namer{}, spec);
}

SpectrumField make_blur_response(const BlurSpec& spec, const GridShape& shape) {
  struct Builder {
    const GridShape& shape;
    SpectrumField operator()(const blur::Dirac&) const { return SpectrumField(shape, Complex(1.0, 0.0)); }
    SpectrumField operator()(const blur::Uniform& u) const {
      if (u.sizes.empty()) throw Error(ErrorCode::InvalidArgument, "uniform blur without size");
      std::vector<std::vector<double>> axes;
      for (std::size_t a = 0; a < shape.rank(); ++a) {
        const std::size_t n = u.sizes.size() == 1 ? u.sizes[0] : u.sizes.at(a);
        if (n % 2 == 0) throw Error(ErrorCode::InvalidArgument, "uniform blur sizes must be odd");
        axes.push_back(box_taps(n));
      }
      return response_of_kernel(separable_kernel(axes), shape);
    }
    SpectrumField operator()(const blur::Gaussian& g) const {
      if (!(g.sigma > 0)) throw Error(ErrorCode::InvalidArgument, "gaussian sigma must be positive");
      std::vector<std::vector<double>> axes(shape.rank(), gaussian_taps(g.sigma));
      return response_of_kernel(separable_kernel(axes), shape);
    }
    SpectrumField operator()(const blur::Cosine& c) const {
      if (!(c.fc >= 0 && c.fc < 0.5)) throw Error(ErrorCode::InvalidArgument, "cosine cutoff outside [0, 1/2)");
      SpectrumField H(shape);
      for (std::size_t p = 0; p < H.size(); ++p) {
        const auto pc = shape.coords(p);
        double v = 1.0;
        for (std::size_t a = 0; a < shape.rank(); ++a) v *= cosine_axis(pc[a], shape.dim(a), c.fc);
        H[p] = v;
      }
      return H;
    }
    SpectrumField operator()(const blur::Explicit& e) const { return response_of_kernel(e.kernel, shape); }
  };
  return std::visit(Builder{shape}, spec);
}

SpatialField convolve(const SpatialField& s, const SpectrumField& H) {
  require_same_shape(s.shape(), H.shape(), "blur: shapes differ");
  SpectrumField S = dft_forward(s);
  for (std::size_t p = 0; p < S.size(); ++p) S[p] *= H[p];
  return dft_inverse(S);
}

double gamma_for_bsnr(const SpatialField& s, const SpectrumField& H, double bsnr) {
  require_same_shape(s.shape(), H.shape(), "gamma_for_bsnr: shapes differ");
  SpectrumField S = dft_forward(s);
  double energy = 0.0;
  for (std::size_t p = 0; p < S.size(); ++p) energy += std::norm(H[p] * S[p]);
  const double D = static_cast<double>(S.size());
  energy /= D;  // Parseval: ||h*s||^2
  if (!(energy > 0)) throw Error(ErrorCode::ZeroBlurredSignal, "blurred signal has zero energy");
  return energy / (D * std::pow(10.0, bsnr / 10.0));
}

double bsnr_db(const SpatialField& s, const SpectrumField& H, double gamma) {
  const SpatialField hs = convolve(s, H);
  return 10.0 * std::log10(squared_norm(hs) / (static_cast<double>(hs.size()) * gamma));
}

SpatialField white_noise(const GridShape& shape, double gamma, std::uint64_t seed) {
  if (gamma < 0) throw Error(ErrorCode::InvalidArgument, "noise variance must be nonnegative");
  SpatialField n(shape, 0.0);
  if (gamma == 0) return n;
  GaussianRng rng(seed);
  const double sd = std::sqrt(gamma);
  for (auto& v : n.values()) v = sd * rng.standard_normal();
  return n;
}

SpatialField degrade(const SpatialField& s, const SpectrumField& H, double gamma, std::uint64_t seed) {
  if (gamma < 0) throw Error(ErrorCode::InvalidArgument, "noise variance must be nonnegative");
  SpatialField r = convolve(s, H);
  if (gamma > 0) {
    const SpatialField n = white_noise(s.shape(), gamma, seed);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += n[i];
  }
  return r;
}

FrequencySet compute_observable_set(const SpectrumField& H, double chi) {
  if (chi < 0) throw Error(ErrorCode::InvalidArgument, "chi must be nonnegative");
  double hmax = 0.0;
  for (const auto& v : H.values()) hmax = std::max(hmax, std::abs(v));
  const double threshold = std::max(chi, 1e-12 * hmax);
  FrequencySet Q(H.shape(), false);
  for (std::size_t p = 0; p < H.size(); ++p) Q.set(p, std::abs(H[p]) > threshold);
  if (Q.count() == 0) throw Error(ErrorCode::EmptyObservableSet, "no frequency bin exceeds chi");
  return Q;
}

DegradationModel make_model(SpectrumField H, double gamma, double chi) {
  DegradationModel m;
  m.Q = compute_observable_set(H, chi);
  m.H = std::move(H);
  m.gamma = gamma;
  m.chi = chi;
  return m;
}

double DegradationModel::inverse_power_sum(int power) const {
  double s = 0.0;
  for (std::size_t p = 0; p < H.size(); ++p) {
    if (Q.contains(p)) s += std::pow(std::abs(H[p]), -power);
  }
  return s;
}

SpatialField pilot_inverse(const SpatialField& r, const DegradationModel& model, bool doubly) {
  require_same_shape(r.shape(), model.shape(), "pilot_inverse: shapes differ");
  if (model.Q.count() == 0) throw Error(ErrorCode::EmptyObservableSet, "pilot_inverse: empty Q");
  SpectrumField R = dft_forward(r);
  for (std::size_t p = 0; p < R.size(); ++p) {
    if (model.Q.contains(p)) {
      R[p] /= model.H[p];
      if (doubly) R[p] /= model.H[p];
    } else {
      R[p] = 0.0;
    }
  }
  return dft_inverse(R);
}

}  // namespace surelet
