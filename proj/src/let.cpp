#include "surelet/let.hpp"

#include <cmath>
#include <sstream>

namespace surelet {

ValueAndSlope f_blu(double rho, double omega, double sigma) {
  const double scale = omega * sigma;
  // A vanishing scale is the limit where the gate is fully open.
  if (!(scale > 0)) return {rho, 1.0};
  const double x = rho / scale;
  if (std::abs(x) > 6.0) return {rho, 1.0};  // exp(-u) < exp(-1.6e6) flushes to 0
  const double x2 = x * x;
  const double x4 = x2 * x2;
  const double u = x4 * x4;
  const double e = std::exp(-u);
  return {(1.0 - e) * rho, 1.0 - e * (1.0 - 8.0 * u)};
}

ValueAndSlope f_tanh(double rho, double xi, double omega_p, double sigma) {
  const double scale = omega_p * sigma;
  if (!(scale > 0)) return {0.0, 0.0};
  const double tp = std::tanh((rho + xi * sigma) / scale);
  const double tm = std::tanh((rho - xi * sigma) / scale);
  const double gate = tp - tm;
  const double slope = ((1.0 - tp * tp) - (1.0 - tm * tm)) / scale;
  return {gate * rho, gate + rho * slope};
}

ValueAndSlope evaluate(const ElementaryFunction& f, double rho, double sigma) {
  struct Eval {
    double rho, sigma;
    ValueAndSlope operator()(const let::Identity&) const { return {rho, 1.0}; }
    ValueAndSlope operator()(const let::BluExp& b) const { return f_blu(rho, b.omega, sigma); }
    ValueAndSlope operator()(const let::TanhGate& t) const { return f_tanh(rho, t.xi, t.omega_p, sigma); }
  };
  return std::visit(Eval{rho, sigma}, f);
}

std::string function_name(const ElementaryFunction& f) {
  struct Namer {
    std::string operator()(const let::Identity&) const { return "identity"; }
    std::string operator()(const let::BluExp& b) const {
      std::ostringstream os;
      os << "blu(" << b.omega << ")";
      return os.str();
    }
    std::string operator()(const let::TanhGate& t) const {
      std::ostringstream os;
      os << "tanh(" << t.xi << "," << t.omega_p << ")";
      return os.str();
    }
  };
  return std::visit(Namer{}, f);
}

LetSpec LetSpec::uniform(std::size_t subbands, std::vector<ElementaryFunction> per_subband) {
  if (per_subband.empty()) throw Error(ErrorCode::InvalidArgument, "each subband needs at least one function");
  LetSpec s;
  s.functions.assign(subbands, per_subband);
  return s;
}

std::size_t LetSpec::parameter_count() const {
  std::size_t n = 0;
  for (const auto& f : functions) n += f.size();
  return n;
}

std::size_t LetSpec::flat_index(std::size_t m, std::size_t i) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < m; ++k) idx += functions.at(k).size();
  return idx + i;
}

void LetSpec::set_flat_weights(std::span<const double> a) {
  if (a.size() != parameter_count()) throw Error(ErrorCode::LengthMismatch, "weight count differs from spec");
  weights.assign(functions.size(), {});
  std::size_t idx = 0;
  for (std::size_t m = 0; m < functions.size(); ++m) {
    weights[m].assign(a.begin() + static_cast<long>(idx), a.begin() + static_cast<long>(idx + functions[m].size()));
    idx += functions[m].size();
  }
}

std::vector<double> LetSpec::flat_weights() const {
  std::vector<double> out;
  for (const auto& w : weights) out.insert(out.end(), w.begin(), w.end());
  return out;
}

namespace {

void check_spec(const FrameCoefficients& coeffs, const LetSpec& spec, std::span<const double> sigmas) {
  if (spec.functions.size() != coeffs.bands.size()) {
    throw Error(ErrorCode::LengthMismatch, "spec subband count differs from coefficients");
  }
  if (sigmas.size() != coeffs.bands.size()) throw Error(ErrorCode::LengthMismatch, "one sigma per subband expected");
  for (const auto& f : spec.functions) {
    if (f.empty()) throw Error(ErrorCode::InvalidArgument, "each subband needs at least one function");
  }
}

}  // namespace

ThetaResult apply_theta(const FrameCoefficients& coeffs, const LetSpec& spec, std::span<const double> sigmas) {
  check_spec(coeffs, spec, sigmas);
  if (!spec.has_weights()) throw Error(ErrorCode::WeightsUnset, "LET weights have not been solved");
  if (spec.weights.size() != spec.functions.size()) throw Error(ErrorCode::LengthMismatch, "weights per subband");
  ThetaResult out{FrameCoefficients::zeros_like(coeffs), FrameCoefficients::zeros_like(coeffs)};
  for (std::size_t m = 0; m < coeffs.bands.size(); ++m) {
    const auto& fs = spec.functions[m];
    const auto& ws = spec.weights[m];
    if (ws.size() != fs.size()) throw Error(ErrorCode::LengthMismatch, "weights per function");
    for (std::size_t l = 0; l < coeffs.bands[m].size(); ++l) {
      double v = 0.0, d = 0.0;
      for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto fd = evaluate(fs[i], coeffs.bands[m][l], sigmas[m]);
        v += ws[i] * fd.value;
        d += ws[i] * fd.derivative;
      }
      out.value.bands[m][l] = v;
      out.derivative.bands[m][l] = d;
    }
  }
  return out;
}

std::vector<SpatialField> beta_fields(const FrameCoefficients& coeffs, const FrameTransform& frame,
                                      const DegradationModel& model, const LetSpec& spec,
                                      std::span<const double> sigmas) {
  check_spec(coeffs, spec, sigmas);
  std::vector<SpatialField> out;
  out.reserve(spec.parameter_count());
  std::vector<double> mapped;
  for (std::size_t m = 0; m < coeffs.bands.size(); ++m) {
    const auto& band = coeffs.bands[m];
    mapped.resize(band.size());
    for (const auto& f : spec.functions[m]) {
      for (std::size_t l = 0; l < band.size(); ++l) mapped[l] = evaluate(f, band[l], sigmas[m]).value;
      out.push_back(synthesize_band(mapped, m, frame, model));
    }
  }
  return out;
}

std::vector<double> fprime_sums(const FrameCoefficients& coeffs, const LetSpec& spec, std::span<const double> sigmas,
                                std::span<const double> gamma_bars) {
  check_spec(coeffs, spec, sigmas);
  if (gamma_bars.size() != coeffs.bands.size()) throw Error(ErrorCode::LengthMismatch, "gamma-bar per subband");
  std::vector<double> out;
  for (std::size_t m = 0; m < coeffs.bands.size(); ++m) {
    for (const auto& f : spec.functions[m]) {
      double acc = 0.0;
      for (double rho : coeffs.bands[m]) acc += evaluate(f, rho, sigmas[m]).derivative;
      out.push_back(acc * gamma_bars[m]);
    }
  }
  return out;
}

}  // namespace surelet
