#include "surelet/risk.hpp"

#include <algorithm>
#include <cmath>

namespace surelet {

RiskReport sure_estimate(const SpatialField& s_hat, const SpatialField& pilot, const FrameCoefficients& theta_prime,
                         std::span<const double> gamma_bars, const DegradationModel& model) {
  require_same_shape(s_hat.shape(), pilot.shape(), "sure_estimate: estimate and pilot differ");
  require_same_shape(s_hat.shape(), model.shape(), "sure_estimate: model shape differs");
  if (model.Q.count() == 0) throw Error(ErrorCode::EmptyObservableSet, "sure_estimate");
  if (theta_prime.bands.size() != gamma_bars.size()) throw Error(ErrorCode::LengthMismatch, "gamma-bar per subband");
  const double D = static_cast<double>(s_hat.size());
  double penalty = 0.0;
  for (std::size_t m = 0; m < gamma_bars.size(); ++m) {
    double acc = 0.0;
    for (double d : theta_prime.bands[m]) acc += d;
    penalty += acc * gamma_bars[m];
  }
  RiskReport rep;
  rep.data_term = mean_square_difference(s_hat, pilot);
  rep.delta_hat = model.gamma / D * (2.0 * penalty - model.inverse_power_sum(2));
  rep.e_hat = rep.data_term + rep.delta_hat;
  rep.chi = model.chi;
  rep.card_Q = model.Q.count();
  return rep;
}

SpatialField divide_by_response(const SpatialField& x, const DegradationModel& model) {
  require_same_shape(x.shape(), model.shape(), "divide_by_response: shapes differ");
  SpectrumField X = dft_forward(x);
  for (std::size_t p = 0; p < X.size(); ++p) X[p] = model.Q.contains(p) ? X[p] / model.H[p] : Complex(0.0, 0.0);
  return dft_inverse(X);
}

double sure_variance_estimate(const SpatialField& s_hat_H, const SpatialField& pilot_H,
                              const FrameCoefficients& theta_prime, const CrossCorrelation& cross,
                              const DegradationModel& model) {
  if (model.Q.count() == 0) throw Error(ErrorCode::EmptyObservableSet, "sure_variance_estimate");
  const double g = model.gamma;
  if (g == 0.0) return 0.0;
  const double D = static_cast<double>(s_hat_H.size());
  const double data = mean_square_difference(s_hat_H, pilot_H);
  const double cross_sum = cross.weighted_double_sum(theta_prime);
  return 4.0 * g / D * data + 4.0 * g * g / (D * D) * cross_sum - 2.0 * g * g / (D * D) * model.inverse_power_sum(4);
}

ProbeRisk identity_probe(const SpectrumField& R, const DegradationModel& model, double lambda) {
  require_same_shape(R.shape(), model.shape(), "identity_probe: shapes differ");
  if (model.Q.count() == 0) throw Error(ErrorCode::EmptyObservableSet, "identity_probe");
  const double D = static_cast<double>(R.size());
  const double g = model.gamma;
  double data = 0, data_H = 0, trace = 0, inv2 = 0, inv4 = 0, cross = 0;
  for (std::size_t p = 0; p < R.size(); ++p) {
    if (!model.Q.contains(p)) continue;
    const double h2 = std::norm(model.H[p]);
    const double w = h2 + lambda;
    const double r2 = std::norm(R[p]);
    data += lambda * lambda * r2 / (h2 * w * w);
    data_H += lambda * lambda * r2 / (h2 * h2 * w * w);
    trace += 1.0 / w;
    cross += 1.0 / (w * w);
    inv2 += 1.0 / h2;
    inv4 += 1.0 / (h2 * h2);
  }
  ProbeRisk pr;
  pr.data_term = data / (D * D);
  pr.delta_hat = g / D * (2.0 * trace - inv2);
  pr.e_hat = pr.data_term + pr.delta_hat;
  pr.v_max = 4.0 * g / D * (data_H / (D * D)) + 4.0 * g * g / (D * D) * cross;
  pr.variance_hat = pr.v_max - 2.0 * g * g / (D * D) * inv4;
  return pr;
}

bool chi_rule_holds(const ProbeRisk& probe) { return probe.e_hat > 10.0 * std::sqrt(probe.v_max); }

ChiSelection select_chi(const SpatialField& r, const SpectrumField& H, double gamma, double lambda, int iterations) {
  require_same_shape(r.shape(), H.shape(), "select_chi: shapes differ");
  double hmax = 0.0;
  for (const auto& v : H.values()) hmax = std::max(hmax, std::abs(v));
  if (!(hmax > 0)) throw Error(ErrorCode::InvalidArgument, "select_chi: blur response vanishes");
  const SpectrumField R = dft_forward(r);

  struct Trial {
    bool ok = false;
    DegradationModel model;
    ProbeRisk probe;
  };
  auto trial = [&](double chi) {
    Trial t;
    try {
      t.model = make_model(H, gamma, chi);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyObservableSet) return t;
      throw;
    }
    t.probe = identity_probe(R, t.model, lambda);
    t.ok = chi_rule_holds(t.probe);
    return t;
  };

  Trial at_zero = trial(0.0);
  if (at_zero.ok) return {0.0, std::move(at_zero.model), at_zero.probe, 0.0};

  const double step = std::ldexp(hmax, -iterations);
  double lo = 0.0;
  double hi = hmax - step;
  Trial best = trial(hi);
  if (!best.ok) throw Error(ErrorCode::NoAdmissibleChi, "no threshold below max|H| satisfies the risk rule");
  // Invariant: lo fails, hi passes.
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    Trial t = trial(mid);
    if (t.ok) {
      hi = mid;
      best = std::move(t);
    } else {
      lo = mid;
    }
  }
  return {hi, std::move(best.model), best.probe, lo};
}

double subband_criterion(const FrameCoefficients& coeffs, const FrameCoefficients& pilot_coeffs, const LetSpec& spec,
                         std::span<const double> sigmas, std::span<const double> gamma_bars, std::size_t m,
                         const FrameTransform& frame, const DegradationModel& model) {
  if (!frame.orthonormal()) throw Error(ErrorCode::NotOrthonormalFlavor, "subband criterion needs an orthonormal basis");
  if (!model.Q.is_full()) {
    throw Error(ErrorCode::NotOrthonormalFlavor, "projected atoms are not orthonormal unless Q covers the grid");
  }
  const ThetaResult th = apply_theta(coeffs, spec, sigmas);
  const auto& v = th.value.bands.at(m);
  const auto& d = th.derivative.bands.at(m);
  const auto& p = pilot_coeffs.bands.at(m);
  if (p.size() != v.size()) throw Error(ErrorCode::LengthMismatch, "pilot coefficients");
  double fit = 0.0, slope = 0.0;
  for (std::size_t l = 0; l < v.size(); ++l) {
    fit += (v[l] - p[l]) * (v[l] - p[l]);
    slope += d[l];
  }
  return fit + 2.0 * model.gamma * slope * gamma_bars[m];
}

LambdaChoice lambda_heuristic(const SpatialField& r, double gamma) {
  const double D = static_cast<double>(r.size());
  double sum = 0.0;
  for (double v : r.values()) sum += v;
  const double mean = sum / D;
  const double denom = mean_square(r) - mean * mean - gamma;
  if (!(denom > 0)) return {0.0, true};
  return {3.0 * gamma / denom, false};
}

}  // namespace surelet
