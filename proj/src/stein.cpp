#include "surelet/stein.hpp"

#include <cmath>

#include "surelet/error.hpp"
#include "surelet/let.hpp"
#include "surelet/rng.hpp"

namespace surelet {

void GaussianQuad::validate() const {
  if (!cov.allFinite()) throw Error(ErrorCode::InvalidCovariance, "covariance has non-finite entries");
  const double scale = cov.cwiseAbs().maxCoeff();
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (scale + 1.0)) {
    throw Error(ErrorCode::InvalidCovariance, "covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(cov);
  const auto& ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10 * std::max(ev.maxCoeff(), 0.0)) {
    throw Error(ErrorCode::InvalidCovariance, "covariance is not positive semidefinite");
  }
}

TestFunction identity_test_function() {
  return {"identity", [](double x) { return x; }, [](double) { return 1.0; }};
}

TestFunction cubic_test_function() {
  return {"cubic", [](double x) { return x * x * x; }, [](double x) { return 3.0 * x * x; }};
}

TestFunction soft_threshold_test_function(double t) {
  return {"soft-threshold",
          [t](double x) { return x > t ? x - t : (x < -t ? x + t : 0.0); },
          [t](double x) { return std::abs(x) > t ? 1.0 : 0.0; }};
}

TestFunction blu_test_function(double omega, double sigma) {
  return {"blu-exp", [=](double x) { return f_blu(x, omega, sigma).value; },
          [=](double x) { return f_blu(x, omega, sigma).derivative; }};
}

TestFunction tanh_test_function(double xi, double omega_p, double sigma) {
  return {"tanh-gate", [=](double x) { return f_tanh(x, xi, omega_p, sigma).value; },
          [=](double x) { return f_tanh(x, xi, omega_p, sigma).derivative; }};
}

std::vector<TestFunction> standard_test_functions() {
  // Gate scales chosen so the transitions fall inside the unit-variance bulk.
  return {identity_test_function(), cubic_test_function(), soft_threshold_test_function(0.5),
          blu_test_function(3.0, 0.3), tanh_test_function(3.5, 2.25, 0.3)};
}

std::vector<GaussianQuad> random_quads(std::size_t count, std::uint64_t seed) {
  GaussianRng rng(seed);
  std::vector<GaussianQuad> out;
  for (std::size_t k = 0; k < count; ++k) {
    Eigen::Matrix4d A;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) A(i, j) = rng.standard_normal();
    }
    out.push_back({A * A.transpose() / 4.0});
  }
  return out;
}

std::string identity_name(SteinIdentity id) {
  switch (id) {
    case SteinIdentity::P1: return "P1";
    case SteinIdentity::E1: return "E1";
    case SteinIdentity::E3: return "E3";
    case SteinIdentity::E4: return "E4";
    case SteinIdentity::E5: return "E5";
  }
  return "?";
}

std::vector<SteinIdentity> all_identities() {
  return {SteinIdentity::P1, SteinIdentity::E1, SteinIdentity::E3, SteinIdentity::E4, SteinIdentity::E5};
}

SteinReport check_identity(SteinIdentity id, const GaussianQuad& quad, std::array<double, 2> upsilon,
                           const TestFunction& theta1, const TestFunction& theta2, std::size_t n_samples,
                           std::uint64_t seed, double sigmas) {
  quad.validate();
  if (n_samples < 10000) throw Error(ErrorCode::InvalidArgument, "at least 1e4 samples are required");

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(quad.cov);
  const Eigen::Vector4d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix4d S = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();

  const double c11t = quad.c(kEta1, kEtaT1);
  const double c22t = quad.c(kEta2, kEtaT2);
  const double c12t = quad.c(kEta1, kEtaT2);
  const double c21t = quad.c(kEta2, kEtaT1);
  const double ctt = quad.c(kEtaT1, kEtaT2);
  const double var1 = quad.c(kEta1, kEta1);

  GaussianRng rng(seed);
  double sum_l = 0, sum_r = 0, sum_g = 0, sum_g2 = 0;
  Eigen::Vector4d z;
  for (std::size_t k = 0; k < n_samples; ++k) {
    for (int i = 0; i < 4; ++i) z(i) = rng.standard_normal();
    const Eigen::Vector4d e = S * z;
    const double rho1 = upsilon[0] + e(kEta1);
    const double rho2 = upsilon[1] + e(kEta2);
    const double t1 = theta1.value(rho1);
    const double d1 = theta1.derivative(rho1);
    const double et1 = e(kEtaT1);
    const double et2 = e(kEtaT2);
    double lhs = 0, rhs = 0;
    switch (id) {
      case SteinIdentity::P1:
        lhs = t1 * e(kEta1);
        rhs = var1 * d1;
        break;
      case SteinIdentity::E1:
        lhs = t1 * et1;
        rhs = d1 * c11t;
        break;
      case SteinIdentity::E3:
        lhs = t1 * et1 * et2;
        rhs = d1 * et2 * c11t + t1 * ctt;
        break;
      case SteinIdentity::E4:
        lhs = t1 * et1 * et2 * et2;
        rhs = d1 * et2 * et2 * c11t + 2.0 * d1 * ctt * c12t;
        break;
      case SteinIdentity::E5: {
        const double t2 = theta2.value(rho2);
        const double d2 = theta2.derivative(rho2);
        lhs = t1 * t2 * et1 * et2;
        rhs = t1 * t2 * ctt + d1 * t2 * et2 * c11t + t1 * d2 * et1 * c22t + d1 * d2 * (c12t * c21t - c11t * c22t);
        break;
      }
    }
    const double g = lhs - rhs;
    sum_l += lhs;
    sum_r += rhs;
    sum_g += g;
    sum_g2 += g * g;
  }
  const double n = static_cast<double>(n_samples);
  SteinReport rep{id};
  rep.lhs = sum_l / n;
  rep.rhs = sum_r / n;
  const double mean_g = sum_g / n;
  const double var_g = std::max(sum_g2 / n - mean_g * mean_g, 0.0) * n / (n - 1.0);
  rep.std_error = std::sqrt(var_g / n);
  rep.pass = std::abs(rep.lhs - rep.rhs) <= sigmas * rep.std_error;
  return rep;
}

}  // namespace surelet
