#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace surelet {

/// Zero-mean Gaussian vector (eta1, eta2, eta~1, eta~2) given by its covariance.
struct GaussianQuad {
  Eigen::Matrix4d cov;

  double c(int i, int j) const { return cov(i, j); }
  /// Throws InvalidCovariance unless cov is symmetric and PSD
  /// (smallest eigenvalue >= -1e-10 * largest).
  void validate() const;
};

/// Indices into GaussianQuad.
enum QuadIndex : int { kEta1 = 0, kEta2 = 1, kEtaT1 = 2, kEtaT2 = 3 };

struct TestFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

TestFunction identity_test_function();
TestFunction cubic_test_function();
/// Soft threshold at t; derivative taken as 0 at the kinks.
TestFunction soft_threshold_test_function(double t);
TestFunction blu_test_function(double omega, double sigma);
TestFunction tanh_test_function(double xi, double omega_p, double sigma);
/// identity, cubic, soft-threshold(0.5), BluExp, TanhGate.
std::vector<TestFunction> standard_test_functions();

/// Random covariances A A^T / 4 with A standard normal, seeded.
std::vector<GaussianQuad> random_quads(std::size_t count, std::uint64_t seed);

enum class SteinIdentity { P1, E1, E3, E4, E5 };
std::string identity_name(SteinIdentity id);
std::vector<SteinIdentity> all_identities();

struct SteinReport {
  SteinIdentity id;
  double lhs = 0.0;
  double rhs = 0.0;
  /// Standard error of lhs - rhs.
  double std_error = 0.0;
  bool pass = false;
};

/// Monte-Carlo estimate of both sides with common random numbers. The
/// covariance factors on the right are exact; only the expectations over
/// Theta are sampled, so lhs - rhs is a mean of i.i.d. terms.
/// pass iff |lhs - rhs| <= sigmas * std_error.
SteinReport check_identity(SteinIdentity id, const GaussianQuad& quad, std::array<double, 2> upsilon,
                           const TestFunction& theta1, const TestFunction& theta2, std::size_t n_samples,
                           std::uint64_t seed, double sigmas = 3.0);

}  // namespace surelet
