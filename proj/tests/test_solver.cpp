#include <doctest.h>

#include "support.hpp"
#include "surelet/solver.hpp"

using namespace surelet;
using namespace surelet::testing;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

struct Instance {
  SpatialField r;
  DegradationModel model;
  FrameTransform frame;
};

Instance blurred_instance(FrameKind kind, std::size_t n = 32, double chi = 0.05, std::uint64_t seed = 5) {
  const SpatialField s = synthetic_image(n);
  const SpectrumField H = make_blur_response(parse_blur("uniform:3"), s.shape());
  const double gamma = gamma_for_bsnr(s, H, 25.0);
  auto model = make_model(H, gamma, chi);
  auto frame = build_frame(FrameFlavor{kind, 2, "sym4", {}}, s.shape(), model, 0.05);
  return {degrade(s, H, gamma, seed), std::move(model), std::move(frame)};
}

/// E_o-hat with the weights of `fit` replaced by `a`, evaluated directly.
double direct_risk(const Instance& in, const LetFit& fit, const Eigen::VectorXd& a) {
  LetSpec spec = fit.spec;
  spec.set_flat_weights(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())));
  return evaluate_let(in.r, in.frame, in.model, spec).report.e_hat;
}

}  // namespace

TEST_CASE("solve: diagonal hand example") {
  NormalSystem sys;
  sys.gram = Eigen::Vector2d(2, 4).asDiagonal();
  sys.rhs = Eigen::Vector2d(2, 8);
  const auto sol = solve(sys);
  CHECK(sol.a(0) == doctest::Approx(1.0));
  CHECK(sol.a(1) == doctest::Approx(2.0));
  CHECK(sol.ridge == 0.0);
}

TEST_CASE("solve: random SPD residual") {
  GaussianRng rng(17);
  Eigen::MatrixXd A(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) A(i, j) = rng.standard_normal();
  }
  NormalSystem sys;
  sys.gram = A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(6, 6);
  sys.rhs = Eigen::VectorXd(6);
  for (int i = 0; i < 6; ++i) sys.rhs(i) = rng.standard_normal();
  const auto sol = solve(sys);
  CHECK((sys.gram * sol.a - sys.rhs).norm() <= 1e-9 * sys.rhs.norm());
  CHECK(sol.condition >= 1.0);
}

TEST_CASE("solve: zero gram is singular") {
  NormalSystem sys;
  sys.gram = Eigen::MatrixXd::Zero(2, 2);
  sys.rhs = Eigen::VectorXd::Zero(2);
  CHECK(code_of([&] { solve(sys); }) == ErrorCode::SingularSystem);
}

TEST_CASE("solve: zero observation with a gated function yields a singular system") {
  const GridShape shape{16, 16};
  const auto model = make_model(make_blur_response(blur::Dirac{}, shape), 1.0, 0.0);
  const auto frame = build_frame(FrameFlavor{FrameKind::OrthonormalWavelet, 2, "haar", {}}, shape, model, 0.0);
  const LetSpec spec = LetSpec::uniform(frame.subband_count(), {let::BluExp{}});
  CHECK(code_of([&] { optimize_let(SpatialField(shape, 0.0), frame, model, spec); }) == ErrorCode::SingularSystem);
}

TEST_CASE("James-Stein style scalar shrink") {
  const GridShape shape{32, 32};
  const double gamma = 9.0;
  const auto model = make_model(make_blur_response(blur::Dirac{}, shape), gamma, 0.0);
  FrameTransform frame = build_frame(FrameFlavor{FrameKind::Canonical, 0, "sym8", {}}, shape, model, 0.0);
  const SpatialField r = degrade(synthetic_image(32), model.H, gamma, 11);
  const auto fit = optimize_let(r, frame, model, LetSpec::uniform(1, {let::Identity{}}));
  const double rr = squared_norm(r);
  CHECK(fit.system.gram(0, 0) == doctest::Approx(rr).epsilon(1e-12));
  CHECK(fit.system.rhs(0) == doctest::Approx(rr - gamma * 1024.0).epsilon(1e-12));
  CHECK(std::abs(fit.solution.a(0) - (1.0 - gamma * 1024.0 / rr)) < 1e-10);
}

TEST_CASE("gram symmetry and exact quadratic risk") {
  const Instance in = blurred_instance(FrameKind::Undecimated);
  const LetSpec spec = LetSpec::uniform(in.frame.subband_count(), {let::Identity{}, let::BluExp{}});
  const auto fit = optimize_let(in.r, in.frame, in.model, spec);
  const auto& G = fit.system.gram;
  CHECK((G - G.transpose()).cwiseAbs().maxCoeff() < 1e-10 * G.norm());
  CHECK(fit.system.risk(fit.solution.a) == doctest::Approx(fit.report.e_hat).epsilon(1e-9));
  GaussianRng rng(2);
  for (int t = 0; t < 3; ++t) {
    Eigen::VectorXd a(static_cast<Eigen::Index>(fit.system.dim()));
    for (auto& v : a) v = rng.standard_normal();
    CHECK(fit.system.risk(a) == doctest::Approx(direct_risk(in, fit, a)).epsilon(1e-9));
  }
}

TEST_CASE("solved weights are stationary") {
  const Instance in = blurred_instance(FrameKind::Undecimated, 32, 0.05, 6);
  const LetSpec spec = LetSpec::uniform(in.frame.subband_count(), {let::Identity{}, let::TanhGate{}});
  const auto fit = optimize_let(in.r, in.frame, in.model, spec);
  const double e = fit.report.e_hat;
  for (Eigen::Index k = 0; k < fit.solution.a.size(); ++k) {
    const double h = 1e-4 * (1 + std::abs(fit.solution.a(k)));
    Eigen::VectorXd up = fit.solution.a, dn = fit.solution.a;
    up(k) += h;
    dn(k) -= h;
    const double grad = (direct_risk(in, fit, up) - direct_risk(in, fit, dn)) / (2 * h);
    CHECK(std::abs(grad) <= 1e-6 * (1 + std::abs(e)));
  }
}

TEST_CASE("one-weight spec beats every point of a 1001-point grid") {
  const Instance in = blurred_instance(FrameKind::Undecimated, 16);
  const auto fit = optimize_let(in.r, in.frame, in.model, LetSpec::uniform(in.frame.subband_count(), {let::BluExp{}}));
  // a single shared weight: collapse the per-subband system onto one direction
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(fit.system.dim()));
  const double g = ones.dot(fit.system.gram * ones), c = ones.dot(fit.system.rhs);
  const double a_star = c / g;
  auto risk_at = [&](double a) { return direct_risk(in, fit, a * ones); };
  const double best = risk_at(a_star);
  for (int k = 0; k <= 1000; ++k) {
    const double a = a_star - 2.0 + 4.0 * k / 1000.0;
    CHECK(best <= risk_at(a) + 1e-12 * std::abs(best));
  }
}

TEST_CASE("orthonormal flavor decouples across subbands") {
  const GridShape shape{32, 32};
  const SpatialField s = synthetic_image(32);
  const SpectrumField H = random_hermitian_response(shape, 3, 0.4, 1.0);
  const double gamma = gamma_for_bsnr(s, H, 20.0);
  const auto model = make_model(H, gamma, 0.0);
  const auto frame = build_frame(FrameFlavor{FrameKind::OrthonormalWavelet, 3, "sym8", {}}, shape, model, 0.1);
  const SpatialField r = degrade(s, H, gamma, 8);
  const LetSpec spec = LetSpec::uniform(frame.subband_count(), {let::Identity{}, let::BluExp{}});
  const auto fit = optimize_let(r, frame, model, spec);
  const auto pilot_coeffs = analyze_raw(pilot_inverse(r, model), frame);
  for (std::size_t m = 0; m < frame.subband_count(); ++m) {
    const Eigen::VectorXd a = solve_subband(fit.coeffs, pilot_coeffs, spec, fit.sigmas, fit.gamma_bars, gamma, m);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double joint = fit.solution.a(static_cast<Eigen::Index>(spec.flat_index(m, static_cast<std::size_t>(i))));
      CHECK(std::abs(a(i) - joint) <= 1e-8 * (1 + std::abs(joint)));
    }
  }
}

TEST_CASE("duplicate elementary function goes through the ridge path") {
  const Instance in = blurred_instance(FrameKind::OrthonormalWavelet, 32, 0.0, 9);
  const std::size_t M = in.frame.subband_count();
  const auto base = optimize_let(in.r, in.frame, in.model, LetSpec::uniform(M, {let::Identity{}, let::BluExp{}}));
  const auto dup =
      optimize_let(in.r, in.frame, in.model, LetSpec::uniform(M, {let::Identity{}, let::BluExp{}, let::BluExp{}}));
  CHECK(dup.solution.ridge > 0.0);
  const double rel = std::sqrt(squared_norm(dup.estimate - base.estimate) / squared_norm(base.estimate));
  CHECK(rel <= 1e-6);
}

TEST_CASE("variance estimate is attached when requested") {
  const Instance in = blurred_instance(FrameKind::Undecimated, 16);
  const LetSpec spec = LetSpec::uniform(in.frame.subband_count(), {let::Identity{}, let::BluExp{}});
  CHECK(std::isnan(optimize_let(in.r, in.frame, in.model, spec).report.variance_hat));
  FitOptions opt;
  opt.variance = true;
  const auto fit = optimize_let(in.r, in.frame, in.model, spec, opt);
  CHECK(std::isfinite(fit.report.variance_hat));
  opt.cross_radius = 4;
  const auto cut = optimize_let(in.r, in.frame, in.model, spec, opt);
  CHECK(std::isfinite(cut.report.variance_hat));
  CHECK(cut.report.e_hat == fit.report.e_hat);
}
