#include "surelet/solver.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace surelet {

double NormalSystem::risk(const Eigen::VectorXd& a) const {
  return (a.dot(gram * a) - 2.0 * a.dot(rhs) + constant) / static_cast<double>(grid_size);
}

NormalSystem assemble(const std::vector<SpatialField>& betas, const SpatialField& pilot,
                      std::span<const double> fprime_sums, double gamma) {
  if (betas.size() != fprime_sums.size()) throw Error(ErrorCode::LengthMismatch, "one derivative sum per beta");
  const auto n = static_cast<Eigen::Index>(betas.size());
  NormalSystem sys;
  sys.gram.resize(n, n);
  sys.rhs.resize(n);
  sys.grid_size = pilot.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& bi = betas[static_cast<std::size_t>(i)];
    require_same_shape(bi.shape(), pilot.shape(), "assemble: beta shape differs");
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = inner(bi, betas[static_cast<std::size_t>(j)]);
      sys.gram(i, j) = v;
      sys.gram(j, i) = v;
    }
    sys.rhs(i) = inner(bi, pilot) - gamma * fprime_sums[static_cast<std::size_t>(i)];
  }
  return sys;
}

void attach_constant(NormalSystem& system, const SpatialField& pilot, const DegradationModel& model) {
  system.constant = squared_norm(pilot) - model.gamma * model.inverse_power_sum(2);
  system.grid_size = pilot.size();
}

namespace {

// Scaled entries below this are round-off, not coupling.
constexpr double kCouplingFloor = 1e-12;

struct BlockSolution {
  Eigen::VectorXd y;
  double ridge = 0.0;
  double condition = 0.0;
};

bool solve_block(const Eigen::MatrixXd& B, const Eigen::VectorXd& b, double ridge, BlockSolution& out) {
  const std::array<double, 3> ladder = {ridge, std::max(ridge, 1e-8), std::max(ridge, 1e-6)};
  for (double rel : ladder) {
    Eigen::MatrixXd A = B;
    A.diagonal().array() += rel;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::VectorXd pivots = llt.matrixLLT().diagonal().array().square();
    const double pmax = pivots.maxCoeff();
    const double pmin = pivots.minCoeff();
    if (!(pmax > 0) || !(pmin > 1e-12 * pmax)) continue;
    out.y = llt.solve(b);
    if (!out.y.allFinite()) continue;
    if (rel > 0) {
      // Refine toward B y = b with the ridge factor as preconditioner. A
      // consistent singular system (duplicate columns) converges to an exact
      // stationary point instead of keeping an O(rel) gradient.
      double res = (b - B * out.y).norm();
      for (int it = 0; it < 50 && res > 0; ++it) {
        const Eigen::VectorXd next = out.y + llt.solve(b - B * out.y);
        const double next_res = (b - B * next).norm();
        if (!(next_res < res)) break;
        out.y = next;
        res = next_res;
      }
    }
    out.ridge = rel;
    out.condition = pmax / pmin;
    return true;
  }
  return false;
}

}  // namespace

WeightSolution solve(const NormalSystem& system, double ridge) {
  if (ridge < 0) throw Error(ErrorCode::InvalidArgument, "ridge must be nonnegative");
  const auto n = system.gram.rows();
  if (n == 0) return {};
  // Jacobi equilibration: the pivot test and the ridge act on the unit-diagonal
  // system, so subbands of very different energy do not mask each other.
  // Functions whose beta field vanishes get weight 0.
  const Eigen::VectorXd diag = system.gram.diagonal();
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  bool any = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    parent[static_cast<std::size_t>(i)] = i;
    if (diag(i) > 0) {
      scale(i) = 1.0 / std::sqrt(diag(i));
      any = true;
    }
  }
  if (!any) throw Error(ErrorCode::SingularSystem, "every basis field vanishes");
  Eigen::MatrixXd B = scale.asDiagonal() * system.gram * scale.asDiagonal();
  const Eigen::VectorXd b = scale.cwiseProduct(system.rhs);

  // Each coupled block gets its own ridge, so one degenerate subband does not
  // regularize the others.
  auto find = [&](Eigen::Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)];
    return i;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (scale(i) > 0 && scale(j) > 0 && std::abs(B(i, j)) > kCouplingFloor) {
        parent[static_cast<std::size_t>(find(i))] = find(j);
      }
    }
  }
  WeightSolution sol;
  sol.a = Eigen::VectorXd::Zero(n);
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  for (Eigen::Index root = 0; root < n; ++root) {
    if (done[static_cast<std::size_t>(root)] || scale(root) == 0 || find(root) != root) continue;
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (scale(i) > 0 && find(i) == root) idx.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd Bk(k, k);
    Eigen::VectorXd bk(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      bk(i) = b(idx[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < k; ++j) Bk(i, j) = B(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    BlockSolution blk;
    if (!solve_block(Bk, bk, ridge, blk)) {
      throw Error(ErrorCode::SingularSystem, "normal equations stay singular after regularization");
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto g = idx[static_cast<std::size_t>(i)];
      sol.a(g) = scale(g) * blk.y(i);
      done[static_cast<std::size_t>(g)] = true;
    }
    sol.ridge = std::max(sol.ridge, blk.ridge);
    sol.condition = std::max(sol.condition, blk.condition);
  }
  return sol;
}

namespace {

LetFit prepare(const SpatialField& r, const FrameTransform& frame, const DegradationModel& model, LetSpec spec) {
  require_same_shape(r.shape(), frame.shape, "fit: observation and frame differ");
  LetFit fit;
  fit.coeffs = analyze(r, frame, model);
  fit.gamma_bars = gamma_bar(frame, model);
  fit.sigmas = subband_noise_std(frame, model);
  fit.spec = std::move(spec);
  return fit;
}

void finish(LetFit& fit, const SpatialField& r, const SpatialField& pilot, const FrameTransform& frame,
            const DegradationModel& model, const FitOptions& options) {
  fit.theta = apply_theta(fit.coeffs, fit.spec, fit.sigmas);
  fit.report = sure_estimate(fit.estimate, pilot, fit.theta.derivative, fit.gamma_bars, model);
  if (options.variance) {
    const CrossCorrelation cross(frame, model, options.cross_radius);
    fit.report.variance_hat = sure_variance_estimate(divide_by_response(fit.estimate, model),
                                                     pilot_inverse(r, model, true), fit.theta.derivative, cross, model);
  }
}

}  // namespace

LetFit optimize_let(const SpatialField& r, const FrameTransform& frame, const DegradationModel& model, LetSpec spec,
                    const FitOptions& options) {
  LetFit fit = prepare(r, frame, model, std::move(spec));
  const SpatialField pilot = pilot_inverse(r, model);
  const auto betas = beta_fields(fit.coeffs, frame, model, fit.spec, fit.sigmas);
  const auto fps = fprime_sums(fit.coeffs, fit.spec, fit.sigmas, fit.gamma_bars);
  fit.system = assemble(betas, pilot, fps, model.gamma);
  attach_constant(fit.system, pilot, model);
  fit.solution = solve(fit.system, options.ridge);
  const std::vector<double> a(fit.solution.a.data(), fit.solution.a.data() + fit.solution.a.size());
  fit.spec.set_flat_weights(a);
  fit.estimate = SpatialField(r.shape(), 0.0);
  for (std::size_t k = 0; k < betas.size(); ++k) {
    for (std::size_t x = 0; x < r.size(); ++x) fit.estimate[x] += a[k] * betas[k][x];
  }
  finish(fit, r, pilot, frame, model, options);
  return fit;
}

LetFit evaluate_let(const SpatialField& r, const FrameTransform& frame, const DegradationModel& model, LetSpec spec,
                    const FitOptions& options) {
  LetFit fit = prepare(r, frame, model, std::move(spec));
  const SpatialField pilot = pilot_inverse(r, model);
  const ThetaResult th = apply_theta(fit.coeffs, fit.spec, fit.sigmas);
  fit.estimate = synthesize(th.value, frame, model);
  finish(fit, r, pilot, frame, model, options);
  return fit;
}

Eigen::VectorXd solve_subband(const FrameCoefficients& coeffs, const FrameCoefficients& pilot_coeffs,
                              const LetSpec& spec, std::span<const double> sigmas,
                              std::span<const double> gamma_bars, double gamma, std::size_t m) {
  const auto& fs = spec.functions.at(m);
  const auto& band = coeffs.bands.at(m);
  const auto& pilot = pilot_coeffs.bands.at(m);
  if (pilot.size() != band.size()) throw Error(ErrorCode::LengthMismatch, "pilot coefficients");
  const auto n = static_cast<Eigen::Index>(fs.size());
  Eigen::MatrixXd F(static_cast<Eigen::Index>(band.size()), n);
  Eigen::VectorXd slope = Eigen::VectorXd::Zero(n);
  for (std::size_t l = 0; l < band.size(); ++l) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto v = evaluate(fs[static_cast<std::size_t>(i)], band[l], sigmas[m]);
      F(static_cast<Eigen::Index>(l), i) = v.value;
      slope(i) += v.derivative;
    }
  }
  const Eigen::Map<const Eigen::VectorXd> p(pilot.data(), static_cast<Eigen::Index>(pilot.size()));
  NormalSystem sys;
  sys.gram = F.transpose() * F;
  sys.rhs = F.transpose() * p - gamma * gamma_bars[m] * slope;
  sys.grid_size = band.size();
  return solve(sys).a;
}

}  // namespace surelet
