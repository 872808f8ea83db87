#include "surelet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "surelet/image_io.hpp"

namespace surelet {

double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

double mad_noise_estimate(const SpatialField& r) {
  const GridShape& shape = r.shape();
  bool even = true;
  for (std::size_t a = 0; a < shape.rank(); ++a) {
    if (shape.dim(a) < 4) throw Error(ErrorCode::InvalidArgument, "MAD estimate needs at least 4 samples per axis");
    even = even && shape.dim(a) % 2 == 0;
  }
  // Odd grids use the undecimated transform; its level-1 atoms are the
  // orthonormal ones scaled by 2^{-d/2}.
  FrameFlavor flavor{even ? FrameKind::OrthonormalWavelet : FrameKind::Undecimated, 1, "sym8", {}};
  const FrameTransform frame = build_generators(flavor, shape);
  const double rescale = even ? 1.0 : std::pow(2.0, 0.5 * static_cast<double>(shape.rank()));
  const std::string finest = "j1." + std::string(shape.rank(), 'H');
  const auto coeffs = analyze_raw(r, frame);
  double peak = 0.0;
  for (double v : r.values()) peak = std::max(peak, std::abs(v));
  // FFT round-off on smooth inputs is not noise.
  const double floor = 1e-12 * peak;
  for (std::size_t m = 0; m < frame.subbands.size(); ++m) {
    if (frame.subbands[m].name != finest) continue;
    std::vector<double> mags;
    mags.reserve(coeffs.bands[m].size());
    for (double d : coeffs.bands[m]) mags.push_back(std::abs(d) <= floor ? 0.0 : std::abs(d) * rescale);
    const double sd = median(std::move(mags)) / 0.6745;
    return sd * sd;
  }
  throw Error(ErrorCode::InvalidArgument, "finest diagonal subband not found");
}

SpatialField wiener_baseline(const SpatialField& r, const SpectrumField& H, double gamma, double signal_power) {
  require_same_shape(r.shape(), H.shape(), "wiener_baseline: shapes differ");
  if (gamma < 0) throw Error(ErrorCode::InvalidArgument, "noise variance must be nonnegative");
  const double D = static_cast<double>(r.size());
  const double reg = gamma == 0.0 ? 0.0 : D * gamma / signal_power;
  SpectrumField S = dft_forward(r);
  for (std::size_t p = 0; p < S.size(); ++p) {
    const double den = std::norm(H[p]) + reg;
    S[p] = den > 0 ? std::conj(H[p]) * S[p] / den : Complex(0.0, 0.0);
  }
  return dft_inverse(S);
}

SpatialField wiener_baseline(const SpatialField& r, const SpectrumField& H, double gamma) {
  const double D = static_cast<double>(r.size());
  double sum = 0.0;
  for (double v : r.values()) sum += v;
  const double mean = sum / D;
  const double var = mean_square(r) - mean * mean - gamma;
  return wiener_baseline(r, H, gamma, std::max(var, 1e-12) * D);
}

double snr_db(const SpatialField& s, const SpatialField& s_hat, bool strict) {
  require_same_shape(s.shape(), s_hat.shape(), "snr_db: shapes differ");
  const double power = mean_square(s);
  if (!(power > 0)) throw Error(ErrorCode::InvalidArgument, "SNR of an all-zero reference is undefined");
  const double err = mean_square_difference(s, s_hat);
  if (err <= kIdenticalRatio * power) {
    if (strict) throw Error(ErrorCode::IdenticalFields, "estimate equals the reference");
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(power / err);
}

namespace {

LetSpec let_spec_for(const ExperimentConfig& cfg, std::size_t subbands) {
  switch (cfg.estimator) {
    case Estimator::Blu:
      return LetSpec::uniform(subbands, {let::Identity{}, let::BluExp{cfg.omega}});
    case Estimator::Tanh:
      return LetSpec::uniform(subbands, {let::Identity{}, let::TanhGate{cfg.xi, cfg.omega_p}});
    case Estimator::Identity:
    case Estimator::Zero: {
      LetSpec s = LetSpec::uniform(subbands, {let::Identity{}});
      s.weights.assign(subbands, {cfg.estimator == Estimator::Identity ? 1.0 : 0.0});
      return s;
    }
    case Estimator::Wiener:
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "the Wiener baseline has no LET spec");
}

}  // namespace

RestoreResult run_restore(const ExperimentConfig& cfg, const SpatialField& image) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  RestoreResult res;
  const GridShape shape = image.shape();
  const SpectrumField H = make_blur_response(parse_blur(cfg.blur), shape);

  double gamma_true = cfg.gamma.value_or(0.0);
  if (cfg.degrade) {
    res.truth = image;
    if (cfg.bsnr_db) gamma_true = gamma_for_bsnr(image, H, *cfg.bsnr_db);
    res.observed = degrade(image, H, gamma_true, cfg.seed);
  } else {
    res.observed = image;
  }
  const SpatialField& r = res.observed;
  const double gamma = cfg.noise_var == NoiseVarianceMode::Mad ? mad_noise_estimate(r) : gamma_true;

  ScoreRow& row = res.row;
  row.image = cfg.image_id.empty() ? cfg.input.stem().string() : cfg.image_id;
  row.blur = cfg.blur;
  row.bsnr_db = cfg.degrade && gamma_true > 0 ? bsnr_db(image, H, gamma_true) : std::numeric_limits<double>::quiet_NaN();
  if (cfg.degrade && cfg.bsnr_db) row.bsnr_db = *cfg.bsnr_db;
  row.method = cfg.method_id();
  row.seed = cfg.seed;
  row.gamma = gamma;

  if (cfg.estimator == Estimator::Wiener) {
    res.estimate = wiener_baseline(r, H, gamma);
  } else {
    double lambda = 0.0;
    if (cfg.lambda) {
      lambda = *cfg.lambda;
    } else {
      const LambdaChoice lc = lambda_heuristic(r, gamma);
      lambda = lc.lambda;
      res.lambda_clamped = lc.clamped;
      if (lc.clamped) std::cerr << "warning: signal variance estimate is not positive; lambda clamped to 0\n";
    }
    row.lambda = lambda;

    DegradationModel model;
    if (cfg.chi) {
      model = make_model(H, gamma, *cfg.chi);
    } else {
      try {
        model = select_chi(r, H, gamma, lambda).model;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoAdmissibleChi || !cfg.chi_fallback) throw;
        model = make_model(H, gamma, *cfg.chi_fallback);
        res.chi_fell_back = true;
      }
    }
    const FrameTransform frame = build_frame(cfg.frame, shape, model, lambda);
    LetSpec spec = let_spec_for(cfg, frame.subband_count());
    const FitOptions opts{cfg.variance, cfg.cross_radius, 0.0};
    LetFit fit = spec.has_weights() ? evaluate_let(r, frame, model, std::move(spec), opts)
                                    : optimize_let(r, frame, model, std::move(spec), opts);
    res.estimate = std::move(fit.estimate);
    res.report = fit.report;
    res.weights = fit.spec.flat_weights();
    row.e_hat = res.report.e_hat;
    row.variance_hat = res.report.variance_hat;
    row.chi = res.report.chi;
  }

  if (cfg.degrade) {
    row.snr_db = snr_db(res.truth, res.estimate);
    row.snr_input_db = snr_db(res.truth, r);
  }
  row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

RestoreResult run_restore(const ExperimentConfig& cfg) {
  if (cfg.input.empty()) throw Error(ErrorCode::Config, "no input image configured");
  return run_restore(cfg, center_crop(read_image(cfg.input), cfg.crop));
}

namespace {

nlohmann::json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

std::string report_json(const RestoreResult& result) {
  const ScoreRow& row = result.row;
  const RiskReport& rep = result.report;
  nlohmann::json j;
  j["image"] = row.image;
  j["blur"] = row.blur;
  j["bsnr_db"] = number(row.bsnr_db);
  j["method"] = row.method;
  j["seed"] = row.seed;
  j["snr_db"] = number(row.snr_db);
  j["snr_input_db"] = number(row.snr_input_db);
  j["gamma"] = number(row.gamma);
  j["lambda"] = number(row.lambda);
  j["runtime_s"] = row.runtime_s;
  j["risk"] = {{"data_term", number(rep.data_term)}, {"delta_hat", number(rep.delta_hat)},
               {"e_hat", number(rep.e_hat)},         {"variance_hat", number(rep.variance_hat)},
               {"chi", number(rep.chi)},             {"card_Q", rep.card_Q}};
  j["weights"] = result.weights;
  j["lambda_clamped"] = result.lambda_clamped;
  j["chi_fell_back"] = result.chi_fell_back;
  return j.dump();
}

std::vector<TableCell> run_table(const std::vector<ExperimentConfig>& cells, std::size_t jobs) {
  struct Task {
    std::size_t cell;
    std::size_t k;
  };
  std::vector<Task> tasks;
  std::vector<SpatialField> images(cells.size());
  std::vector<std::string> load_errors(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    try {
      cells[c].validate();
      images[c] = center_crop(read_image(cells[c].input), cells[c].crop);
    } catch (const Error& e) {
      load_errors[c] = e.what();
      continue;
    }
    for (std::size_t k = 0; k < cells[c].seeds; ++k) tasks.push_back({c, k});
  }

  std::vector<std::vector<std::optional<ScoreRow>>> rows(cells.size());
  std::vector<std::vector<std::string>> errors(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) rows[c].resize(cells[c].seeds);

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();) {
      const auto [c, k] = tasks[t];
      ExperimentConfig cfg = cells[c];
      cfg.seed = cells[c].seed + k;
      try {
        ScoreRow row = run_restore(cfg, images[c]).row;
        std::lock_guard lock(mu);
        rows[c][k] = std::move(row);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        errors[c].push_back(e.what());
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<TableCell> out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const ExperimentConfig& cfg = cells[c];
    TableCell cell;
    cell.seeds = cfg.seeds;
    cell.median.image = cfg.image_id.empty() ? cfg.input.stem().string() : cfg.image_id;
    cell.median.blur = cfg.blur;
    cell.median.bsnr_db = cfg.bsnr_db.value_or(std::numeric_limits<double>::quiet_NaN());
    cell.median.method = cfg.method_id();
    cell.median.seed = cfg.seed;
    if (!load_errors[c].empty()) {
      cell.failures = cfg.seeds;
      cell.status = "error: " + load_errors[c];
      out.push_back(cell);
      continue;
    }
    std::vector<double> snr, snr_in, e_hat, var_hat, chi, gamma, lambda, runtime;
    for (const auto& r : rows[c]) {
      if (!r) continue;
      snr.push_back(r->snr_db);
      snr_in.push_back(r->snr_input_db);
      e_hat.push_back(r->e_hat);
      var_hat.push_back(r->variance_hat);
      chi.push_back(r->chi);
      gamma.push_back(r->gamma);
      lambda.push_back(r->lambda);
      runtime.push_back(r->runtime_s);
    }
    cell.failures = cfg.seeds - snr.size();
    cell.median.snr_db = median(snr);
    cell.median.snr_input_db = median(snr_in);
    cell.median.e_hat = median(e_hat);
    cell.median.variance_hat = median(var_hat);
    cell.median.chi = median(chi);
    cell.median.gamma = median(gamma);
    cell.median.lambda = median(lambda);
    cell.median.runtime_s = median(runtime);
    cell.status = cell.failures == 0 ? "ok" : (snr.empty() ? "failed" : "partial") +
                                                  std::string(": ") + errors[c].front();
    out.push_back(cell);
  }
  return out;
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string csv_text(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string csv_header(bool timing) {
  return std::string("image,blur,bsnr_db,method,seeds,failures,snr_db,snr_input_db,e_hat,variance_hat,chi,gamma,lambda") +
         (timing ? ",runtime_s" : "") + ",status";
}

void write_csv(std::ostream& out, const std::vector<TableCell>& cells, bool timing) {
  out << csv_header(timing) << "\n";
  for (const auto& c : cells) {
    const ScoreRow& r = c.median;
    out << csv_text(r.image) << ',' << csv_text(r.blur) << ',' << fmt(r.bsnr_db) << ',' << csv_text(r.method) << ','
        << c.seeds << ',' << c.failures << ',' << fmt(r.snr_db) << ',' << fmt(r.snr_input_db) << ',' << fmt(r.e_hat)
        << ',' << fmt(r.variance_hat) << ',' << fmt(r.chi) << ',' << fmt(r.gamma) << ',' << fmt(r.lambda);
    if (timing) out << ',' << fmt(r.runtime_s);
    out << ',' << csv_text(c.status) << "\n";
  }
}

void write_score_csv(std::ostream& out, const ScoreRow& row, bool timing) {
  TableCell cell{row, 1, 0, "ok"};
  write_csv(out, {cell}, timing);
}

}  // namespace surelet
