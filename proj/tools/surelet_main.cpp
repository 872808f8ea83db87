// Command-line front end: degrade, restore, evaluate, table, verify-stein.

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

#include "surelet/image_io.hpp"
#include "surelet/pipeline.hpp"
#include "surelet/stein.hpp"

using namespace surelet;

namespace {

// Flag values collected as text and applied through the config parser so
// that files and flags share one validation path.
struct Overrides {
  std::map<std::string, std::string> values;

  void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }
};

ExperimentConfig build_config(const std::string& config_path, const Overrides& ov) {
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = load_config(config_path);
  } else if (auto env = default_config_path()) {
    cfg = load_config(*env);
  }
  // Degradation mode first: it decides how gamma and bsnr interact.
  if (auto it = ov.values.find("degrade"); it != ov.values.end()) apply_setting(cfg, it->first, it->second);
  for (const auto& [k, v] : ov.values) {
    if (k != "degrade") apply_setting(cfg, k, v);
  }
  return cfg;
}

void bind_experiment_flags(CLI::App* app, Overrides& ov) {
  ov.bind(app, "--in", "input", "input image (PGM or PNG)");
  ov.bind(app, "--blur", "blur", "dirac | uniform:N[xM] | gaussian:S | cosine:F");
  ov.bind(app, "--bsnr", "bsnr", "target blurred SNR in dB");
  ov.bind(app, "--gamma", "gamma", "noise variance");
  ov.bind(app, "--seed", "seed", "noise seed");
  ov.bind(app, "--crop", "crop", "centered square crop (0 = full image)");
  ov.bind(app, "--degrade", "degrade", "false when the input already is the observation");
}

// The table command takes a repeatable --estimator of its own.
void bind_method_flags(CLI::App* app, Overrides& ov, bool with_estimator = true) {
  ov.bind(app, "--frame", "frame", "undecimated | orthonormal | shifted | canonical");
  ov.bind(app, "--levels", "levels", "wavelet decomposition levels");
  ov.bind(app, "--filter", "filter", "haar | db2 | db4 | sym4 | sym8");
  if (with_estimator) ov.bind(app, "--estimator", "estimator", "blu | tanh | identity | zero | wiener");
  ov.bind(app, "--chi", "chi", "observable-set threshold or 'auto'");
  ov.bind(app, "--chi-fallback", "chi_fallback", "threshold used when the automatic search fails");
  ov.bind(app, "--lambda", "lambda", "prefilter regularization or 'heuristic'");
  ov.bind(app, "--noise-var", "noise_var", "known | mad");
  ov.bind(app, "--variance", "variance", "compute the risk-variance estimate (true/false)");
  ov.bind(app, "--cross-radius", "cross_radius", "truncation radius of the variance cross terms (-1 = exact)");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed << v;
  return os.str();
}

int run_degrade(const ExperimentConfig& cfg) {
  if (cfg.out.empty()) throw Error(ErrorCode::Config, "degrade needs --out");
  const SpatialField s = center_crop(read_image(cfg.input), cfg.crop);
  const SpectrumField H = make_blur_response(parse_blur(cfg.blur), s.shape());
  const double gamma = cfg.bsnr_db ? gamma_for_bsnr(s, H, *cfg.bsnr_db) : cfg.gamma.value_or(0.0);
  const SpatialField r = degrade(s, H, gamma, cfg.seed);
  write_image(cfg.out, r);
  std::cout << "gamma " << std::setprecision(10) << gamma << "\n";
  std::cout << "snr_input_db " << fmt(snr_db(s, r)) << "\n";
  return 0;
}

int run_restore_cmd(const ExperimentConfig& cfg, bool timing) {
  const RestoreResult res = run_restore(cfg);
  if (!cfg.out.empty()) write_image(cfg.out, res.estimate);
  if (!cfg.csv.empty()) {
    std::ofstream out(cfg.csv);
    if (!out) throw Error(ErrorCode::Io, "cannot create " + cfg.csv.string());
    write_score_csv(out, res.row, timing);
  }
  if (!cfg.report.empty()) {
    std::ofstream out(cfg.report, std::ios::app);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + cfg.report.string());
    out << report_json(res) << "\n";
  }
  std::cout << report_json(res) << "\n";
  return 0;
}

int run_evaluate(const std::string& reference, const std::string& estimate) {
  const SpatialField s = read_image(reference);
  const SpatialField e = read_image(estimate);
  const double v = snr_db(s, e);
  std::cout << "snr_db " << (std::isinf(v) ? std::string("inf") : fmt(v)) << "\n";
  return 0;
}

int run_table_cmd(const std::vector<std::string>& configs, const ExperimentConfig& base,
                  const std::vector<std::string>& blurs, const std::vector<std::string>& bsnrs,
                  const std::vector<std::string>& estimators, std::size_t jobs, bool timing) {
  std::vector<ExperimentConfig> cells;
  for (const auto& path : configs) cells.push_back(load_config(path, base));
  if (configs.empty()) {
    const std::vector<std::string> b = blurs.empty() ? std::vector<std::string>{base.blur} : blurs;
    const std::vector<std::string> n =
        bsnrs.empty() ? std::vector<std::string>{base.bsnr_db ? std::to_string(*base.bsnr_db) : "auto"} : bsnrs;
    const std::vector<std::string> e =
        estimators.empty() ? std::vector<std::string>{estimator_name(base.estimator)} : estimators;
    for (const auto& blur : b) {
      for (const auto& bsnr : n) {
        for (const auto& est : e) {
          ExperimentConfig c = base;
          apply_setting(c, "blur", blur);
          apply_setting(c, "bsnr", bsnr);
          apply_setting(c, "estimator", est);
          cells.push_back(c);
        }
      }
    }
  }
  const auto table = run_table(cells, jobs);
  if (!base.csv.empty()) {
    std::ofstream out(base.csv);
    if (!out) throw Error(ErrorCode::Io, "cannot create " + base.csv.string());
    write_csv(out, table, timing);
  }
  write_csv(std::cout, table, timing);
  for (const auto& c : table) {
    if (c.failures > 0) return 1;
  }
  return 0;
}

int run_verify_stein(std::size_t samples, std::uint64_t seed, std::size_t quads, std::size_t tolerated) {
  const auto fns = standard_test_functions();
  const auto covs = random_quads(quads, seed);
  const std::array<double, 2> upsilon{0.2, -0.1};
  std::size_t failures = 0, checks = 0;
  std::cout << "identity,function,quad,lhs,rhs,std_error,pass\n";
  for (auto id : all_identities()) {
    for (std::size_t f = 0; f < fns.size(); ++f) {
      for (std::size_t q = 0; q < covs.size(); ++q) {
        const auto rep = check_identity(id, covs[q], upsilon, fns[f], fns[(f + 1) % fns.size()], samples,
                                        seed + 1000 * (checks + 1));
        ++checks;
        if (!rep.pass) ++failures;
        std::cout << identity_name(id) << ',' << fns[f].name << ',' << q << ',' << std::setprecision(8) << rep.lhs
                  << ',' << rep.rhs << ',' << rep.std_error << ',' << (rep.pass ? "pass" : "FAIL") << "\n";
      }
    }
  }
  std::cout << "# " << checks - failures << "/" << checks << " checks within 3 standard errors\n";
  return failures <= tolerated ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SURE-LET deconvolution toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, std::string("key=value config file (default: $") + kConfigEnvVar + ")");
  bool timing = false;
  app.add_flag("--timing", timing, "include the runtime column in CSV output");

  Overrides ov;
  auto* degrade_cmd = app.add_subcommand("degrade", "blur and add noise to an image");
  bind_experiment_flags(degrade_cmd, ov);
  ov.bind(degrade_cmd, "--out", "out", "observation image path");

  auto* restore_cmd = app.add_subcommand("restore", "degrade (optionally) and restore an image");
  bind_experiment_flags(restore_cmd, ov);
  bind_method_flags(restore_cmd, ov);
  ov.bind(restore_cmd, "--out", "out", "restored image path");
  ov.bind(restore_cmd, "--csv", "csv", "score CSV path");
  ov.bind(restore_cmd, "--report", "report", "JSON-lines report path (appended)");

  std::string ref_path, est_path;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "SNR of an estimate against a reference");
  evaluate_cmd->add_option("--ref", ref_path, "reference image")->required();
  evaluate_cmd->add_option("--in", est_path, "estimate image")->required();

  std::vector<std::string> table_configs, table_blurs, table_bsnrs, table_estimators;
  std::size_t jobs = 1;
  auto* table_cmd = app.add_subcommand("table", "median SNR over noise seeds for a grid of cells");
  ov.bind(table_cmd, "--in", "input", "input image");
  ov.bind(table_cmd, "--seed", "seed", "first noise seed");
  ov.bind(table_cmd, "--seeds", "seeds", "noise realizations per cell");
  ov.bind(table_cmd, "--crop", "crop", "centered square crop (0 = full image)");
  ov.bind(table_cmd, "--gamma", "gamma", "noise variance instead of a BSNR");
  bind_method_flags(table_cmd, ov, false);
  ov.bind(table_cmd, "--csv", "csv", "CSV output path");
  table_cmd->add_option("--cell", table_configs, "config file describing one cell (repeatable)");
  table_cmd->add_option("--blur", table_blurs, "blur (repeatable)");
  table_cmd->add_option("--bsnr", table_bsnrs, "BSNR in dB (repeatable)");
  table_cmd->add_option("--estimator", table_estimators, "estimator (repeatable)");
  table_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  std::size_t samples = 1000000, quads = 5, tolerated = 2;
  std::uint64_t stein_seed = 1;
  auto* stein_cmd = app.add_subcommand("verify-stein", "Monte-Carlo check of the Stein identities");
  stein_cmd->add_option("--samples", samples, "samples per check");
  stein_cmd->add_option("--seed", stein_seed, "base seed");
  stein_cmd->add_option("--quads", quads, "random covariances");
  stein_cmd->add_option("--tolerate", tolerated, "failures tolerated before a nonzero exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ErrorCode::InvalidArgument);
  }

  try {
    if (*degrade_cmd) return run_degrade(build_config(config_path, ov));
    if (*restore_cmd) return run_restore_cmd(build_config(config_path, ov), timing);
    if (*evaluate_cmd) return run_evaluate(ref_path, est_path);
    if (*table_cmd) {
      return run_table_cmd(table_configs, build_config(config_path, ov), table_blurs, table_bsnrs, table_estimators,
                           jobs, timing);
    }
    if (*stein_cmd) return run_verify_stein(samples, stein_seed, quads, tolerated);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
