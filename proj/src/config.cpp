#include "surelet/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace surelet {

Estimator parse_estimator(const std::string& name) {
  if (name == "blu" || name == "sure-let") return Estimator::Blu;
  if (name == "tanh") return Estimator::Tanh;
  if (name == "identity") return Estimator::Identity;
  if (name == "zero") return Estimator::Zero;
  if (name == "wiener") return Estimator::Wiener;
  throw Error(ErrorCode::Config, "unknown estimator '" + name + "'");
}

std::string estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Blu: return "blu";
    case Estimator::Tanh: return "tanh";
    case Estimator::Identity: return "identity";
    case Estimator::Zero: return "zero";
    case Estimator::Wiener: return "wiener";
  }
  return "?";
}

std::string ExperimentConfig::method_id() const {
  if (estimator == Estimator::Wiener) return "wiener";
  return "surelet-" + estimator_name(estimator) + "-" + frame_kind_name(frame.kind) +
         (noise_var == NoiseVarianceMode::Mad ? "-mad" : "");
}

void ExperimentConfig::validate() const {
  if (degrade && bsnr_db && gamma) throw Error(ErrorCode::Config, "set either bsnr or gamma, not both");
  if (degrade && !bsnr_db && !gamma) throw Error(ErrorCode::Config, "degrading needs bsnr or gamma");
  if (!degrade && noise_var == NoiseVarianceMode::Known && !gamma) {
    throw Error(ErrorCode::Config, "an observed input needs gamma or noise-var=mad");
  }
  if (gamma && *gamma < 0) throw Error(ErrorCode::Config, "gamma must be nonnegative");
  if (lambda && *lambda < 0) throw Error(ErrorCode::Config, "lambda must be nonnegative");
  if (chi && *chi < 0) throw Error(ErrorCode::Config, "chi must be nonnegative");
  if (!(omega > 0) || !(xi > 0) || !(omega_p > 0)) throw Error(ErrorCode::Config, "LET parameters must be positive");
  if (seeds == 0) throw Error(ErrorCode::Config, "seeds must be positive");
  parse_blur(blur);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Config, key + ": not a number: '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != static_cast<double>(static_cast<long>(d))) throw Error(ErrorCode::Config, key + ": not an integer");
  return static_cast<long>(d);
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const long n = to_long(key, v);
  if (n < 0) throw Error(ErrorCode::Config, key + ": must be nonnegative");
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::Config, key + ": not a boolean: '" + v + "'");
}

// "auto"/"heuristic"/"none" select the automatic mode.
std::optional<double> to_optional(const std::string& key, const std::string& v) {
  if (v == "auto" || v == "heuristic" || v == "none" || v.empty()) return std::nullopt;
  return to_double(key, v);
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string v = trim(value_in);
  if (key == "input") {
    cfg.input = v;
  } else if (key == "image_id") {
    cfg.image_id = v;
  } else if (key == "blur") {
    parse_blur(v);
    cfg.blur = v;
  } else if (key == "bsnr") {
    cfg.bsnr_db = to_optional(key, v);
    if (cfg.bsnr_db) cfg.gamma.reset();
  } else if (key == "gamma") {
    cfg.gamma = to_optional(key, v);
    if (cfg.gamma && cfg.degrade) cfg.bsnr_db.reset();
  } else if (key == "degrade") {
    cfg.degrade = to_bool(key, v);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_count(key, v));
  } else if (key == "crop") {
    cfg.crop = to_count(key, v);
  } else if (key == "frame") {
    cfg.frame.kind = parse_frame_kind(v);
  } else if (key == "levels") {
    cfg.frame.levels = to_count(key, v);
  } else if (key == "filter") {
    cfg.frame.filter = v;
  } else if (key == "estimator") {
    cfg.estimator = parse_estimator(v);
  } else if (key == "omega") {
    cfg.omega = to_double(key, v);
  } else if (key == "xi") {
    cfg.xi = to_double(key, v);
  } else if (key == "omega_p") {
    cfg.omega_p = to_double(key, v);
  } else if (key == "lambda") {
    cfg.lambda = to_optional(key, v);
  } else if (key == "chi") {
    cfg.chi = to_optional(key, v);
  } else if (key == "chi_fallback") {
    cfg.chi_fallback = to_optional(key, v);
  } else if (key == "noise_var" || key == "noise-var") {
    if (v == "known") {
      cfg.noise_var = NoiseVarianceMode::Known;
    } else if (v == "mad") {
      cfg.noise_var = NoiseVarianceMode::Mad;
    } else {
      throw Error(ErrorCode::Config, "noise_var must be known or mad");
    }
  } else if (key == "variance") {
    cfg.variance = to_bool(key, v);
  } else if (key == "cross_radius") {
    cfg.cross_radius = to_long(key, v);
  } else if (key == "out") {
    cfg.out = v;
  } else if (key == "csv") {
    cfg.csv = v;
  } else if (key == "report") {
    cfg.report = v;
  } else if (key == "seeds") {
    cfg.seeds = to_count(key, v);
  } else {
    throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Config, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

std::optional<std::filesystem::path> default_config_path() {
  const char* env = std::getenv(kConfigEnvVar);
  if (env == nullptr || *env == '\0') return std::nullopt;
  return std::filesystem::path(env);
}

std::string describe_config_keys() {
  return "input = <path to PGM/PNG>\n"
         "image_id = <input file stem>\n"
         "blur = uniform:5            # dirac | uniform:N[xM] | gaussian:S | cosine:F\n"
         "bsnr = 30                   # dB; mutually exclusive with gamma\n"
         "gamma = auto                # explicit noise variance\n"
         "degrade = true              # false: input is already the observation\n"
         "seed = 0\n"
         "crop = 0                    # centered square crop, 0 = full image\n"
         "frame = undecimated         # undecimated | orthonormal | shifted | canonical\n"
         "levels = 4\n"
         "filter = sym8               # haar | db2 | db4 | sym4 | sym8\n"
         "estimator = blu             # blu | tanh | identity | zero | wiener\n"
         "omega = 3\n"
         "xi = 3.5\n"
         "omega_p = 2.25\n"
         "lambda = heuristic          # or a fixed value\n"
         "chi = auto                  # or a fixed value\n"
         "chi_fallback = none         # chi used when the automatic search fails\n"
         "noise_var = known           # known | mad\n"
         "variance = true             # report the risk-variance estimate\n"
         "cross_radius = -1           # truncation of the variance cross terms, -1 = exact\n"
         "out = <restored image path>\n"
         "csv = <score CSV path>\n"
         "report = <JSON-lines risk report path>\n"
         "seeds = 10                  # noise realizations per table cell\n";
}

}  // namespace surelet
