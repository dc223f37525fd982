#include "fhn/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "fhn/errors.hpp"

namespace fhn {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double x = 0.0;
  if (!parse_double(value, x)) throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  return x;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  // Accepts plain integers and integral scientific notation such as 1e6.
  std::uint64_t n = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
  if (ec == std::errc() && ptr == value.data() + value.size()) return n;
  const double x = to_double(key, value);
  if (!(x >= 0.0) || x != std::floor(x) || x > 1.8e19) {
    throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + value + "'");
  }
  return static_cast<std::uint64_t>(x);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("'" + key + "' expects true/false, got '" + value + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& field : split_fields(value)) {
    if (!field.empty()) out.push_back(to_double(key, field));
  }
  return out;
}

PriorSpec default_prior(PriorFamily family) {
  switch (family) {
    case PriorFamily::uniform_conditional:
      return PriorSpec::simulation_study();
    case PriorFamily::lognormal:
      return PriorSpec::lognormal_default();
    case PriorFamily::exponential:
      return PriorSpec::exponential_default();
  }
  return PriorSpec::simulation_study();
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void apply_setting(EngineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n_particles") {
    cfg.n_particles = to_unsigned(key, value);
  } else if (key == "percentile") {
    cfg.percentile = to_double(key, value);
  } else if (key == "budget") {
    cfg.budget = to_unsigned(key, value);
  } else if (key == "sim_step") {
    cfg.sim_step = to_double(key, value);
  } else if (key == "sim_horizon") {
    cfg.sim_horizon = to_double(key, value);
  } else if (key == "obs_step") {
    cfg.obs_step = to_double(key, value);
  } else if (key == "summary") {
    cfg.summary = parse_summary_kind(value);
  } else if (key == "distance") {
    cfg.distance = parse_distance_kind(value);
  } else if (key == "kernel") {
    cfg.kernel = parse_kernel_kind(value);
  } else if (key == "prior_family") {
    const PriorFamily family = parse_prior_family(value);
    if (family != cfg.prior.family()) cfg.prior = default_prior(family);
  } else if (key == "prior_params") {
    cfg.prior = PriorSpec(cfg.prior.family(), to_list(key, value));
  } else if (key == "x0_v") {
    cfg.x0.v = to_double(key, value);
  } else if (key == "x0_u") {
    cfg.x0.u = to_double(key, value);
  } else if (key == "seed") {
    cfg.seed = to_unsigned(key, value);
  } else if (key == "pilot_size") {
    cfg.pilot_size = to_unsigned(key, value);
  } else if (key == "center") {
    cfg.center = to_bool(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

EngineConfig parse_config(const std::string& text, EngineConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  // prior_params must be read against the final prior_family, whatever the line order.
  std::optional<std::string> params;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key == "prior_params") {
      params = value;
    } else {
      apply_setting(base, key, value);
    }
  }
  if (params) apply_setting(base, "prior_params", *params);
  return base;
}

EngineConfig load_config(const std::filesystem::path& path, EngineConfig base) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string format_config(const EngineConfig& cfg) {
  std::ostringstream out;
  out << "n_particles = " << cfg.n_particles << "\n";
  out << "percentile = " << format_double(cfg.percentile) << "\n";
  out << "budget = " << cfg.budget << "\n";
  out << "sim_step = " << format_double(cfg.sim_step) << "\n";
  out << "sim_horizon = " << format_double(cfg.sim_horizon) << "\n";
  out << "obs_step = " << format_double(cfg.obs_step) << "\n";
  out << "summary = " << to_string(cfg.summary) << "\n";
  out << "distance = " << to_string(cfg.distance) << "\n";
  out << "kernel = " << to_string(cfg.kernel) << "\n";
  out << "prior_family = " << to_string(cfg.prior.family()) << "\n";
  out << "prior_params = ";
  for (std::size_t i = 0; i < cfg.prior.hyper().size(); ++i) {
    out << (i ? "," : "") << format_double(cfg.prior.hyper()[i]);
  }
  out << "\n";
  out << "x0_v = " << format_double(cfg.x0.v) << "\n";
  out << "x0_u = " << format_double(cfg.x0.u) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "pilot_size = " << cfg.pilot_size << "\n";
  out << "center = " << (cfg.center ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace fhn
