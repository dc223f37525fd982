#pragma once

#include <filesystem>
#include <string>

#include "fhn/engine.hpp"

namespace fhn {

/// Assigns one configuration key. Recognized keys: n_particles, percentile,
/// budget, sim_step, sim_horizon, obs_step, summary, distance, kernel,
/// prior_family, prior_params, x0_v, x0_u, seed, pilot_size, center.
/// `prior_params` is a comma-separated list in the layout of PriorSpec.
void apply_setting(EngineConfig& cfg, const std::string& key, const std::string& value);

/// Parses "key = value" lines; '#' starts a comment.
EngineConfig parse_config(const std::string& text, EngineConfig base = {});
EngineConfig load_config(const std::filesystem::path& path, EngineConfig base = {});

/// Inverse of parse_config for the recognized keys; doubles at full precision.
std::string format_config(const EngineConfig& cfg);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

}  // namespace fhn
