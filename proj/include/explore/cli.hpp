#pragma once

#include <explore/explore_runtime.hpp>

#include <string>
#include <vector>

namespace explore {

/// Applies flat `key=value` lines (blank lines and `#` comments ignored) to the
/// run and world configs. Unknown keys or bad values throw ConfigError.
void apply_config_text(RunConfig& run, WorldConfig& world, const std::string& text);

/// Top-down ground-truth slice at the flight height with the trajectory rows
/// ("t x y z yaw") overlaid, as a binary PPM image.
std::string render_plot(const World& world, const std::string& trajectory, int pixels_per_voxel = 4);

/// Entry point shared by the executable and the tests. Returns the exit code.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace explore
