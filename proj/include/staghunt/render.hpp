#pragma once

#include <string>

#include "staghunt/env.hpp"

namespace staghunt {

/// One ASCII frame of the grid. Glyphs: A/B agents (lowercase when frozen),
/// S stag, p plant, * any cell holding more than one entity, . empty.
std::string render_frame(const EnvState& state, const EnvConfig& config);

std::string render_legend();

}  // namespace staghunt
