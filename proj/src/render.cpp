#include "staghunt/render.hpp"

#include <vector>

namespace staghunt {

std::string render_frame(const EnvState& state, const EnvConfig& config) {
  std::vector<std::string> grid(config.height, std::string(config.width, '.'));
  std::vector<std::vector<int>> count(config.height, std::vector<int>(config.width, 0));

  auto place = [&](GridPos p, char glyph) {
    count[p.y][p.x] += 1;
    grid[p.y][p.x] = count[p.y][p.x] > 1 ? '*' : glyph;
  };
  place(state.plants[0], 'p');
  place(state.plants[1], 'p');
  place(state.stag, 'S');
  place(state.agents[0], state.frozen[0] ? 'a' : 'A');
  place(state.agents[1], state.frozen[1] ? 'b' : 'B');

  std::string out;
  out.reserve((config.width + 1) * config.height);
  for (const std::string& row : grid) {
    out += row;
    out += '\n';
  }
  return out;
}

std::string render_legend() {
  return "A/B agents (lowercase = frozen)  S stag  p plant  * overlap  . empty\n";
}

}  // namespace staghunt
