#include "dualad/frame.hpp"

#include <algorithm>

namespace dualad {

WorldFrame frame_from_scenario(const Scenario& scenario, std::size_t step) {
  WorldFrame frame;
  frame.step = step;
  frame.time = static_cast<double>(step) * kGridStep;
  frame.ego.pose = {scenario.ego_init.x, scenario.ego_init.y, scenario.ego_init.theta};
  frame.ego.speed = scenario.ego_init.speed;
  frame.speed_limit = scenario.speed_limit;
  frame.red_stop_lines = scenario.red_stop_lines(frame.time);
  frame.scenario = &scenario;
  for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
    const auto& rec = scenario.agents[i];
    const auto& st = rec.states[std::min(step, rec.states.size() - 1)];
    frame.agents.push_back({rec.id, rec.kind, rec.width, rec.length, {st.x, st.y, st.theta}, st.speed, i});
  }
  return frame;
}

}  // namespace dualad
