// Integrates SICRD at its true parameters and prints every 100th grid point.
#include <cstdio>

#include "obspinn/scenarios/scenario.hpp"

int main() {
  const auto s = obspinn::make_scenario("sicrd");
  const auto traj = obspinn::simulate_truth(s);
  std::printf("%6s", "t");
  for (const auto& n : s.model.state_names) std::printf(" %10s", n.c_str());
  std::printf("\n");
  for (std::size_t k = 0; k < traj.size(); k += 100) {
    std::printf("%6.1f", traj.times[k]);
    for (double v : traj.states[k]) std::printf(" %10.6f", v);
    std::printf("\n");
  }
}
