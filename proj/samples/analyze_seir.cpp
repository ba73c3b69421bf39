// Observability of the SEIR model when only I is measured.
#include <cstdio>

#include "obspinn/observability/reconstruction.hpp"
#include "obspinn/scenarios/scenario.hpp"

int main() {
  const auto s = obspinn::make_scenario("seir");
  obspinn::AnalysisOptions opt;
  opt.outputs = {s.analysis_output};
  const auto result = obspinn::analyze_all(s.analysis, opt);
  const auto namer = result.system.namer();
  for (const auto& st : result.states) {
    if (!st.observable()) {
      std::printf("%s is not observable: %s\n", st.name.c_str(), st.reason.c_str());
      continue;
    }
    const auto e = obspinn::reconstruction(st);
    std::printf("%s = (%s) / (%s)\n", st.name.c_str(), e.numerator.to_string(namer).c_str(), e.denominator.to_string(namer).c_str());
  }
}
