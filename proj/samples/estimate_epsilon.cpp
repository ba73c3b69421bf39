// Short proposed-mode run on noise-free SEIR data. Pass the number of
// epochs and BO iterations to make it longer.
#include <cstdio>
#include <cstdlib>

#include "obspinn/report/report.hpp"

int main(int argc, char** argv) {
  using namespace obspinn;
  TrainConfig cfg = TrainConfig::desk();
  cfg.epochs = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1000;
  cfg.iterations = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 6;
  const auto s = make_scenario("seir");
  const auto d = prepare_dataset(s, 0.0, 0);
  const auto out = train(s, d, cfg);
  for (std::size_t k = 0; k < out.history.size(); ++k)
    std::printf("candidate %2zu  epsilon=%.4f  E_val=%.3e%s\n", k + 1, out.history[k].x[0], out.history[k].value,
                k == out.s_star ? "  <- selected" : "");
  for (const auto& r : compute_metrics(s, d, out.net, out.theta_unknown))
    if (r.split != "val") std::printf("%s %s = %.4g\n", r.metric.c_str(), r.target.c_str(), r.value);
}
