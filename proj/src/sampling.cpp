#include "ocflow/scenarios/sampling.hpp"

#include "ocflow/core/io.hpp"

#include <random>
#include <sstream>

namespace ocflow::scen {

std::vector<Vec> training_samples(const ScenarioConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  auto unit = [&rng] {  // bit-portable uniform in [0, 1)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  const int p = cfg.param_dim;
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(cfg.n_train));
  for (int i = 0; i < cfg.n_train; ++i) {
    Vec mu(p);
    for (int d = 0; d < p; ++d)
      mu[d] = cfg.re_min + (cfg.re_max - cfg.re_min) * unit();
    out.push_back(mu);
  }
  const int corners = 1 << p;
  if (cfg.n_train >= corners) {
    for (int c = 0; c < corners; ++c) {
      Vec mu(p);
      for (int d = 0; d < p; ++d)
        mu[d] = (c >> (p - 1 - d)) & 1 ? cfg.re_max : cfg.re_min;
      out[static_cast<std::size_t>(cfg.n_train - corners + c)] = mu;
    }
  }
  return out;
}

std::string mu_key(const Vec& mu) {
  std::ostringstream os;
  for (int d = 0; d < mu.size(); ++d)
    os << (d ? "_" : "") << io::format_double(mu[d]);
  return os.str();
}

}  // namespace ocflow::scen
