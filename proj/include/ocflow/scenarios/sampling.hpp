/// @file sampling.hpp
/// Deterministic training-parameter sampling over the Reynolds box.

#pragma once

#include "ocflow/scenarios/config.hpp"

#include <vector>

namespace ocflow::scen {

/// n_train points uniform in [re_min, re_max]^param_dim, drawn from a seeded
/// 64-bit Mersenne Twister with a bit-portable uniform mapping.  When the
/// budget allows (n_train >= 2^param_dim) the last 2^param_dim samples are
/// replaced by the box corners in lexicographic order, so the training set
/// always brackets the parameter range.
std::vector<Vec> training_samples(const ScenarioConfig& cfg);

/// String key "re1[_re2]" used in file names for a parameter value.
std::string mu_key(const Vec& mu);

}  // namespace ocflow::scen
