#pragma once

#include "tsemos/synthetic.hpp"

#include <cstdint>

namespace fixtures {

inline tsemos::SyntheticConfig scenario(tsemos::SyntheticScenario kind, std::uint64_t seed, int n_days, int lead) {
    tsemos::SyntheticConfig cfg = tsemos::scenario_config(kind);
    cfg.seed = seed;
    cfg.n_days = n_days;
    cfg.lead_time_h = lead;
    return cfg;
}

// AR(1) τ = 0.6 in the standardized errors.
inline tsemos::SyntheticConfig sar_config(std::uint64_t seed, int n_days = 2192, int lead = 24) {
    return scenario(tsemos::SyntheticScenario::Sar, seed, n_days, lead);
}

// AR(1) τ = 0.7 in the deseasonalized errors, optionally with GARCH(1,1) (0.2, 0.6, 0.2).
inline tsemos::SyntheticConfig dar_config(std::uint64_t seed, bool garch, int n_days = 2192, int lead = 24) {
    return scenario(garch ? tsemos::SyntheticScenario::Garch : tsemos::SyntheticScenario::Dar, seed, n_days, lead);
}

// Seasonal errors without serial dependence, moderate spread-skill relation.
inline tsemos::SyntheticConfig iid_config(std::uint64_t seed, int n_days = 2192, int lead = 24) {
    tsemos::SyntheticConfig cfg = dar_config(seed, false, n_days, lead);
    cfg.ar.tau.resize(0);
    return cfg;
}

}  // namespace fixtures
