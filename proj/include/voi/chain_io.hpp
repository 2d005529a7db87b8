#pragma once

#include <string>

#include "voi/sampler.hpp"

namespace voi {

// Columnar chain persistence: `<base>.csv` holds one column per scalar
// component and one row per draw; `<base>.json` is the provenance sidecar
// (versioned). Round-trips exactly (%.17g formatting).
void save_chain(const PosteriorChain& chain, const std::string& base_path);
PosteriorChain load_chain(const std::string& base_path);

}  // namespace voi
