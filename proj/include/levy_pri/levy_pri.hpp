#pragma once

// Everything except the JSON layer (levy_pri/json_io.hpp), which needs
// nlohmann/json on the include path.

#include "levy_pri/criteria.hpp"
#include "levy_pri/errors.hpp"
#include "levy_pri/ladder.hpp"
#include "levy_pri/measures.hpp"
#include "levy_pri/parallel.hpp"
#include "levy_pri/quadrature.hpp"
#include "levy_pri/rng.hpp"
#include "levy_pri/simulate.hpp"

namespace levy_pri {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace levy_pri
