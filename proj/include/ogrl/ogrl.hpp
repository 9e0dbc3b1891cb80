#pragma once

#include "ogrl/advice.hpp"
#include "ogrl/agent.hpp"
#include "ogrl/error.hpp"
#include "ogrl/experiment.hpp"
#include "ogrl/grid.hpp"
#include "ogrl/opinion.hpp"
#include "ogrl/report.hpp"
#include "ogrl/rng.hpp"
#include "ogrl/shaping.hpp"
#include "ogrl/stats.hpp"

namespace ogrl {
inline constexpr const char* kVersion = "0.1.0";
}
