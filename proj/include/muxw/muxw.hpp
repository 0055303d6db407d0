#pragma once

#include "muxw/audit.hpp"
#include "muxw/config.hpp"
#include "muxw/cost.hpp"
#include "muxw/crw.hpp"
#include "muxw/field.hpp"
#include "muxw/metrics.hpp"
#include "muxw/perturbation.hpp"
#include "muxw/phy.hpp"
#include "muxw/policy.hpp"
#include "muxw/runner.hpp"
#include "muxw/scenario.hpp"
#include "muxw/sim.hpp"
#include "muxw/types.hpp"
