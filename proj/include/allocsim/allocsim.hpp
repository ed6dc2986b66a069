#pragma once

// Umbrella header for the joint two-resource allocation simulator.

#include "allocsim/config.hpp"
#include "allocsim/core.hpp"
#include "allocsim/engine.hpp"
#include "allocsim/metrics.hpp"
#include "allocsim/policy.hpp"
#include "allocsim/rng.hpp"
#include "allocsim/scenario.hpp"
#include "allocsim/sweep.hpp"
#include "allocsim/timeline.hpp"
#include "allocsim/trace.hpp"
#include "allocsim/workload.hpp"
