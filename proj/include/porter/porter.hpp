#pragma once

// Umbrella header for the PORTER decentralized optimization library.

#include "porter/clip.hpp"
#include "porter/compress.hpp"
#include "porter/config.hpp"
#include "porter/data.hpp"
#include "porter/engine.hpp"
#include "porter/graph.hpp"
#include "porter/metrics.hpp"
#include "porter/mixing.hpp"
#include "porter/privacy.hpp"
#include "porter/problems.hpp"
#include "porter/rng.hpp"
#include "porter/runner.hpp"
#include "porter/schedules.hpp"
