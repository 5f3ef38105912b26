#pragma once

#include "heart/candidates.hpp"
#include "heart/diagnostics.hpp"
#include "heart/error.hpp"
#include "heart/graph.hpp"
#include "heart/heuristics.hpp"
#include "heart/metrics.hpp"
#include "heart/parallel.hpp"
#include "heart/rng.hpp"
#include "heart/sampler.hpp"
#include "heart/synthetic.hpp"
