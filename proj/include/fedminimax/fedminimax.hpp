#pragma once

// Umbrella header for the library.

#include "fedminimax/auc.hpp"
#include "fedminimax/config.hpp"
#include "fedminimax/core.hpp"
#include "fedminimax/error.hpp"
#include "fedminimax/experiment.hpp"
#include "fedminimax/fedopt.hpp"
#include "fedminimax/linalg.hpp"
#include "fedminimax/matrix.hpp"
#include "fedminimax/metrics.hpp"
#include "fedminimax/noise.hpp"
#include "fedminimax/problem.hpp"
#include "fedminimax/rng.hpp"
#include "fedminimax/saddle.hpp"
#include "fedminimax/trace.hpp"
#include "fedminimax/trace_io.hpp"
