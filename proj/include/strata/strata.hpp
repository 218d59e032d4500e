#pragma once

#include "strata/analysis.hpp"
#include "strata/assembly.hpp"
#include "strata/config.hpp"
#include "strata/effective_solver.hpp"
#include "strata/errors.hpp"
#include "strata/fine_solver.hpp"
#include "strata/grid.hpp"
#include "strata/io.hpp"
#include "strata/layers.hpp"
#include "strata/newmark.hpp"
#include "strata/operators.hpp"
#include "strata/point_process.hpp"
#include "strata/rng.hpp"
#include "strata/run.hpp"
#include "strata/scaling.hpp"
#include "strata/stochastic_density.hpp"
