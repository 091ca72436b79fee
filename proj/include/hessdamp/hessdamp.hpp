// Umbrella header.
#pragma once

#include "hessdamp/analysis.hpp"
#include "hessdamp/continuous.hpp"
#include "hessdamp/core.hpp"
#include "hessdamp/experiment.hpp"
#include "hessdamp/functions.hpp"
#include "hessdamp/solvers.hpp"
