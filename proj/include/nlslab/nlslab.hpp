#pragma once

#include "config.hpp"
#include "csv.hpp"
#include "experiments.hpp"
#include "functionals.hpp"
#include "grid.hpp"
#include "groundstate.hpp"
#include "linops.hpp"
#include "modulation.hpp"
#include "nonlinearity.hpp"
#include "perturbation.hpp"
#include "propagator.hpp"
#include "soliton.hpp"
