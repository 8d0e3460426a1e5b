// SPDX-License-Identifier: Apache-2.0
#pragma once

// Umbrella header: operator-size growth for all-to-all Brownian systems
// coupled to an environment.

#include "opsize/branching_mc.hpp"
#include "opsize/closed_form.hpp"
#include "opsize/csv.hpp"
#include "opsize/math.hpp"
#include "opsize/meanfield.hpp"
#include "opsize/model.hpp"
#include "opsize/model_io.hpp"
#include "opsize/quadrature.hpp"
#include "opsize/rk45.hpp"
#include "opsize/sector_chain.hpp"
#include "opsize/special.hpp"
#include "opsize/version.hpp"
