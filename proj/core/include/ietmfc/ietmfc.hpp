#pragma once

#include "ietmfc/errors.hpp"
#include "ietmfc/estimation.hpp"
#include "ietmfc/grid_function.hpp"
#include "ietmfc/meanfield.hpp"
#include "ietmfc/model.hpp"
#include "ietmfc/odeflow.hpp"
#include "ietmfc/population.hpp"
#include "ietmfc/propagation.hpp"
