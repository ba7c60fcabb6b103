#pragma once

#include "growthkit/data_io.hpp"
#include "growthkit/dynsys.hpp"
#include "growthkit/error.hpp"
#include "growthkit/field.hpp"
#include "growthkit/fitting.hpp"
#include "growthkit/growth_models.hpp"
#include "growthkit/ode.hpp"
#include "growthkit/roots.hpp"
