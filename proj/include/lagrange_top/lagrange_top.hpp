#pragma once

#include "lagrange_top/top.hpp"
#include "lagrange_top/integrator.hpp"
#include "lagrange_top/linear_stability.hpp"
#include "lagrange_top/level_set.hpp"
#include "lagrange_top/experiment.hpp"
