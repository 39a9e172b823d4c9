#ifndef PSDC_PSDC_HPP
#define PSDC_PSDC_HPP

// Umbrella header for the whole toolkit.

#include "psdc/analysis.hpp"
#include "psdc/common.hpp"
#include "psdc/linalg.hpp"
#include "psdc/optimize.hpp"
#include "psdc/precond.hpp"
#include "psdc/problems.hpp"
#include "psdc/quadrature.hpp"
#include "psdc/sweeper.hpp"

#endif
