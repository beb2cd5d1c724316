#pragma once

#include "donorspin/analysis.hpp"
#include "donorspin/config.hpp"
#include "donorspin/core.hpp"
#include "donorspin/gates.hpp"
#include "donorspin/metrics.hpp"
#include "donorspin/params.hpp"
#include "donorspin/propagator.hpp"
#include "donorspin/schedule_io.hpp"
#include "donorspin/spin_model.hpp"
#include "donorspin/validation.hpp"
