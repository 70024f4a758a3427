#pragma once

#include "liqsim/batch.hpp"
#include "liqsim/errors.hpp"
#include "liqsim/event_stream.hpp"
#include "liqsim/impact.hpp"
#include "liqsim/lob_model.hpp"
#include "liqsim/pdmp.hpp"
#include "liqsim/point_process.hpp"
#include "liqsim/price_distribution.hpp"
#include "liqsim/random.hpp"
#include "liqsim/report.hpp"
#include "liqsim/scenario.hpp"
#include "liqsim/solver.hpp"
