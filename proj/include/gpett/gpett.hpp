#pragma once

#include "gpett/angles.hpp"
#include "gpett/errors.hpp"
#include "gpett/geometry.hpp"
#include "gpett/gp_model.hpp"
#include "gpett/metrics.hpp"
#include "gpett/pipeline.hpp"
#include "gpett/regress_demo.hpp"
#include "gpett/rgp.hpp"
#include "gpett/sim.hpp"
#include "gpett/smoother.hpp"
#include "gpett/tracker.hpp"
