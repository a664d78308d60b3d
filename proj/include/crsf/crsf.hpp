#pragma once

#include "crsf/config.hpp"
#include "crsf/core.hpp"
#include "crsf/instance_io.hpp"
#include "crsf/net.hpp"
#include "crsf/plot.hpp"
#include "crsf/protocol.hpp"
#include "crsf/registry.hpp"
#include "crsf/scoring.hpp"
#include "crsf/service.hpp"
#include "crsf/service_driver.hpp"
#include "crsf/sim.hpp"
#include "crsf/solver.hpp"
