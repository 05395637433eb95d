#pragma once

#include "c3po/circular_buffer.hpp"
#include "c3po/controller.hpp"
#include "c3po/engine.hpp"
#include "c3po/errors.hpp"
#include "c3po/metrics.hpp"
#include "c3po/queueing.hpp"
#include "c3po/random.hpp"
#include "c3po/report_io.hpp"
#include "c3po/scenario.hpp"
#include "c3po/topology.hpp"
#include "c3po/topology_io.hpp"
#include "c3po/workload.hpp"
