#pragma once

#include "wsnloc/core.hpp"
#include "wsnloc/experiment.hpp"
#include "wsnloc/graph.hpp"
#include "wsnloc/hierarchy.hpp"
#include "wsnloc/io.hpp"
#include "wsnloc/metrics.hpp"
#include "wsnloc/nbp.hpp"
#include "wsnloc/particles.hpp"
#include "wsnloc/presets.hpp"
#include "wsnloc/scenario.hpp"
