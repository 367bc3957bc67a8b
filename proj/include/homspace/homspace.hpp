#pragma once

#include "homspace/core.hpp"
#include "homspace/space.hpp"
#include "homspace/io.hpp"
#include "homspace/metrization.hpp"
#include "homspace/dyadic.hpp"
#include "homspace/collection.hpp"
#include "homspace/czd.hpp"
#include "homspace/weights.hpp"
#include "homspace/quasisym.hpp"
#include "homspace/harness/generators.hpp"
#include "homspace/harness/report.hpp"
#include "homspace/harness/scenario.hpp"
