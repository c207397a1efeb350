#pragma once

#include "core.hpp"
#include "multigraph.hpp"
#include "routes.hpp"
#include "pricing.hpp"
#include "rmp.hpp"
#include "oracle.hpp"
#include "vns.hpp"
#include "bp.hpp"
#include "milp.hpp"
