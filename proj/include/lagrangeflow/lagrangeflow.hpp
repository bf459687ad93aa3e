#pragma once

// Umbrella header for the lagrangeflow library: scalar conservation laws,
// their Lagrangian Temple-system form, flow-map reconstruction, and the
// action functionals whose extremals the flow maps are.

#include "lagrangeflow/catalog.hpp"
#include "lagrangeflow/csv.hpp"
#include "lagrangeflow/errors.hpp"
#include "lagrangeflow/eulerian.hpp"
#include "lagrangeflow/flow_map.hpp"
#include "lagrangeflow/flux_calculus.hpp"
#include "lagrangeflow/grid.hpp"
#include "lagrangeflow/marching.hpp"
#include "lagrangeflow/numerics.hpp"
#include "lagrangeflow/scenario.hpp"
#include "lagrangeflow/systems.hpp"
#include "lagrangeflow/temple.hpp"
#include "lagrangeflow/variational.hpp"
