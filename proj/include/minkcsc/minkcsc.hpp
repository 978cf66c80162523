#pragma once

#include "minkcsc/barriers.hpp"
#include "minkcsc/curvature.hpp"
#include "minkcsc/dirichlet.hpp"
#include "minkcsc/entire_flow.hpp"
#include "minkcsc/errors.hpp"
#include "minkcsc/graph_grid.hpp"
#include "minkcsc/io.hpp"
#include "minkcsc/jet_sampling.hpp"
#include "minkcsc/property_suites.hpp"
#include "minkcsc/radial_lab.hpp"
#include "minkcsc/regular_domain.hpp"
#include "minkcsc/version.hpp"
