#pragma once

#include "gausscone/errors.hpp"
#include "gausscone/spherical_cone.hpp"
#include "gausscone/simplex.hpp"
#include "gausscone/pseudocone.hpp"
#include "gausscone/gauss_map.hpp"
#include "gausscone/tie_transport.hpp"
#include "gausscone/solver.hpp"
#include "gausscone/generate.hpp"
#include "gausscone/oracle.hpp"
#include "gausscone/io.hpp"
