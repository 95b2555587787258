#pragma once

#include "clique_sim.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "spectral.hpp"
#include "chebyshev.hpp"
#include "sparsify.hpp"
#include "laplacian_solver.hpp"
#include "euler_orient.hpp"
#include "flow_round.hpp"
#include "flow_oracles.hpp"
#include "residual_paths.hpp"
#include "maxflow.hpp"
#include "mincostflow.hpp"
#include "generators.hpp"
#include "instance_io.hpp"
