#pragma once

// Gaussian belief propagation for pairwise linear Gaussian models: umbrella
// header pulling in the whole library.

#include "centralized.hpp"   // stacked MAP oracle
#include "compare.hpp"       // BP-vs-oracle reporting
#include "convergence.hpp"   // fixed point of G, Q system, rho(Q) verdict
#include "engine.hpp"        // synchronous message-passing engine
#include "generators.hpp"    // seeded benchmark models (incl. DC power flow)
#include "io.hpp"            // trace CSV and report JSON
#include "model.hpp"         // pairwise model, validation, JSON round-trip
#include "numerics.hpp"      // dense kernels with pinned tolerances
#include "parallel.hpp"      // GABP_THREADS sweep helper
