#pragma once

#include "mfrac/error.hpp"
#include "mfrac/increments.hpp"
#include "mfrac/rng.hpp"
#include "mfrac/sample_path.hpp"
#include "mfrac/parallel.hpp"
#include "mfrac/quadrature.hpp"
#include "mfrac/theory.hpp"
#include "mfrac/gaussian_sim.hpp"
#include "mfrac/estimate.hpp"
#include "mfrac/io.hpp"
#include "mfrac/bench.hpp"
#include "mfrac/findata.hpp"
