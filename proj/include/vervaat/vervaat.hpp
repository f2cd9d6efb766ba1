#pragma once

#include "decomp.hpp"
#include "drift.hpp"
#include "error.hpp"
#include "grid_path.hpp"
#include "hull.hpp"
#include "lattice.hpp"
#include "laws.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "stats.hpp"
#include "transform.hpp"
