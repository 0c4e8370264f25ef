#pragma once

// Umbrella header: kernel-weighted sums and regression for recurrent time
// series, plus the Monte Carlo harness built on top of them.

#include "kernsum/version.hpp"

#include "kernsum/experiments.hpp"
#include "kernsum/grid.hpp"
#include "kernsum/harris.hpp"
#include "kernsum/kernels.hpp"
#include "kernsum/path.hpp"
#include "kernsum/processes.hpp"
#include "kernsum/regression.hpp"
#include "kernsum/rng.hpp"
#include "kernsum/split_chain.hpp"
#include "kernsum/stats.hpp"
#include "kernsum/sums.hpp"
