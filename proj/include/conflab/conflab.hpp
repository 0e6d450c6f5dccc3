#pragma once

#include "conflab/error.hpp"
#include "conflab/rng.hpp"
#include "conflab/parallel.hpp"
#include "conflab/stats.hpp"
#include "conflab/quadrature.hpp"
#include "conflab/geometry.hpp"
#include "conflab/random_paths.hpp"
#include "conflab/loewner.hpp"
#include "conflab/special_functions.hpp"
#include "conflab/percolation.hpp"
#include "conflab/saw.hpp"
#include "conflab/experiment_result.hpp"
#include "conflab/experiments.hpp"
