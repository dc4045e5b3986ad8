#pragma once

// Umbrella header.

#include "ergraph/errors.hpp"
#include "ergraph/rng.hpp"
#include "ergraph/graph_model.hpp"
#include "ergraph/theory.hpp"
#include "ergraph/poisson_binomial.hpp"
#include "ergraph/spectral/operator.hpp"
#include "ergraph/spectral/dense.hpp"
#include "ergraph/spectral/lanczos.hpp"
#include "ergraph/spectral/chebyshev.hpp"
#include "ergraph/spectral/components.hpp"
#include "ergraph/pruning.hpp"
#include "ergraph/experiments/config.hpp"
#include "ergraph/experiments/output.hpp"
#include "ergraph/experiments/runners.hpp"
