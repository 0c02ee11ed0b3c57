#pragma once

#include "lecam/approx.hpp"
#include "lecam/density.hpp"
#include "lecam/equivalence.hpp"
#include "lecam/error.hpp"
#include "lecam/experiments.hpp"
#include "lecam/format.hpp"
#include "lecam/harness.hpp"
#include "lecam/kernels.hpp"
#include "lecam/measures.hpp"
#include "lecam/parallel.hpp"
#include "lecam/quadrature.hpp"
#include "lecam/rng.hpp"
#include "lecam/stats.hpp"
#include "lecam/tent.hpp"
