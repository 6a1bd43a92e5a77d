#pragma once

/**
 * @file rauzy.hpp
 * @brief Umbrella header for the library.
 */

#include "rauzy/bigint.hpp"
#include "rauzy/cocycle.hpp"
#include "rauzy/error.hpp"
#include "rauzy/experiments.hpp"
#include "rauzy/induction.hpp"
#include "rauzy/io.hpp"
#include "rauzy/kernel.hpp"
#include "rauzy/observable.hpp"
#include "rauzy/permutation.hpp"
#include "rauzy/point.hpp"
#include "rauzy/random.hpp"
#include "rauzy/rauzy_class.hpp"
#include "rauzy/returns.hpp"
#include "rauzy/statistics.hpp"
#include "rauzy/symbolic.hpp"
#include "rauzy/word.hpp"
#include "rauzy/zippered.hpp"
