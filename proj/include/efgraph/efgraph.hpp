#pragma once

// Umbrella header.

#include "efgraph/dynamics.hpp"
#include "efgraph/eeg_power.hpp"
#include "efgraph/error.hpp"
#include "efgraph/filter.hpp"
#include "efgraph/graph.hpp"
#include "efgraph/io.hpp"
#include "efgraph/rng.hpp"
#include "efgraph/states.hpp"
#include "efgraph/stats.hpp"
#include "efgraph/synth.hpp"
#include "efgraph/timeseries.hpp"
