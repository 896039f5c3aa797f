#pragma once

#include "rebac/model.hpp"
#include "rebac/policy.hpp"
#include "rebac/pair_set.hpp"
#include "rebac/random.hpp"
#include "rebac/features.hpp"
#include "rebac/nn.hpp"
#include "rebac/parallel.hpp"
#include "rebac/grammar.hpp"
#include "rebac/search.hpp"
#include "rebac/miner.hpp"
#include "rebac/synthetic.hpp"
#include "rebac/metrics.hpp"
#include "rebac/io.hpp"
