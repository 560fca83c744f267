#pragma once

// Convenience include for the whole library.

#include "flatmcts/kernels.hpp"
#include "flatmcts/state.hpp"
#include "flatmcts/rng.hpp"
#include "flatmcts/env.hpp"
#include "flatmcts/env_json.hpp"
#include "flatmcts/search_config.hpp"
#include "flatmcts/layer_store.hpp"
#include "flatmcts/snapshot.hpp"
#include "flatmcts/array_search.hpp"
#include "flatmcts/tree_search.hpp"
#include "flatmcts/unsorted_search.hpp"
#include "flatmcts/validate.hpp"
#include "flatmcts/verify.hpp"
#include "flatmcts/bench.hpp"
