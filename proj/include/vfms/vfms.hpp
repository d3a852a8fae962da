#pragma once

#include "vfms/bench.hpp"
#include "vfms/cnf.hpp"
#include "vfms/engine.hpp"
#include "vfms/indexed_set.hpp"
#include "vfms/rng.hpp"
#include "vfms/trace.hpp"
