#pragma once

#include "lowrank/approximation.hpp"
#include "lowrank/completion.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/instances.hpp"
#include "lowrank/metrics.hpp"
#include "lowrank/oracle.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/sampling.hpp"
#include "lowrank/subspace.hpp"
#include "lowrank/types.hpp"
