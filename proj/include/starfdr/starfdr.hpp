#pragma once

#include "starfdr/common.hpp"
#include "starfdr/compression.hpp"
#include "starfdr/experiments.hpp"
#include "starfdr/netsim.hpp"
#include "starfdr/protocols.hpp"
#include "starfdr/rng.hpp"
#include "starfdr/stats.hpp"
