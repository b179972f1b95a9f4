#pragma once

// Umbrella header: precipitation-event tracking, per-event correlation
// networks, and cross-event meteo-network analysis on gridded reflectivity.

#include "stormnet/config.hpp"
#include "stormnet/error.hpp"
#include "stormnet/graph.hpp"
#include "stormnet/grid.hpp"
#include "stormnet/meteo.hpp"
#include "stormnet/meteonet.hpp"
#include "stormnet/pipeline.hpp"
#include "stormnet/segment.hpp"
#include "stormnet/similarity.hpp"
#include "stormnet/stats.hpp"
#include "stormnet/synth.hpp"
#include "stormnet/track.hpp"
#include "stormnet/version.hpp"
