#pragma once

#include "tofdepth/core.hpp"
#include "tofdepth/dataset.hpp"
#include "tofdepth/flow.hpp"
#include "tofdepth/infill.hpp"
#include "tofdepth/metrics.hpp"
#include "tofdepth/pipeline.hpp"
#include "tofdepth/png_io.hpp"
#include "tofdepth/pose.hpp"
#include "tofdepth/power.hpp"
#include "tofdepth/ransac.hpp"
#include "tofdepth/synth.hpp"
#include "tofdepth/warp.hpp"
