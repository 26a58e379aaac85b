#pragma once

#include "hdbn/ablation.hpp"
#include "hdbn/backbone.hpp"
#include "hdbn/config.hpp"
#include "hdbn/dataset_io.hpp"
#include "hdbn/ensemble.hpp"
#include "hdbn/error.hpp"
#include "hdbn/former.hpp"
#include "hdbn/gcn.hpp"
#include "hdbn/metrics.hpp"
#include "hdbn/nn.hpp"
#include "hdbn/pose_lift.hpp"
#include "hdbn/skeleton.hpp"
#include "hdbn/skl1.hpp"
#include "hdbn/synth.hpp"
#include "hdbn/topology.hpp"
#include "hdbn/training.hpp"
