#pragma once

#include "halearn/automaton.hpp"
#include "halearn/benchmarks.hpp"
#include "halearn/clustering.hpp"
#include "halearn/config.hpp"
#include "halearn/dtw.hpp"
#include "halearn/error.hpp"
#include "halearn/evaluation.hpp"
#include "halearn/flow_inference.hpp"
#include "halearn/learner.hpp"
#include "halearn/manifest.hpp"
#include "halearn/model_io.hpp"
#include "halearn/numderiv.hpp"
#include "halearn/sampling.hpp"
#include "halearn/segmentation.hpp"
#include "halearn/trajectory.hpp"
#include "halearn/transition_inference.hpp"
#include "halearn/version.hpp"
