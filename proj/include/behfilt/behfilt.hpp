#pragma once

#include "behfilt/classifiers/model.hpp"
#include "behfilt/data_model.hpp"
#include "behfilt/evaluation.hpp"
#include "behfilt/featurize.hpp"
#include "behfilt/filters/filter_kind.hpp"
#include "behfilt/outliers.hpp"
#include "behfilt/pipeline.hpp"
#include "behfilt/router.hpp"
#include "behfilt/run_config.hpp"
#include "behfilt/synth.hpp"
