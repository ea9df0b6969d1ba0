#pragma once

// NeuroMorphix: whole-brain hemispheric-asymmetry features from FreeSurfer
// morphometry tables, plus the full classification workflow around them
// (class balancing, wrapper feature selection, from-scratch learners,
// cross-validated evaluation, reporting).

#include "nmx/csv.hpp"
#include "nmx/error.hpp"
#include "nmx/eval.hpp"
#include "nmx/features.hpp"
#include "nmx/freesurfer.hpp"
#include "nmx/learners.hpp"
#include "nmx/matrix.hpp"
#include "nmx/pipeline.hpp"
#include "nmx/rng.hpp"
#include "nmx/selection.hpp"
#include "nmx/smote.hpp"
#include "nmx/stats_types.hpp"
#include "nmx/synth.hpp"
#include "nmx/util.hpp"
