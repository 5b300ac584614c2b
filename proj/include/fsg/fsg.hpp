#pragma once

// Umbrella header: patch-based forensic similarity graph analysis.

#include "fsg/errors.hpp"
#include "fsg/graph.hpp"
#include "fsg/image.hpp"
#include "fsg/localize.hpp"
#include "fsg/matrix.hpp"
#include "fsg/metrics.hpp"
#include "fsg/modularity.hpp"
#include "fsg/parallel.hpp"
#include "fsg/partition.hpp"
#include "fsg/patch.hpp"
#include "fsg/pipeline.hpp"
#include "fsg/random.hpp"
#include "fsg/similarity.hpp"
#include "fsg/spectral.hpp"
#include "fsg/synth.hpp"
