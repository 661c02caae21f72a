#pragma once

#include "sggsr/attack.hpp"
#include "sggsr/augment.hpp"
#include "sggsr/bundle_io.hpp"
#include "sggsr/error.hpp"
#include "sggsr/extract.hpp"
#include "sggsr/graph.hpp"
#include "sggsr/gsr/groups.hpp"
#include "sggsr/gsr/loss.hpp"
#include "sggsr/gsr/model.hpp"
#include "sggsr/gsr/model_io.hpp"
#include "sggsr/gsr/sampling.hpp"
#include "sggsr/gsr/train.hpp"
#include "sggsr/harness/config.hpp"
#include "sggsr/harness/experiment.hpp"
#include "sggsr/harness/generators.hpp"
#include "sggsr/harness/metrics.hpp"
#include "sggsr/node2vec.hpp"
#include "sggsr/rng.hpp"
