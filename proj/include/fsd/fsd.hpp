#pragma once

// Umbrella header for the flow-sequence detection library.

// data model and ingestion
#include "fsd/error.hpp"
#include "fsd/flow.hpp"
#include "fsd/dataset.hpp"
#include "fsd/synth.hpp"

// sequencing and normalization
#include "fsd/sequencer.hpp"
#include "fsd/normalize.hpp"

// numerics and model
#include "fsd/tensor.hpp"
#include "fsd/optim.hpp"
#include "fsd/tokenizer.hpp"
#include "fsd/backbone.hpp"
#include "fsd/head.hpp"
#include "fsd/model.hpp"

// training, persistence, evaluation
#include "fsd/checkpoint.hpp"
#include "fsd/trainer.hpp"
#include "fsd/metrics.hpp"
#include "fsd/baseline.hpp"
#include "fsd/scenarios.hpp"
#include "fsd/report.hpp"
#include "fsd/alert.hpp"
