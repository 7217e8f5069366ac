// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "backprop.hpp"
#include "benchmark.hpp"
#include "checkpoint.hpp"
#include "errors.hpp"
#include "evaluation.hpp"
#include "model_config.hpp"
#include "network.hpp"
#include "optimizer.hpp"
#include "preprocess.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "session_io.hpp"
#include "signal_model.hpp"
#include "stream_infer.hpp"
#include "synthgen.hpp"
#include "tensor.hpp"
#include "training.hpp"
#include "gradcheck.hpp"
