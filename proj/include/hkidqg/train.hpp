#pragma once

#include <cstddef>
#include <vector>

#include "hkidqg/backends.hpp"
#include "hkidqg/config.hpp"
#include "hkidqg/dataset.hpp"
#include "hkidqg/fusion.hpp"
#include "hkidqg/optim.hpp"
#include "hkidqg/pipeline.hpp"

namespace hkidqg {

/// Surrogate objective: mean squared difference between the row mean of
/// H_fuse and the pooled embedding of the reference question.
double surrogate_loss(const Matrix& h_fuse, const Vector& target);

/// dL/dH_fuse of surrogate_loss.
Matrix surrogate_grad(const Matrix& h_fuse, const Vector& target);

struct TrainResult {
    FusionParams initial;
    FusionParams params;
    OptimizerState optimizer;
    Schedule schedule;
    // Entry 0 is the loss before training, entry e the loss after epoch e;
    // all measured without dropout over the whole dataset.
    std::vector<double> epoch_losses;
};

/// Trains W_h, W_t and W_v on the surrogate objective. Mini-batches of
/// cfg.batch_size records, gradients summed in record order and averaged over
/// cfg.grad_accum batches per optimizer step, row dropout cfg.dropout. Every
/// random draw comes from cfg.seed.
TrainResult toy_train(const std::vector<DatasetRecord>& records, const PipelineConfig& cfg,
                      const Backends& backends, const DiagramSource& source);

/// Parameters used when no checkpoint is given: the same initialization
/// toy_train starts from.
FusionParams initial_params(const PipelineConfig& cfg);

/// Wraps the text encoder and VLM with per-input caches. Safe to share
/// between threads.
Backends memoize_backends(const Backends& b);

}  // namespace hkidqg
