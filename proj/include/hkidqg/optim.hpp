#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "hkidqg/matrix.hpp"

namespace hkidqg {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

struct Schedule {
    std::size_t steps_per_epoch = 1;
    int warmup_epochs = 2;
    int total_epochs = 20;
};

/// Linear warmup from 0 to base_lr over the warmup epochs, then cosine decay
/// to 0 at the end of the horizon. Steps past the horizon clamp to 0.
double lr_schedule(std::size_t step, const Schedule& sched, double base_lr);

struct Moments {
    Matrix m;
    Matrix v;
    std::uint64_t t = 0;
};

struct ParamGroup {
    std::string name;
    double base_lr = 5e-5;
};

struct OptimizerState {
    AdamWConfig config;
    std::map<std::string, ParamGroup> groups{{"encoder", {"encoder", 1e-5}},
                                             {"default", {"default", 5e-5}}};
    std::map<std::string, Moments> moments;
    std::uint64_t step = 0;
    std::uint64_t rejected_steps = 0;
};

/// One decoupled-weight-decay Adam update of a single tensor.
void adamw_update(Matrix& param, const Matrix& grad, Moments& mom, double lr,
                  const AdamWConfig& cfg);

struct ParamSlot {
    std::string name;
    std::string group = "default";
    Matrix* value = nullptr;
    const Matrix* grad = nullptr;
};

/// Applies one AdamW step to every slot at lr_schedule(state.step + 1) of its
/// group's base rate. If any gradient is non-finite nothing is modified and
/// the step is counted in rejected_steps; returns whether it was applied.
bool adamw_step(std::span<ParamSlot> slots, OptimizerState& state, const Schedule& sched);

}  // namespace hkidqg
