#include "hkidqg/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hkidqg/error.hpp"

namespace hkidqg {

double lr_schedule(std::size_t step, const Schedule& sched, double base_lr) {
    if (sched.steps_per_epoch == 0) throw ConfigError("steps_per_epoch must be positive");
    if (sched.total_epochs <= sched.warmup_epochs || sched.warmup_epochs < 0)
        throw ConfigError("schedule needs 0 <= warmup_epochs < total_epochs");
    const std::size_t warmup = sched.steps_per_epoch * static_cast<std::size_t>(sched.warmup_epochs);
    const std::size_t total = sched.steps_per_epoch * static_cast<std::size_t>(sched.total_epochs);
    step = std::min(step, total);
    if (step < warmup) return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
    const double progress =
        static_cast<double>(step - warmup) / static_cast<double>(total - warmup);
    return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void adamw_update(Matrix& param, const Matrix& grad, Moments& mom, double lr,
                  const AdamWConfig& cfg) {
    check_same_shape(param, grad, "adamw_update");
    if (mom.m.size() != param.size()) {
        mom.m = Matrix(param.rows(), param.cols());
        mom.v = Matrix(param.rows(), param.cols());
    }
    ++mom.t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(mom.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(mom.t));
    const double decay = 1.0 - lr * cfg.weight_decay;
    auto p = param.data();
    auto g = grad.data();
    auto m = mom.m.data();
    auto v = mom.v.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] *= decay;
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        p[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

bool adamw_step(std::span<ParamSlot> slots, OptimizerState& state, const Schedule& sched) {
    for (const ParamSlot& s : slots) {
        if (s.value == nullptr || s.grad == nullptr) throw ContractViolation("empty parameter slot");
        check_same_shape(*s.value, *s.grad, s.name.c_str());
        if (!state.groups.contains(s.group))
            throw ConfigError("unknown parameter group: " + s.group);
        if (!s.grad->all_finite()) {
            ++state.rejected_steps;
            return false;
        }
    }
    const std::size_t next = static_cast<std::size_t>(state.step + 1);
    for (ParamSlot& s : slots) {
        const double lr = lr_schedule(next, sched, state.groups.at(s.group).base_lr);
        adamw_update(*s.value, *s.grad, state.moments[s.name], lr, state.config);
    }
    ++state.step;
    return true;
}

}  // namespace hkidqg
