#include "scalenet/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace scalenet {

void adamw_update(std::span<const ParamSlot> slots, OptimState& state) {
    if (state.first_moment.empty()) {
        for (const auto& slot : slots) {
            state.first_moment.emplace_back(slot.value.size(), 0.0);
            state.second_moment.emplace_back(slot.value.size(), 0.0);
        }
    }
    if (state.first_moment.size() != slots.size()) throw std::invalid_argument("adamw: slot count changed");

    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);

    for (std::size_t s = 0; s < slots.size(); ++s) {
        const ParamSlot& slot = slots[s];
        auto& m = state.first_moment[s];
        auto& v = state.second_moment[s];
        if (slot.value.size() != slot.grad.size() || m.size() != slot.value.size()) {
            throw std::invalid_argument("adamw: parameter/gradient/moment size mismatch");
        }
        const double shrink = slot.decay ? 1.0 - slot.lr * state.weight_decay : 1.0;
        for (std::size_t i = 0; i < slot.value.size(); ++i) {
            const double g = slot.grad[i];
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            slot.value[i] = slot.value[i] * shrink - slot.lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

}  // namespace scalenet
