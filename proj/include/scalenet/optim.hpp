#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace scalenet {

/// One trainable tensor as seen by the optimizer.
struct ParamSlot {
    std::span<double> value;
    std::span<const double> grad;
    double lr = 0.0;
    bool decay = false;  // decoupled weight decay applies
};

struct OptimState {
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
    std::int64_t step_count = 0;
    double lr_weights = 0.01;
    double lr_scales = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

/// AdamW with decoupled weight decay:
///   w <- w * (1 - lr * wd)            (decay slots only)
///   w <- w - lr * m_hat / (sqrt(v_hat) + eps)
/// Moments are lazily sized to the slots on the first call; later calls must
/// pass slots of the same shapes in the same order.
void adamw_update(std::span<const ParamSlot> slots, OptimState& state);

}  // namespace scalenet
