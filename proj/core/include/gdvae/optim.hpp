#pragma once

#include "gdvae/tensor.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gdvae {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One Adam update from Parameter::grad, with per-parameter moments and bias
// correction. Throws (naming the parameter) if any gradient is not finite.
void adam_step(const std::vector<Parameter*>& params, const AdamConfig& cfg);

// Central-difference check of the gradients a loss function produces.
// f(true) must zero, recompute and accumulate gradients and return the loss;
// f(false) must only return the loss at the current parameter values.
struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst_param;
    int worst_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
};
GradCheckResult gradient_check(const std::function<double(bool with_grad)>& f,
                               const std::vector<Parameter*>& params, double eps = 1e-5);

}  // namespace gdvae
