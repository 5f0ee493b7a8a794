#include "gdvae/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gdvae {

void adam_step(const std::vector<Parameter*>& params, const AdamConfig& cfg) {
    for (Parameter* p : params) {
        if (!p->grad.all_finite())
            throw std::runtime_error("non-finite gradient in parameter " + p->name);
        p->step += 1;
        double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
        double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
        for (size_t i = 0; i < p->value.size(); ++i) {
            double g = p->grad.v[i];
            double m = cfg.beta1 * p->moment1.v[i] + (1.0 - cfg.beta1) * g;
            double v = cfg.beta2 * p->moment2.v[i] + (1.0 - cfg.beta2) * g * g;
            p->moment1.v[i] = m;
            p->moment2.v[i] = v;
            p->value.v[i] -= cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
        }
    }
}

GradCheckResult gradient_check(const std::function<double(bool)>& f,
                               const std::vector<Parameter*>& params, double eps) {
    for (Parameter* p : params) p->zero_grad();
    f(true);
    std::vector<DenseMatrix> analytic;
    analytic.reserve(params.size());
    for (Parameter* p : params) analytic.push_back(p->grad);

    GradCheckResult res;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Parameter* p = params[pi];
        for (size_t i = 0; i < p->value.size(); ++i) {
            double saved = p->value.v[i];
            p->value.v[i] = saved + eps;
            double up = f(false);
            p->value.v[i] = saved - eps;
            double down = f(false);
            p->value.v[i] = saved;
            double numeric = (up - down) / (2.0 * eps);
            double a = analytic[pi].v[i];
            double rel = std::fabs(a - numeric) / std::max(1e-8, std::fabs(a) + std::fabs(numeric));
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst_param = p->name;
                res.worst_index = static_cast<int>(i);
                res.analytic = a;
                res.numeric = numeric;
            }
        }
    }
    return res;
}

}  // namespace gdvae
