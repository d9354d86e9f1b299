#include "fas/numerics/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fas/error.hpp"

namespace fas {

Parameter::Parameter(std::string name_, Tensor value_, bool decay_)
    : name(std::move(name_)),
      value(std::move(value_)),
      grad(Tensor::zeros_like(value)),
      first_moment(Tensor::zeros_like(value)),
      second_moment(Tensor::zeros_like(value)),
      decay(decay_) {}

void adamw_step(std::span<Parameter> params, const AdamWConfig& config) {
  for (const Parameter& p : params) {
    if (!p.grad.all_finite()) {
      throw Error(ErrorKind::numeric, "non-finite gradient in parameter " + p.name);
    }
  }
  for (Parameter& p : params) {
    ++p.step;
    const double t = static_cast<double>(p.step);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    const double shrink = p.decay ? 1.0 - config.lr * config.weight_decay : 1.0;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      double& m = p.first_moment[i];
      double& v = p.second_moment[i];
      m = config.beta1 * m + (1.0 - config.beta1) * g;
      v = config.beta2 * v + (1.0 - config.beta2) * g * g;
      const double m_hat = m / c1;
      const double v_hat = v / c2;
      p.value[i] = p.value[i] * shrink - config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

double lr_schedule(std::int64_t step, std::int64_t total_steps, std::int64_t warmup_steps,
                   double base_lr) {
  if (step < warmup_steps) {
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  }
  if (total_steps <= warmup_steps) return base_lr;
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(progress, 1.0)));
}

Tensor xavier_init(const std::vector<std::size_t>& shape, RngStream& rng) {
  if (shape.size() != 2) {
    throw Error(ErrorKind::dimension, "xavier_init needs a rank-2 shape, got " +
                                          shape_string(shape));
  }
  const double bound = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
  Tensor t(shape);
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace fas
