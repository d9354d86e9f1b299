#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fas/numerics/rng.hpp"
#include "fas/numerics/tensor.hpp"

namespace fas {

/// A learnable tensor together with its gradient and AdamW state.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value, bool decay = true);

  std::string name;
  Tensor value;
  Tensor grad;
  Tensor first_moment;
  Tensor second_moment;
  std::int64_t step = 0;
  bool decay = true;  // weight decay applies (matrices yes; norms, biases no)

  void zero_grad() { grad.fill(0.0); }
};

struct AdamWConfig {
  double lr = 1.5e-4;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

/// One AdamW update over every parameter: decoupled decay on the value,
/// then the bias-corrected Adam step. Throws ErrorKind::numeric naming the
/// first parameter with a non-finite gradient; no parameter is modified then.
void adamw_step(std::span<Parameter> params, const AdamWConfig& config);

/// Linear warmup from 0 to base_lr over warmup_steps, then half-cosine decay to 0.
double lr_schedule(std::int64_t step, std::int64_t total_steps, std::int64_t warmup_steps,
                   double base_lr);

/// Uniform Xavier/Glorot initialization on ±sqrt(6/(fan_in+fan_out)).
/// Rejects shapes that are not rank 2.
Tensor xavier_init(const std::vector<std::size_t>& shape, RngStream& rng);

}  // namespace fas
