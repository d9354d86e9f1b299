#pragma once

#include <cstddef>
#include <span>

#include "fas/numerics/tensor.hpp"

namespace fas {

struct Nmse {
  double linear = 0.0;
  double db = 0.0;  // -inf when linear is exactly 0
};

double to_db(double linear) noexcept;

/// Squared error over the rows in eval_ports divided by the truth energy over
/// the same rows. Throws ErrorKind::metric on an empty port set or zero truth
/// energy, ErrorKind::dimension on shape mismatch.
Nmse nmse(const Tensor& pred, const Tensor& truth, std::span<const std::size_t> eval_ports);

/// Averages per-sample NMSE in the linear domain.
class NmseAverage {
 public:
  void add(double linear) noexcept {
    sum_ += linear;
    ++count_;
  }
  std::size_t count() const noexcept { return count_; }
  Nmse result() const noexcept;

 private:
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace fas
