#include "fas/channel/nmse.hpp"

#include <cmath>
#include <string>

#include "fas/error.hpp"

namespace fas {

double to_db(double linear) noexcept {
  return linear == 0.0 ? -HUGE_VAL : 10.0 * std::log10(linear);
}

Nmse nmse(const Tensor& pred, const Tensor& truth, std::span<const std::size_t> eval_ports) {
  if (!pred.same_shape(truth) || pred.rank() != 2) {
    throw Error(ErrorKind::dimension, "nmse: prediction " + shape_string(pred.shape()) +
                                          " vs truth " + shape_string(truth.shape()));
  }
  if (eval_ports.empty()) throw Error(ErrorKind::metric, "nmse: no evaluation ports");
  double err = 0.0;
  double energy = 0.0;
  for (std::size_t p : eval_ports) {
    if (p >= truth.rows()) {
      throw Error(ErrorKind::dimension, "nmse: port " + std::to_string(p) + " out of range");
    }
    const auto pr = pred.row(p);
    const auto tr = truth.row(p);
    for (std::size_t c = 0; c < tr.size(); ++c) {
      const double d = pr[c] - tr[c];
      err += d * d;
      energy += tr[c] * tr[c];
    }
  }
  if (!(energy > 0.0)) throw Error(ErrorKind::metric, "nmse: target energy is zero");
  const double lin = err / energy;
  return {lin, to_db(lin)};
}

Nmse NmseAverage::result() const noexcept {
  const double lin = count_ == 0 ? 0.0 : sum_ / static_cast<double>(count_);
  return {lin, to_db(lin)};
}

}  // namespace fas
