#include "fas/training/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <exception>

#include "fas/baseline/oracles.hpp"
#include "fas/channel/correlation.hpp"
#include "fas/channel/nmse.hpp"
#include "fas/channel/sampling.hpp"
#include "fas/error.hpp"
#include "fas/kv_text.hpp"
#include "fas/model/ssnet.hpp"

namespace fas {
namespace {

struct Condition {
  MaskSpec mask;
  Tensor truth;
  Tensor input;
  double noise_var = 0.0;
};

std::string condition_label(double pct, const std::optional<double>& snr) {
  return "obs=" + kv::format_double(pct) + ";snr=" + format_snr(snr);
}

// Mask, clean sample and input for one (percentage, SNR, sample). Masked
// input rows are zero.
Condition make_condition(const Dataset& data, std::size_t idx, double pct,
                         const std::optional<double>& snr, std::uint64_t seed) {
  Condition c;
  const std::size_t n = data.header().grid.port_count();
  RngStream mrng = RngStream(seed, "eval-mask").child(kv::format_double(pct)).child(idx);
  c.mask = make_mask(n, mask_ratio_for_percent(pct), mrng);
  c.truth = data.sample(idx);
  c.input = Tensor(c.truth.shape());
  for (std::size_t p : c.mask.observed) {
    const auto src = c.truth.row(p);
    std::copy(src.begin(), src.end(), c.input.row(p).begin());
  }
  if (snr) {
    c.noise_var = awgn_variance(c.truth, *snr);
    RngStream nrng = RngStream(seed, "eval-noise").child(condition_label(pct, snr)).child(idx);
    const Tensor noisy = add_awgn(c.truth, snr, nrng);
    for (std::size_t p : c.mask.observed) {
      const auto src = noisy.row(p);
      std::copy(src.begin(), src.end(), c.input.row(p).begin());
    }
  }
  return c;
}

std::vector<std::size_t> limited(const std::vector<std::size_t>& indices, std::size_t max) {
  if (max == 0 || indices.size() <= max) return indices;
  return {indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(max)};
}

void check_spec(const EvalSpec& spec) {
  if (spec.observed_pcts.empty()) throw Error(ErrorKind::config, "no observed percentages given");
  for (double pct : spec.observed_pcts)
    if (!(pct > 0.0 && pct < 100.0)) {
      throw Error(ErrorKind::config,
                  "observed percentage " + kv::format_double(pct) + " must lie in (0, 100)");
    }
  for (const auto& s : spec.snrs)
    if (s && !std::isfinite(*s)) throw Error(ErrorKind::config, "SNR must be finite");
}

template <typename PerSample>
std::vector<MetricsRow> sweep(const Dataset& data, const std::vector<std::size_t>& all,
                              const EvalSpec& spec, const std::string& tag, PerSample&& per) {
  check_spec(spec);
  const std::vector<std::size_t> indices = limited(all, spec.max_samples);
  if (indices.empty()) throw Error(ErrorKind::config, "no samples to evaluate");
  std::vector<MetricsRow> rows;
  for (double pct : spec.observed_pcts) {
    for (const auto& snr : spec.snrs) {
      const std::size_t n = indices.size();
      std::vector<double> values(n, 0.0);
      std::vector<std::exception_ptr> errors(n);
      const auto t0 = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic)
      for (long i = 0; i < static_cast<long>(n); ++i) {
        try {
          const Condition c =
              make_condition(data, indices[static_cast<std::size_t>(i)], pct, snr, spec.seed);
          values[static_cast<std::size_t>(i)] = per(c);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
      const auto t1 = std::chrono::steady_clock::now();
      for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
      NmseAverage avg;
      for (double v : values) avg.add(v);
      MetricsRow row;
      row.model = tag;
      row.grid = grid_tag(data.header());
      row.snr_db = snr;
      row.observed_pct = pct;
      row.nmse_linear = avg.result().linear;
      row.nmse_db = avg.result().db;
      row.samples = n;
      row.ms_per_sample =
          std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(n);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace

std::string format_snr(const std::optional<double>& snr_db) {
  return snr_db ? kv::format_double(*snr_db) : "none";
}

std::string metrics_csv_header() {
  return "model,grid,snr,observed_pct,nmse_linear,nmse_db,samples,ms_per_sample\n";
}

std::string metrics_csv_row(const MetricsRow& r) {
  return r.model + "," + r.grid + "," + format_snr(r.snr_db) + "," +
         kv::format_double(r.observed_pct) + "," + kv::format_double(r.nmse_linear) + "," +
         kv::format_double(r.nmse_db) + "," + std::to_string(r.samples) + "," +
         kv::format_double(r.ms_per_sample) + "\n";
}

std::string grid_tag(const DatasetHeader& h) {
  return std::to_string(h.grid.nx) + "x" + std::to_string(h.grid.ny) + "/" +
         kv::format_double(h.grid.wx_m) + "x" + kv::format_double(h.grid.wy_m) + "m/" +
         std::string(to_string(h.model));
}

void require_compatible(const SSNetConfig& config, const DatasetHeader& header) {
  if (!(config.grid == header.grid) || config.m_antennas != header.m_antennas) {
    throw Error(ErrorKind::config,
                "checkpoint expects a " + std::to_string(config.grid.nx) + "x" +
                    std::to_string(config.grid.ny) + " grid with M=" +
                    std::to_string(config.m_antennas) + ", dataset has " +
                    std::to_string(header.grid.nx) + "x" + std::to_string(header.grid.ny) +
                    " with M=" + std::to_string(header.m_antennas));
  }
}

std::vector<MetricsRow> evaluate(const Extrapolator& model, const std::string& model_tag,
                                 const Dataset& dataset, const std::vector<std::size_t>& indices,
                                 const EvalSpec& spec) {
  return sweep(dataset, indices, spec, model_tag, [&](const Condition& c) {
    const Tensor pred = model(c.input, c.mask, c.noise_var);
    return nmse(pred, c.truth, c.mask.masked).linear;
  });
}

std::vector<MetricsRow> analytic_lmmse_rows(const Dataset& dataset,
                                            const std::vector<std::size_t>& indices,
                                            const EvalSpec& spec) {
  const DatasetHeader& h = dataset.header();
  Tensor sigma = correlation_matrix(h.grid, h.model);
  sigma *= h.delta2;
  return sweep(dataset, indices, spec, "lmmse-analytic", [&](const Condition& c) {
    return analytic_lmmse_nmse(sigma, c.mask.partition(), c.noise_var);
  });
}

Extrapolator ssnet_extrapolator(const SSNetWeights& weights) {
  return [&weights](const Tensor& input, const MaskSpec& mask, double) {
    return forward(input, mask, weights);
  };
}

Extrapolator lmmse_extrapolator(const DatasetHeader& header) {
  Tensor sigma = correlation_matrix(header.grid, header.model);
  sigma *= header.delta2;
  return [sigma = std::move(sigma)](const Tensor& input, const MaskSpec& mask, double noise_var) {
    const MaskPartition part = mask.partition();
    Tensor out = input;
    const LmmseEstimate est =
        lmmse_extrapolate(sigma, part, gather_rows(input, part.observed), noise_var);
    scatter_rows(out, part.masked, est.estimate);
    return out;
  };
}

Extrapolator nearest_neighbor_extrapolator(const PortGrid& grid) {
  return [grid](const Tensor& input, const MaskSpec& mask, double) {
    const MaskPartition part = mask.partition();
    Tensor out = input;
    scatter_rows(out, part.masked,
                 nearest_neighbor_extrapolate(grid, part, gather_rows(input, part.observed)));
    return out;
  };
}

Extrapolator zero_extrapolator() {
  return [](const Tensor& input, const MaskSpec&, double) { return Tensor(input.shape()); };
}

std::vector<ShiftRow> compare_rows(const std::vector<MetricsRow>& reference,
                                   const std::vector<MetricsRow>& shifted) {
  std::vector<ShiftRow> out;
  for (const MetricsRow& s : shifted) {
    for (const MetricsRow& r : reference) {
      if (r.observed_pct != s.observed_pct || r.snr_db != s.snr_db) continue;
      ShiftRow row;
      row.observed_pct = s.observed_pct;
      row.snr_db = s.snr_db;
      row.reference_db = r.nmse_db;
      row.shifted_db = s.nmse_db;
      row.delta_db = s.nmse_db - r.nmse_db;
      out.push_back(row);
      break;
    }
  }
  return out;
}

std::string shift_csv_header(const std::string& reference_name, const std::string& shifted_name) {
  return "observed_pct,snr," + reference_name + "_db," + shifted_name + "_db,delta_db\n";
}

std::string shift_csv_row(const ShiftRow& r) {
  return kv::format_double(r.observed_pct) + "," + format_snr(r.snr_db) + "," +
         kv::format_double(r.reference_db) + "," + kv::format_double(r.shifted_db) + "," +
         kv::format_double(r.delta_db) + "\n";
}

ZeroShotReport zero_shot_eval(const SSNetWeights& weights, const Dataset& reference,
                              const std::vector<std::size_t>& reference_indices,
                              const Dataset& shifted, const EvalSpec& spec) {
  require_compatible(weights.config(), reference.header());
  require_compatible(weights.config(), shifted.header());
  ZeroShotReport rep;
  const Extrapolator model = ssnet_extrapolator(weights);
  rep.in_distribution = evaluate(model, "ssnet", reference, reference_indices, spec);
  std::vector<std::size_t> all(shifted.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  rep.shifted = evaluate(model, "ssnet", shifted, all, spec);
  rep.degradation = compare_rows(rep.in_distribution, rep.shifted);
  return rep;
}

}  // namespace fas
