#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fas/channel/dataset.hpp"
#include "fas/model/mask.hpp"
#include "fas/model/weights.hpp"

namespace fas {

struct MetricsRow {
  std::string model;
  std::string grid;
  std::optional<double> snr_db;  // nullopt = noise-free
  double observed_pct = 0.0;
  double nmse_linear = 0.0;
  double nmse_db = 0.0;
  std::size_t samples = 0;
  double ms_per_sample = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);
std::string format_snr(const std::optional<double>& snr_db);

struct EvalSpec {
  std::vector<double> observed_pcts{5, 10, 15, 20, 25, 50};
  std::vector<std::optional<double>> snrs{std::nullopt};
  std::uint64_t seed = 7;
  std::size_t max_samples = 0;  // 0 = all given indices
};

/// Maps the noisy full-grid input (only observed rows are meaningful), the
/// mask and the injected complex noise variance to a full-grid prediction.
using Extrapolator =
    std::function<Tensor(const Tensor& input, const MaskSpec& mask, double noise_var)>;

/// For each (percentage, SNR): mask per sample from (seed, "eval-mask"),
/// AWGN on the observed rows from (seed, "eval-noise"), run the
/// extrapolator, NMSE on the masked ports against the clean sample, averaged
/// linearly. Masks and noise depend only on the seed, the percentage, the SNR
/// and the sample index, so every model sees identical conditions.
std::vector<MetricsRow> evaluate(const Extrapolator& model, const std::string& model_tag,
                                 const Dataset& dataset, const std::vector<std::size_t>& indices,
                                 const EvalSpec& spec);

/// Averaged analytic LMMSE NMSE for exactly the masks and noise variances
/// evaluate() would use.
std::vector<MetricsRow> analytic_lmmse_rows(const Dataset& dataset,
                                            const std::vector<std::size_t>& indices,
                                            const EvalSpec& spec);

Extrapolator ssnet_extrapolator(const SSNetWeights& weights);
/// LMMSE with the dataset's own covariance δ²Σ and the matched noise variance.
Extrapolator lmmse_extrapolator(const DatasetHeader& header);
Extrapolator nearest_neighbor_extrapolator(const PortGrid& grid);
Extrapolator zero_extrapolator();

std::string grid_tag(const DatasetHeader& header);

/// Throws ErrorKind::config when the checkpoint's grid or antenna count does
/// not match the dataset.
void require_compatible(const SSNetConfig& config, const DatasetHeader& header);

/// One row per (percentage, SNR): in-distribution vs. shifted NMSE.
struct ShiftRow {
  double observed_pct = 0.0;
  std::optional<double> snr_db;
  double reference_db = 0.0;
  double shifted_db = 0.0;
  double delta_db = 0.0;  // shifted − reference
};

std::vector<ShiftRow> compare_rows(const std::vector<MetricsRow>& reference,
                                   const std::vector<MetricsRow>& shifted);
std::string shift_csv_header(const std::string& reference_name, const std::string& shifted_name);
std::string shift_csv_row(const ShiftRow& row);

struct ZeroShotReport {
  std::vector<MetricsRow> in_distribution;
  std::vector<MetricsRow> shifted;
  std::vector<ShiftRow> degradation;
};

/// Evaluates the weights without updates on the reference (training
/// distribution) set and on the shifted set.
ZeroShotReport zero_shot_eval(const SSNetWeights& weights, const Dataset& reference,
                              const std::vector<std::size_t>& reference_indices,
                              const Dataset& shifted, const EvalSpec& spec);

}  // namespace fas
