#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fas/channel/dataset.hpp"
#include "fas/training/evaluate.hpp"
#include "fas/training/train.hpp"

namespace fas {

/// Everything a command needs, read from an INI-like document:
///
///   [grid]     nx, ny, wx_m, wy_m, lambda_m
///   [channel]  model (clarke|bessel), m_antennas, delta2, count, seed, dtype (f32|f64)
///   [model]    d_model, d_dec, depth_enc, depth_dec, heads, experts,
///              active_experts, dropout, norm_eps, moe_residual,
///              renormalize_topk, use_moe
///   [train]    split, epochs, batch_size, base_lr, warmup_epochs, beta1, beta2,
///              weight_decay, mask_ratio, seed, train_snr_db (number|none),
///              heldout_limit
///   [eval]     observed (comma list of percentages), snr (comma list, "none"
///              for noise-free), seed, max_samples
///
/// Keys left out keep the values of the preset the document is applied on
/// (the built-in defaults unless a preset is named). Unknown sections or keys
/// are rejected with ErrorKind::config.
struct RunConfig {
  DatasetHeader channel;  // grid, model, M, δ², count, seed, dtype
  SSNetConfig model;      // grid and M mirror `channel`
  TrainPlan train;        // model mirrors `model`
  EvalSpec eval;

  /// Copies the shared grid and antenna count into model and train.
  void sync();
  void validate() const;

  std::string serialize() const;
  static RunConfig parse(std::string_view text, const RunConfig& base);
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  /// "tiny", "desk" or "full"; ErrorKind::config otherwise.
  static RunConfig preset(std::string_view name);
  static std::vector<std::string> preset_names();
};

/// Loads a config argument that is either a preset name or a file path.
RunConfig resolve_config(const std::string& name_or_path);

std::vector<double> parse_number_list(std::string_view text, std::string_view what);
std::vector<std::optional<double>> parse_snr_list(std::string_view text);

}  // namespace fas
