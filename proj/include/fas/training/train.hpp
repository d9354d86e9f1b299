#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "fas/channel/dataset.hpp"
#include "fas/model/config.hpp"
#include "fas/model/weights.hpp"

namespace fas {

/// Train/test index partition.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Shuffles [0, count) with stream (seed, "split") and cuts it at
/// round(count·fraction). Throws ErrorKind::config unless 0 < fraction < 1
/// and both sides are non-empty.
Split split_dataset(std::size_t count, double fraction, std::uint64_t seed);

struct TrainPlan {
  std::filesystem::path dataset_path;
  double split = 0.8;
  std::size_t epochs = 400;
  std::size_t batch_size = 64;
  double base_lr = 1.5e-4;
  std::size_t warmup_epochs = 40;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double weight_decay = 0.05;
  double mask_ratio = 0.75;  // M_r used for training masks
  std::uint64_t seed = 1;
  std::optional<double> train_snr_db;  // AWGN on the observed input during training
  std::size_t heldout_limit = 0;       // held-out samples scored per epoch, 0 = all
  SSNetConfig model;
  std::filesystem::path out_dir = "run";
  std::optional<std::filesystem::path> resume_from;

  /// Throws ErrorKind::config on inconsistent fields.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double lr = 0.0;        // scheduled rate of the epoch's first step
  double train_loss = 0.0;
  double heldout_nmse = 0.0;  // linear
  double heldout_nmse_db = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> curve;  // epochs run by this call
  std::size_t best_epoch = 0;      // 0 means the initialization
  double best_heldout_db = 0.0;
  std::int64_t steps = 0;          // optimizer steps after this call
  std::filesystem::path best_checkpoint;
  std::filesystem::path final_checkpoint;
  std::filesystem::path loss_csv;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs the plan: fresh masks per (epoch, sample), AdamW with the warmup
/// cosine schedule per step, held-out masked NMSE each epoch. Writes
/// out_dir/loss.csv, out_dir/best.ssnw and out_dir/final.ssnw. final.ssnw is
/// rewritten after every epoch with optimizer state, so an interrupted run
/// resumes from it via resume_from. Throws ErrorKind::numeric when the
/// loss turns non-finite.
TrainResult train(const TrainPlan& plan, const Dataset& dataset,
                  const EpochCallback& on_epoch = {});
/// Same, reading plan.dataset_path.
TrainResult train(const TrainPlan& plan, const EpochCallback& on_epoch = {});

/// Scheduled rate for a 0-based optimizer step of the plan.
double plan_lr(const TrainPlan& plan, std::size_t steps_per_epoch, std::int64_t step);
std::size_t steps_per_epoch(const TrainPlan& plan, std::size_t train_count);

/// CSV text of a loss curve, header line included.
std::string loss_csv_header();
std::string loss_csv_row(const EpochRecord& r);

}  // namespace fas
