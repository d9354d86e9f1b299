#pragma once

#include <vector>

#include "fas/training/evaluate.hpp"
#include "fas/training/train.hpp"

namespace fas {

struct AblationResult {
  TrainResult moe;
  TrainResult no_moe;
  std::vector<MetricsRow> moe_rows;
  std::vector<MetricsRow> no_moe_rows;
  std::vector<ShiftRow> comparison;  // reference = MoE, shifted = no-MoE
  std::size_t moe_params = 0;
  std::size_t no_moe_params = 0;
  std::size_t expert_params = 0;     // all experts of one MoE stage
  std::size_t stage_ffn_params = 0;  // the replacement FFN of one block
};

/// Trains the plan twice, with the MoE stage and with it replaced by one
/// FFN of the same hidden width, using identical seeds, then evaluates both
/// best checkpoints on the held-out split. Writes out_dir/moe, out_dir/no_moe,
/// out_dir/metrics.csv and out_dir/ablation.csv.
AblationResult ablate(const TrainPlan& plan, const Dataset& dataset, const EvalSpec& spec,
                      const EpochCallback& on_epoch = {});

}  // namespace fas
