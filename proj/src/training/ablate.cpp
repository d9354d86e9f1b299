#include "fas/training/ablate.hpp"

#include <fstream>

#include "fas/error.hpp"
#include "fas/model/checkpoint.hpp"

namespace fas {
namespace {

std::size_t block_params(const SSNetWeights& w, const std::vector<MlpIds>& mlps) {
  std::size_t n = 0;
  for (const MlpIds& m : mlps) n += w[m.w1].size() + w[m.w2].size();
  return n;
}

}  // namespace

AblationResult ablate(const TrainPlan& plan, const Dataset& dataset, const EvalSpec& spec,
                      const EpochCallback& on_epoch) {
  AblationResult res;
  TrainPlan with = plan;
  with.model.use_moe = true;
  with.out_dir = plan.out_dir / "moe";
  with.resume_from.reset();
  TrainPlan without = with;
  without.model.use_moe = false;
  without.out_dir = plan.out_dir / "no_moe";

  res.moe = train(with, dataset, on_epoch);
  res.no_moe = train(without, dataset, on_epoch);

  const Checkpoint a = load_checkpoint(res.moe.best_checkpoint);
  const Checkpoint b = load_checkpoint(res.no_moe.best_checkpoint);
  res.moe_params = a.weights.scalar_count();
  res.no_moe_params = b.weights.scalar_count();
  if (!a.weights.encoder.empty()) {
    res.expert_params = block_params(a.weights, a.weights.encoder[0].moe.experts);
    res.stage_ffn_params = block_params(b.weights, {b.weights.encoder[0].stage_ffn});
  }

  const Split split = split_dataset(dataset.size(), plan.split, plan.seed);
  res.moe_rows = evaluate(ssnet_extrapolator(a.weights), "ssnet", dataset, split.test, spec);
  res.no_moe_rows =
      evaluate(ssnet_extrapolator(b.weights), "ssnet-no-moe", dataset, split.test, spec);
  res.comparison = compare_rows(res.moe_rows, res.no_moe_rows);

  std::ofstream metrics(plan.out_dir / "metrics.csv", std::ios::trunc);
  std::ofstream cmp(plan.out_dir / "ablation.csv", std::ios::trunc);
  if (!metrics || !cmp) {
    throw Error(ErrorKind::io, "cannot write ablation CSVs in '" + plan.out_dir.string() + "'");
  }
  metrics << metrics_csv_header();
  for (const auto& r : res.moe_rows) metrics << metrics_csv_row(r);
  for (const auto& r : res.no_moe_rows) metrics << metrics_csv_row(r);
  cmp << shift_csv_header("moe", "no_moe");
  for (const auto& r : res.comparison) cmp << shift_csv_row(r);
  if (!metrics || !cmp) throw Error(ErrorKind::io, "ablation CSV write failed");
  return res;
}

}  // namespace fas
