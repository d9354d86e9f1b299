#include "fas/training/train.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>

#include "fas/channel/nmse.hpp"
#include "fas/channel/sampling.hpp"
#include "fas/error.hpp"
#include "fas/kv_text.hpp"
#include "fas/model/checkpoint.hpp"
#include "fas/model/mask.hpp"
#include "fas/model/ssnet.hpp"

namespace fas {
namespace {

// A batch is cut into this many contiguous slices, each accumulating into its
// own gradient set. The slicing does not depend on the thread count, so the
// summed gradient is bit-identical however many threads run.
constexpr std::size_t kGradSlices = 8;

struct SliceWork {
  GradSet grads;
  std::exception_ptr error;
};

double heldout_nmse(const SSNetWeights& weights, const Dataset& data,
                    const std::vector<std::size_t>& indices, const TrainPlan& plan) {
  const RngStream root(plan.seed, "heldout");
  const std::size_t n = indices.size();
  std::vector<double> per(n, 0.0);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    try {
      const std::size_t idx = indices[static_cast<std::size_t>(i)];
      RngStream rng = root.child(idx);
      const MaskSpec mask = make_mask(weights.config().grid.port_count(), plan.mask_ratio, rng);
      const Tensor truth = data.sample(idx);
      const Tensor pred = forward(truth, mask, weights);
      per[static_cast<std::size_t>(i)] = nmse(pred, truth, mask.masked).linear;
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  NmseAverage avg;
  for (double v : per) avg.add(v);
  return avg.result().linear;
}

void write_text(const std::filesystem::path& path, const std::string& text, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorKind::io, "write to '" + path.string() + "' failed");
}

}  // namespace

Split split_dataset(std::size_t count, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::config, "split fraction must lie in (0, 1)");
  }
  const auto n_train =
      static_cast<std::size_t>(std::llround(static_cast<double>(count) * fraction));
  if (n_train == 0 || n_train >= count) {
    throw Error(ErrorKind::config, "split of " + std::to_string(count) + " samples at " +
                                       kv::format_double(fraction) + " leaves an empty side");
  }
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  RngStream rng(seed, "split");
  for (std::size_t i = count - 1; i > 0; --i) {
    std::swap(order[i], order[static_cast<std::size_t>(rng.below(i + 1))]);
  }
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

void TrainPlan::validate() const {
  model.validate();
  auto fail = [](const std::string& m) { throw Error(ErrorKind::config, "train plan: " + m); };
  if (!(split > 0.0 && split < 1.0)) fail("split must lie in (0, 1)");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (epochs > 0 && warmup_epochs >= epochs) fail("warmup_epochs must be < epochs");
  if (!(base_lr > 0.0)) fail("base_lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) fail("betas must be in [0, 1)");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (!(mask_ratio > 0.0 && mask_ratio < 1.0)) fail("mask_ratio must lie in (0, 1)");
  if (train_snr_db && !std::isfinite(*train_snr_db)) fail("train_snr_db must be finite");
}

std::size_t steps_per_epoch(const TrainPlan& plan, std::size_t train_count) {
  return (train_count + plan.batch_size - 1) / plan.batch_size;
}

double plan_lr(const TrainPlan& plan, std::size_t per_epoch, std::int64_t step) {
  const auto total = static_cast<std::int64_t>(plan.epochs * per_epoch);
  const auto warmup = static_cast<std::int64_t>(plan.warmup_epochs * per_epoch);
  return lr_schedule(step, total, warmup, plan.base_lr);
}

std::string loss_csv_header() { return "epoch,lr,train_loss,heldout_nmse_linear,heldout_nmse_db\n"; }

std::string loss_csv_row(const EpochRecord& r) {
  return std::to_string(r.epoch) + "," + kv::format_double(r.lr) + "," +
         kv::format_double(r.train_loss) + "," + kv::format_double(r.heldout_nmse) + "," +
         kv::format_double(r.heldout_nmse_db) + "\n";
}

TrainResult train(const TrainPlan& plan, const EpochCallback& on_epoch) {
  return train(plan, read_dataset(plan.dataset_path), on_epoch);
}

TrainResult train(const TrainPlan& plan, const Dataset& dataset, const EpochCallback& on_epoch) {
  plan.validate();
  const DatasetHeader& hdr = dataset.header();
  if (!(hdr.grid == plan.model.grid) || hdr.m_antennas != plan.model.m_antennas) {
    throw Error(ErrorKind::config, "dataset grid/antennas do not match the model config");
  }
  const Split split = split_dataset(dataset.size(), plan.split, plan.seed);
  std::vector<std::size_t> heldout = split.test;
  if (plan.heldout_limit > 0 && heldout.size() > plan.heldout_limit) {
    heldout.resize(plan.heldout_limit);
  }

  std::filesystem::create_directories(plan.out_dir);
  TrainResult result;
  result.best_checkpoint = plan.out_dir / "best.ssnw";
  result.final_checkpoint = plan.out_dir / "final.ssnw";
  result.loss_csv = plan.out_dir / "loss.csv";

  std::size_t start_epoch = 0;
  Checkpoint state{SSNetWeights::initialize(plan.model, plan.seed), true, {}};
  if (plan.resume_from) {
    state = load_checkpoint(*plan.resume_from);
    if (!(state.weights.config() == plan.model)) {
      throw Error(ErrorKind::config, "resume checkpoint was trained with a different model config");
    }
    if (!state.with_optimizer) {
      throw Error(ErrorKind::config, "resume checkpoint carries no optimizer state");
    }
    const auto epoch = state.meta_value("epoch");
    const auto best_epoch = state.meta_value("best_epoch");
    const auto best_db = state.meta_value("best_heldout_db");
    if (!epoch || !best_epoch || !best_db) {
      throw Error(ErrorKind::config, "resume checkpoint lacks training progress metadata");
    }
    start_epoch = static_cast<std::size_t>(kv::parse_int(*epoch, "epoch"));
    result.best_epoch = static_cast<std::size_t>(kv::parse_int(*best_epoch, "best_epoch"));
    result.best_heldout_db = kv::parse_double(*best_db, "best_heldout_db");
    if (start_epoch > plan.epochs) {
      throw Error(ErrorKind::config, "resume checkpoint is past the planned epoch count");
    }
  }
  SSNetWeights& weights = state.weights;
  auto& params = weights.params();

  auto save = [&](const std::filesystem::path& path, std::size_t epoch, bool with_optimizer) {
    Checkpoint ck{weights, with_optimizer,
                  {{"epoch", std::to_string(epoch)},
                   {"best_epoch", std::to_string(result.best_epoch)},
                   {"best_heldout_db", kv::format_double(result.best_heldout_db)},
                   {"seed", std::to_string(plan.seed)},
                   {"mask_ratio", kv::format_double(plan.mask_ratio)}}};
    save_checkpoint(ck, path);
  };

  if (start_epoch == 0) {
    result.best_epoch = 0;
    result.best_heldout_db = to_db(heldout_nmse(weights, dataset, heldout, plan));
    save(result.best_checkpoint, 0, false);
    write_text(result.loss_csv, loss_csv_header(), false);
  }

  const std::size_t per_epoch = steps_per_epoch(plan, split.train.size());
  const std::size_t n_ports = plan.model.grid.port_count();
  std::int64_t step = static_cast<std::int64_t>(start_epoch * per_epoch);
  AdamWConfig adam{plan.base_lr, plan.beta1, plan.beta2, 1e-8, plan.weight_decay};

  std::vector<SliceWork> work(std::min(kGradSlices, plan.batch_size));
  for (auto& w : work) w.grads = make_grad_set(weights);
  std::vector<double> losses(plan.batch_size);

  for (std::size_t epoch = start_epoch; epoch < plan.epochs; ++epoch) {
    std::vector<std::size_t> order = split.train;
    RngStream shuffle = RngStream(plan.seed, "shuffle").child(epoch);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<std::size_t>(shuffle.below(i + 1))]);
    }
    const RngStream mask_root = RngStream(plan.seed, "mask").child(epoch);
    const RngStream drop_root = RngStream(plan.seed, "dropout").child(epoch);
    const RngStream noise_root = RngStream(plan.seed, "train-noise").child(epoch);

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.lr = plan_lr(plan, per_epoch, step);
    double loss_sum = 0.0;

    for (std::size_t b0 = 0; b0 < order.size(); b0 += plan.batch_size) {
      const std::size_t bsize = std::min(plan.batch_size, order.size() - b0);
      const double scale = 1.0 / static_cast<double>(bsize);
      const std::size_t slices = std::min(work.size(), bsize);
#pragma omp parallel for schedule(dynamic)
      for (long j = 0; j < static_cast<long>(slices); ++j) {
        SliceWork& w = work[static_cast<std::size_t>(j)];
        w.error = nullptr;
        zero(w.grads);
        const std::size_t lo = static_cast<std::size_t>(j) * bsize / slices;
        const std::size_t hi = (static_cast<std::size_t>(j) + 1) * bsize / slices;
        try {
          for (std::size_t s = lo; s < hi; ++s) {
            const std::size_t idx = order[b0 + s];
            RngStream mrng = mask_root.child(idx);
            const MaskSpec mask = make_mask(n_ports, plan.mask_ratio, mrng);
            const Tensor truth = dataset.sample(idx);
            Tensor input = truth;
            if (plan.train_snr_db) {
              RngStream nrng = noise_root.child(idx);
              input = add_awgn(truth, plan.train_snr_db, nrng);
            }
            RngStream drng = drop_root.child(idx);
            RunOptions opts;
            opts.train = true;
            opts.dropout_rng = &drng;
            ForwardTrace trace;
            const Tensor pred = forward(input, mask, weights, opts, &trace);
            Tensor d_pred;
            losses[s] = masked_loss(pred, truth, mask, &d_pred, scale);
            backward(trace, d_pred, weights, opts, w.grads);
          }
        } catch (...) {
          w.error = std::current_exception();
        }
      }
      for (std::size_t j = 0; j < slices; ++j)
        if (work[j].error) std::rethrow_exception(work[j].error);

      double batch_loss = 0.0;
      for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& g = params[k].grad;
        g = work[0].grads[k];
        for (std::size_t j = 1; j < slices; ++j) g += work[j].grads[k];
      }
      for (std::size_t s = 0; s < bsize; ++s) batch_loss += losses[s];
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorKind::numeric, "non-finite loss at epoch " + std::to_string(epoch + 1) +
                                            ", batch " + std::to_string(b0 / plan.batch_size + 1));
      }
      loss_sum += batch_loss;
      adam.lr = plan_lr(plan, per_epoch, step);
      try {
        adamw_step(params, adam);
      } catch (const Error& e) {
        throw Error(e.kind(), std::string(e.what()) + " at epoch " + std::to_string(epoch + 1) +
                                  ", batch " + std::to_string(b0 / plan.batch_size + 1));
      }
      ++step;
    }

    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.heldout_nmse = heldout_nmse(weights, dataset, heldout, plan);
    rec.heldout_nmse_db = to_db(rec.heldout_nmse);
    if (rec.heldout_nmse_db < result.best_heldout_db) {
      result.best_heldout_db = rec.heldout_nmse_db;
      result.best_epoch = rec.epoch;
      save(result.best_checkpoint, rec.epoch, false);
    }
    write_text(result.loss_csv, loss_csv_row(rec), true);
    save(result.final_checkpoint, rec.epoch, true);
    result.curve.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }

  result.steps = step;
  if (start_epoch == plan.epochs) save(result.final_checkpoint, plan.epochs, true);
  return result;
}

}  // namespace fas
