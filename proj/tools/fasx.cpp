#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "fas/baseline/oracles.hpp"
#include "fas/channel/correlation.hpp"
#include "fas/channel/dataset.hpp"
#include "fas/channel/sampling.hpp"
#include "fas/cli/run_config.hpp"
#include "fas/error.hpp"
#include "fas/kv_text.hpp"
#include "fas/model/checkpoint.hpp"
#include "fas/model/ssnet.hpp"
#include "fas/training/ablate.hpp"
#include "fas/training/evaluate.hpp"
#include "fas/training/train.hpp"

namespace {

using namespace fas;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return kExitIo;
    case ErrorKind::metric:
    case ErrorKind::numeric: return kExitNumeric;
    default: return kExitConfig;
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

std::string rows_csv(const std::vector<MetricsRow>& rows) {
  std::string s = metrics_csv_header();
  for (const auto& r : rows) s += metrics_csv_row(r);
  return s;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Keeps the warmup share of the schedule when the epoch count changes.
void override_epochs(TrainPlan& plan, long long epochs) {
  if (epochs < 0) throw Error(ErrorKind::config, "--epochs must be >= 0");
  const auto n = static_cast<std::size_t>(epochs);
  if (plan.epochs > 0) plan.warmup_epochs = plan.warmup_epochs * n / plan.epochs;
  plan.epochs = n;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string config = "desk";
  std::string out;
  std::optional<long long> count;
  std::string model;
  std::optional<unsigned long long> seed;
};

int run_gen(const GenArgs& a) {
  RunConfig cfg = resolve_config(a.config);
  DatasetHeader h = cfg.channel;
  if (a.count) {
    if (*a.count < 1) throw Error(ErrorKind::config, "--count must be >= 1");
    h.count = static_cast<std::size_t>(*a.count);
  }
  if (!a.model.empty()) {
    const auto m = parse_correlation_model(a.model);
    if (!m) throw Error(ErrorKind::config, "--model must be clarke or bessel");
    h.model = *m;
  }
  if (a.seed) h.seed = *a.seed;
  if (h.count < 1) throw Error(ErrorKind::config, "count must be >= 1");
  generate_dataset_file(h, a.out);
  std::cout << "wrote " << a.out << "\n" << kv::serialize(h.to_entries());
  std::cout << "sample shape " << h.grid.port_count() << "x" << 2 * h.m_antennas << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config = "desk";
  std::string data;
  std::string out_dir = "run";
  std::string resume;
  std::optional<long long> epochs;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  RunConfig cfg = resolve_config(a.config);
  TrainPlan plan = cfg.train;
  plan.dataset_path = a.data;
  plan.out_dir = a.out_dir;
  if (a.epochs) override_epochs(plan, *a.epochs);
  if (!a.resume.empty()) plan.resume_from = a.resume;
  const Dataset data = read_dataset(plan.dataset_path);
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult r = train(plan, data, [&](const EpochRecord& e) {
    if (a.quiet) return;
    std::cout << "epoch " << e.epoch << "/" << plan.epochs << "  lr " << kv::format_double(e.lr)
              << "  loss " << fixed(e.train_loss, 5) << "  held-out " << fixed(e.heldout_nmse_db)
              << " dB" << std::endl;
  });
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "steps " << r.steps << ", best held-out " << fixed(r.best_heldout_db)
            << " dB at epoch " << r.best_epoch << ", " << fixed(secs, 1) << " s\n"
            << "checkpoints " << r.best_checkpoint.string() << " " << r.final_checkpoint.string()
            << "\nloss curve " << r.loss_csv.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string observed = "5,10,15,20,25,50";
  std::string snr = "none";
  unsigned long long seed = 7;
  std::string out;
  std::string subset = "all";
  double split = 0.8;
  long long max_samples = 0;
  bool cross_check = false;
  std::string reference;  // zero-shot: in-distribution dataset
};

EvalSpec make_spec(const std::string& observed, const std::string& snr, std::uint64_t seed,
                   long long max_samples) {
  EvalSpec spec;
  spec.observed_pcts = parse_number_list(observed, "observed");
  spec.snrs = parse_snr_list(snr);
  spec.seed = seed;
  if (max_samples < 0) throw Error(ErrorKind::config, "--max-samples must be >= 0");
  spec.max_samples = static_cast<std::size_t>(max_samples);
  for (double p : spec.observed_pcts)
    if (!(p > 0.0 && p < 100.0)) {
      throw Error(ErrorKind::config,
                  "--observed " + kv::format_double(p) + " must lie in (0, 100)");
    }
  return spec;
}

std::vector<std::size_t> pick_subset(const std::string& subset, const Dataset& data,
                                     double split, const Checkpoint& ck) {
  if (subset == "all") return all_indices(data.size());
  if (subset == "heldout") {
    const auto seed = ck.meta_value("seed");
    if (!seed) throw Error(ErrorKind::config, "checkpoint has no training seed for --subset heldout");
    return split_dataset(data.size(), split, static_cast<std::uint64_t>(kv::parse_int(*seed, "seed")))
        .test;
  }
  throw Error(ErrorKind::config, "--subset must be all or heldout");
}

void print_rows(const std::vector<MetricsRow>& rows) {
  for (const auto& r : rows) {
    std::cout << r.model << "  observed " << kv::format_double(r.observed_pct) << "%  snr "
              << format_snr(r.snr_db) << "  nmse " << fixed(r.nmse_db) << " dB  ("
              << r.samples << " samples, " << fixed(r.ms_per_sample, 3) << " ms/sample)\n";
  }
}

int run_eval(const EvalArgs& a) {
  const EvalSpec spec = make_spec(a.observed, a.snr, a.seed, a.max_samples);
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const Dataset data = read_dataset(a.data);
  require_compatible(ck.weights.config(), data.header());

  if (!a.reference.empty()) {
    const Dataset ref = read_dataset(a.reference);
    const ZeroShotReport rep =
        zero_shot_eval(ck.weights, ref, pick_subset(a.subset, ref, a.split, ck), data, spec);
    print_rows(rep.in_distribution);
    print_rows(rep.shifted);
    std::string csv = shift_csv_header("reference", "shifted");
    for (const auto& d : rep.degradation) {
      csv += shift_csv_row(d);
      std::cout << "degradation observed " << kv::format_double(d.observed_pct) << "% snr "
                << format_snr(d.snr_db) << ": " << fixed(d.delta_db) << " dB\n";
    }
    if (!a.out.empty()) {
      write_file(a.out, rows_csv(rep.shifted));
      write_file(a.out + ".degradation.csv", csv);
    }
    return kExitOk;
  }

  const auto indices = pick_subset(a.subset, data, a.split, ck);
  std::vector<MetricsRow> rows =
      evaluate(ssnet_extrapolator(ck.weights), "ssnet", data, indices, spec);
  if (a.cross_check) {
    const auto mc = evaluate(lmmse_extrapolator(data.header()), "lmmse", data, indices, spec);
    const auto an = analytic_lmmse_rows(data, indices, spec);
    for (std::size_t i = 0; i < mc.size(); ++i) {
      std::cout << "lmmse cross-check observed " << kv::format_double(mc[i].observed_pct)
                << "% snr " << format_snr(mc[i].snr_db) << ": harness " << fixed(mc[i].nmse_db, 3)
                << " dB, analytic " << fixed(an[i].nmse_db, 3) << " dB, delta "
                << fixed(mc[i].nmse_db - an[i].nmse_db, 3) << " dB\n";
    }
    rows.insert(rows.end(), mc.begin(), mc.end());
    rows.insert(rows.end(), an.begin(), an.end());
  }
  print_rows(rows);
  if (!a.out.empty()) write_file(a.out, rows_csv(rows));
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
  std::string data;
  std::string observed = "25";
  std::string snr = "none";
  std::string method = "lmmse";
  unsigned long long seed = 7;
  long long max_samples = 0;
  std::string out;
};

int run_oracle(const OracleArgs& a) {
  const EvalSpec spec = make_spec(a.observed, a.snr, a.seed, a.max_samples);
  const Dataset data = read_dataset(a.data);
  const auto indices = all_indices(data.size());
  std::vector<MetricsRow> rows;
  if (a.method == "lmmse") {
    rows = evaluate(lmmse_extrapolator(data.header()), "lmmse", data, indices, spec);
  } else if (a.method == "nn") {
    rows = evaluate(nearest_neighbor_extrapolator(data.header().grid), "nearest-neighbor", data,
                    indices, spec);
  } else {
    throw Error(ErrorKind::config, "--method must be lmmse or nn");
  }
  const auto analytic = analytic_lmmse_rows(data, indices, spec);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::cout << rows[i].model << "  observed " << kv::format_double(rows[i].observed_pct)
              << "%  snr " << format_snr(rows[i].snr_db) << "  nmse " << fixed(rows[i].nmse_db, 3)
              << " dB  analytic-lmmse " << fixed(analytic[i].nmse_db, 3) << " dB\n";
  }
  if (!a.out.empty()) {
    std::vector<MetricsRow> both = rows;
    both.insert(both.end(), analytic.begin(), analytic.end());
    write_file(a.out, rows_csv(both));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GradArgs {
  std::string config = "tiny";
  bool mutate = false;
  double eps = 1e-5;
  double tolerance = 1e-4;
  unsigned long long seed = 3;
  double mask_ratio = 0.5;
  bool moe_residual = false;
  bool renormalize = false;
  long long max_coords = 0;
};

int run_gradcheck(const GradArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = resolve_config(a.config);
  SSNetConfig mc = cfg.model;
  mc.dropout = 0.0;
  mc.moe_residual = mc.moe_residual || a.moe_residual;
  mc.renormalize_topk = mc.renormalize_topk || a.renormalize;
  SSNetWeights w = SSNetWeights::initialize(mc, a.seed);
  const ChannelFactors f = factorize(correlation_matrix(mc.grid, cfg.channel.model), 1.0);
  RngStream srng(a.seed, "gradcheck-sample");
  const Tensor sample = sample_channel(f, mc.m_antennas, srng);
  RngStream mrng(a.seed, "gradcheck-mask");
  const MaskSpec mask = make_mask(mc.grid.port_count(), a.mask_ratio, mrng);

  GradCheckOptions opt;
  opt.eps = a.eps;
  opt.tolerance = a.tolerance;
  opt.seed = a.seed;
  if (a.max_coords < 0) throw Error(ErrorKind::config, "--max-coords must be >= 0");
  opt.max_coords_per_param = static_cast<std::size_t>(a.max_coords);
  const GradCheckReport rep = check_gradients(w, sample, mask, opt, !a.mutate);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "parameters " << w.params().size() << " (" << w.scalar_count() << " scalars), "
            << rep.coords_checked << " coordinates checked in " << fixed(secs, 1) << " s\n"
            << "max relative error " << kv::format_double(rep.max_rel_error) << " at "
            << rep.worst_param << "[" << rep.worst_index << "] analytic "
            << kv::format_double(rep.worst_analytic) << " numeric "
            << kv::format_double(rep.worst_numeric) << "\n"
            << (rep.passed() ? "PASS" : "FAIL") << " (tolerance "
            << kv::format_double(rep.tolerance) << ")\n";
  return rep.passed() ? kExitOk : kExitNumeric;
}

// ---------------------------------------------------------------------------

struct AblateArgs {
  std::string config = "desk";
  std::string data;
  std::string out_dir = "ablation";
  std::optional<long long> epochs;
};

int run_ablate(const AblateArgs& a) {
  RunConfig cfg = resolve_config(a.config);
  TrainPlan plan = cfg.train;
  plan.dataset_path = a.data;
  plan.out_dir = a.out_dir;
  if (a.epochs) override_epochs(plan, *a.epochs);
  const Dataset data = read_dataset(a.data);
  const AblationResult r = ablate(plan, data, cfg.eval);
  std::cout << "parameters: moe " << r.moe_params << ", no-moe " << r.no_moe_params
            << "; experts per block " << r.expert_params << " vs ffn " << r.stage_ffn_params
            << "\n";
  for (const auto& c : r.comparison) {
    std::cout << "observed " << kv::format_double(c.observed_pct) << "% snr "
              << format_snr(c.snr_db) << ": moe " << fixed(c.reference_db) << " dB, no-moe "
              << fixed(c.shifted_db) << " dB, delta " << fixed(c.delta_db) << " dB\n";
  }
  std::cout << "wrote " << (plan.out_dir / "ablation.csv").string() << "\n";
  return kExitOk;
}

int run_show_config(const std::string& name) {
  std::cout << resolve_config(name).serialize();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid-antenna channel extrapolation toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-data", "Generate a channel dataset file");
  c_gen->add_option("--config", gen.config, "Preset name or config file")->capture_default_str();
  c_gen->add_option("--out", gen.out, "Output dataset path")->required();
  c_gen->add_option("--count", gen.count, "Number of samples (overrides config)");
  c_gen->add_option("--model", gen.model, "Correlation model: clarke or bessel");
  c_gen->add_option("--seed", gen.seed, "Dataset seed (overrides config)");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train SSNet on a dataset");
  c_train->add_option("--config", tr.config, "Preset name or config file")->capture_default_str();
  c_train->add_option("--data", tr.data, "Dataset path")->required();
  c_train->add_option("--out-dir", tr.out_dir, "Output directory")->capture_default_str();
  c_train->add_option("--resume", tr.resume, "Resume from a final.ssnw checkpoint");
  c_train->add_option("--epochs", tr.epochs, "Override the epoch count");
  c_train->add_flag("--quiet", tr.quiet, "Only print the summary");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a checkpoint over observed/SNR sweeps");
  c_eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint path")->required();
  c_eval->add_option("--data", ev.data, "Dataset path")->required();
  c_eval->add_option("--observed", ev.observed, "Observed percentages")->capture_default_str();
  c_eval->add_option("--snr", ev.snr, "SNR list in dB, 'none' for noise-free")
      ->capture_default_str();
  c_eval->add_option("--seed", ev.seed, "Evaluation seed")->capture_default_str();
  c_eval->add_option("--out", ev.out, "Metrics CSV path");
  c_eval->add_option("--subset", ev.subset, "all or heldout")->capture_default_str();
  c_eval->add_option("--split", ev.split, "Train fraction used by --subset heldout")
      ->capture_default_str();
  c_eval->add_option("--max-samples", ev.max_samples, "Limit evaluated samples (0 = all)");
  c_eval->add_flag("--cross-check", ev.cross_check,
                   "Also run LMMSE through the harness and print its delta to the analytic value");
  c_eval->add_option("--reference", ev.reference,
                     "In-distribution dataset; evaluates --data as a zero-shot shift against it");

  OracleArgs orc;
  auto* c_oracle = app.add_subcommand("oracle", "Run the LMMSE or nearest-neighbor oracle");
  c_oracle->add_option("--data", orc.data, "Dataset path")->required();
  c_oracle->add_option("--observed", orc.observed, "Observed percentages")->capture_default_str();
  c_oracle->add_option("--snr", orc.snr, "SNR list in dB, 'none' for noise-free")
      ->capture_default_str();
  c_oracle->add_option("--method", orc.method, "lmmse or nn")->capture_default_str();
  c_oracle->add_option("--seed", orc.seed, "Evaluation seed")->capture_default_str();
  c_oracle->add_option("--max-samples", orc.max_samples, "Limit evaluated samples (0 = all)");
  c_oracle->add_option("--out", orc.out, "Metrics CSV path");

  GradArgs gc;
  auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  c_grad->add_option("--config", gc.config, "Preset name or config file")->capture_default_str();
  c_grad->add_flag("--mutate", gc.mutate, "Use a deliberately broken LayerNorm backward");
  c_grad->add_option("--eps", gc.eps, "Finite-difference step")->capture_default_str();
  c_grad->add_option("--tolerance", gc.tolerance, "Relative error bound")->capture_default_str();
  c_grad->add_option("--seed", gc.seed, "Seed for weights, sample and mask")->capture_default_str();
  c_grad->add_option("--mask-ratio", gc.mask_ratio, "Mask ratio of the probe")->capture_default_str();
  c_grad->add_flag("--moe-residual", gc.moe_residual, "Check the residual MoE path");
  c_grad->add_flag("--renormalize-topk", gc.renormalize, "Check renormalized top-K weights");
  c_grad->add_option("--max-coords", gc.max_coords, "Coordinates per parameter (0 = all)");

  AblateArgs ab;
  auto* c_ablate = app.add_subcommand("ablate", "Train with and without MoE and compare");
  c_ablate->add_option("--config", ab.config, "Preset name or config file")->capture_default_str();
  c_ablate->add_option("--data", ab.data, "Dataset path")->required();
  c_ablate->add_option("--out-dir", ab.out_dir, "Output directory")->capture_default_str();
  c_ablate->add_option("--epochs", ab.epochs, "Override the epoch count");

  std::string show;
  auto* c_show = app.add_subcommand("show-config", "Print a preset or config file in full");
  c_show->add_option("config", show, "Preset name or config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (c_gen->parsed()) return run_gen(gen);
    if (c_train->parsed()) return run_train(tr);
    if (c_eval->parsed()) return run_eval(ev);
    if (c_oracle->parsed()) return run_oracle(orc);
    if (c_grad->parsed()) return run_gradcheck(gc);
    if (c_ablate->parsed()) return run_ablate(ab);
    if (c_show->parsed()) return run_show_config(show);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}
