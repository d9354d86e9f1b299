#include <CLI11.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fas/baseline/oracles.hpp"
#include "fas/channel/correlation.hpp"
#include "fas/channel/dataset.hpp"
#include "fas/channel/nmse.hpp"
#include "fas/channel/sampling.hpp"
#include "fas/cli/run_config.hpp"
#include "fas/model/checkpoint.hpp"
#include "fas/numerics/kernels.hpp"
#include "fas/model/mask.hpp"
#include "fas/model/ssnet.hpp"
#include "fas/training/ablate.hpp"
#include "fas/training/evaluate.hpp"
#include "fas/training/train.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fas;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const MetricsRow& row_at(const std::vector<MetricsRow>& rows, double pct,
                         std::optional<double> snr = std::nullopt) {
  for (const MetricsRow& r : rows)
    if (r.observed_pct == pct && r.snr_db == snr) return r;
  throw std::runtime_error("missing metrics row for " + num(pct, 0) + "%");
}

// ---------------------------------------------------------------------------

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  const RunConfig cfg = RunConfig::preset("tiny");
  SSNetConfig mc = cfg.model;
  mc.dropout = 0.0;
  SSNetWeights w = SSNetWeights::initialize(mc, 3);
  const ChannelFactors f = factorize(correlation_matrix(mc.grid, cfg.channel.model), 1.0);
  RngStream srng(3, "acceptance-sample");
  const Tensor sample = sample_channel(f, mc.m_antennas, srng);
  RngStream mrng(3, "acceptance-mask");
  const MaskSpec mask = make_mask(mc.grid.port_count(), 0.5, mrng);
  GradCheckOptions opt;
  opt.eps = 1e-5;
  opt.tolerance = 1e-4;
  const GradCheckReport r = check_gradients(w, sample, mask, opt);
  const double secs = seconds_since(t0);
  return {r.passed() && secs < 60.0,
          "max rel error " + sci(r.max_rel_error) + " over " + std::to_string(r.coords_checked) +
              " coords (worst " + r.worst_param + "), " + num(secs, 1) + " s"};
}

Outcome channel_statistics() {
  const auto t0 = Clock::now();
  const PortGrid grid{4, 4, 0.04, 0.08, 0.0857};
  const Tensor sigma = correlation_matrix(grid, CorrelationModel::clarke);
  const ChannelFactors f = factorize(sigma, 1.0);
  const std::size_t n = grid.port_count();
  std::vector<std::complex<double>> acc(n * n);
  RngStream rng(2, "acceptance-covariance");
  constexpr std::size_t kDraws = 100000;
  for (std::size_t s = 0; s < kDraws; ++s) {
    const Tensor g = sample_channel(f, 1, rng);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q)
        acc[p * n + q] += std::complex<double>(g(p, 0), g(p, 1)) * std::complex<double>(g(q, 0), -g(q, 1));
  }
  double worst = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      worst = std::max(worst, std::abs(acc[p * n + q] / static_cast<double>(kDraws) - sigma(p, q)));
  const double recon = reconstruction_error(f);
  const double secs = seconds_since(t0);
  return {worst <= 0.02 && recon < 1e-10 && secs < 120.0,
          "max |C - Sigma| " + num(worst, 4) + ", eigen reconstruction " + sci(recon) + ", " +
              num(secs, 1) + " s"};
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  const PortGrid grid{8, 8, 0.04, 0.08, 0.0857};
  const Tensor sigma = correlation_matrix(grid, CorrelationModel::clarke);
  const ChannelFactors f = factorize(sigma, 1.0);
  RngStream mrng(4, "acceptance-oracle-mask");
  const MaskPartition part = make_mask(grid.port_count(), 0.75, mrng).partition();
  std::ostringstream detail;
  bool pass = true;
  for (const std::optional<double> snr : {std::optional<double>{}, std::optional<double>{0.0},
                                          std::optional<double>{10.0}, std::optional<double>{20.0}}) {
    const double noise_var = snr ? std::pow(10.0, -*snr / 10.0) : 0.0;
    const LmmseWeights w = lmmse_weights(sigma, part, noise_var);
    RngStream rng(4, "acceptance-oracle");
    double err = 0.0, energy = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const Tensor g = sample_channel(f, 1, rng);
      Tensor obs = gather_rows(g, part.observed);
      for (double& v : obs.values()) v += std::sqrt(noise_var / 2.0) * rng.normal();
      const Tensor est = kernels::matmul(w.weights, obs);
      const Tensor truth = gather_rows(g, part.masked);
      for (std::size_t i = 0; i < est.size(); ++i) {
        err += (est[i] - truth[i]) * (est[i] - truth[i]);
        energy += truth[i] * truth[i];
      }
    }
    const double mc = err / energy;
    const double an = analytic_lmmse_nmse(sigma, part, noise_var);
    const bool ok = snr ? std::abs(to_db(mc) - to_db(an)) <= 0.5 : std::abs(mc - an) <= 1e-3;
    pass = pass && ok;
    detail << "snr " << format_snr(snr) << ": mc " << num(to_db(mc), 3) << " dB vs analytic "
           << num(to_db(an), 3) << " dB; ";
  }
  const double secs = seconds_since(t0);
  detail << num(secs, 1) << " s";
  return {pass && secs < 120.0, detail.str()};
}

// ---------------------------------------------------------------------------
// Desk-scale training shared by criteria 4, 5, 6, 7, 8 and 10

struct DeskRuns {
  RunConfig cfg;
  Dataset data;
  std::vector<std::size_t> heldout;
  AblationResult ablation;
  double moe_train_seconds = 0.0;
  SSNetWeights moe{RunConfig::preset("tiny").model};
  SSNetWeights ratio90{RunConfig::preset("tiny").model};
  SSNetWeights ratio50{RunConfig::preset("tiny").model};
  EvalSpec spec;
};

TrainPlan desk_plan(const DeskRuns& d, const fs::path& out, double mask_ratio) {
  TrainPlan p = d.cfg.train;
  p.out_dir = out;
  p.mask_ratio = mask_ratio;
  return p;
}

void run_desk(DeskRuns& d, const fs::path& work, std::optional<std::size_t> epochs) {
  d.cfg = RunConfig::preset("desk");
  if (epochs) {
    d.cfg.train.warmup_epochs = d.cfg.train.warmup_epochs * *epochs / d.cfg.train.epochs;
    d.cfg.train.epochs = *epochs;
  }
  d.data = generate_dataset(d.cfg.channel);
  d.heldout = split_dataset(d.data.size(), d.cfg.train.split, d.cfg.train.seed).test;
  d.spec = d.cfg.eval;
  d.spec.observed_pcts = {5, 10, 15, 20, 25, 50};
  d.spec.snrs = {std::nullopt};

  const TrainPlan main = desk_plan(d, work / "ablation", 0.75);
  const auto t0 = Clock::now();
  bool timed = false;
  d.ablation = ablate(main, d.data, d.spec, [&](const EpochRecord& e) {
    if (!timed && e.epoch == main.epochs) {
      d.moe_train_seconds = seconds_since(t0);
      timed = true;
    }
  });
  d.moe = load_checkpoint(d.ablation.moe.best_checkpoint).weights;
  d.ratio90 = load_checkpoint(train(desk_plan(d, work / "ratio90", 0.9), d.data).best_checkpoint).weights;
  d.ratio50 = load_checkpoint(train(desk_plan(d, work / "ratio50", 0.5), d.data).best_checkpoint).weights;
}

Outcome desk_learning(const DeskRuns& d) {
  EvalSpec spec = d.spec;
  spec.observed_pcts = {25};
  const double ssnet = row_at(evaluate(ssnet_extrapolator(d.moe), "ssnet", d.data, d.heldout, spec), 25).nmse_db;
  const double nn = row_at(evaluate(nearest_neighbor_extrapolator(d.cfg.channel.grid), "nn", d.data,
                                    d.heldout, spec), 25).nmse_db;
  const double zero = row_at(evaluate(zero_extrapolator(), "zero", d.data, d.heldout, spec), 25).nmse_db;
  const double floor = row_at(analytic_lmmse_rows(d.data, d.heldout, spec), 25).nmse_db;
  const bool pass = ssnet <= -8.0 && ssnet < nn && ssnet < zero && ssnet >= floor - 0.5 &&
                    d.moe_train_seconds < 900.0;
  return {pass, "ssnet " + num(ssnet) + " dB, nearest-neighbor " + num(nn) + " dB, zero " +
                    num(zero) + " dB, lmmse floor " + num(floor) + " dB, training " +
                    num(d.moe_train_seconds, 0) + " s"};
}

Outcome mask_ratio_trend(const DeskRuns& d) {
  EvalSpec spec = d.spec;
  spec.observed_pcts = {10};
  auto at10 = [&](const SSNetWeights& w) {
    return row_at(evaluate(ssnet_extrapolator(w), "ssnet", d.data, d.heldout, spec), 10).nmse_db;
  };
  const double r90 = at10(d.ratio90), r75 = at10(d.moe), r50 = at10(d.ratio50);
  return {r90 <= r50 + 0.3, "at 10% observed: trained 0.9 " + num(r90) + " dB, 0.75 " + num(r75) +
                                " dB, 0.5 " + num(r50) + " dB"};
}

Outcome flexibility(const DeskRuns& d) {
  const auto rows = evaluate(ssnet_extrapolator(d.moe), "ssnet", d.data, d.heldout, d.spec);
  std::ostringstream s;
  bool finite = rows.size() == 6;
  for (const MetricsRow& r : rows) {
    s << num(r.observed_pct, 0) << "%: " << num(r.nmse_db) << " dB; ";
    finite = finite && std::isfinite(r.nmse_db);
  }
  const bool pass = finite && row_at(rows, 50).nmse_db <= row_at(rows, 5).nmse_db + 0.3;
  return {pass, s.str()};
}

Outcome information_barrier(const DeskRuns& d) {
  RngStream rng(9, "acceptance-barrier");
  double worst = 0.0;
  for (std::size_t k = 0; k < 20; ++k) {
    const Tensor truth = d.data.sample(d.heldout[k]);
    RngStream mrng = rng.child(k);
    const MaskSpec mask = make_mask(truth.rows(), 0.75, mrng);
    Tensor scrambled = truth;
    for (std::size_t p : mask.masked)
      for (double& v : scrambled.row(p)) v = 100.0 * rng.normal();
    worst = std::max(worst, max_abs_diff(forward(truth, mask, d.moe), forward(scrambled, mask, d.moe)));
  }
  return {worst == 0.0, "max output change " + sci(worst) + " over 20 samples"};
}

Outcome zero_shot(const DeskRuns& d) {
  DatasetHeader h = d.cfg.channel;
  h.model = CorrelationModel::bessel;
  h.count = 4000;
  h.seed = d.cfg.channel.seed + 100;
  const Dataset bessel = generate_dataset(h);
  EvalSpec spec = d.spec;
  spec.snrs = {std::nullopt, 20.0};
  const ZeroShotReport r = zero_shot_eval(d.moe, d.data, d.heldout, bessel, spec);
  std::ostringstream s;
  bool finite = true;
  const ShiftRow* g = nullptr;
  for (const ShiftRow& row : r.degradation) {
    finite = finite && std::isfinite(row.shifted_db);
    if (row.observed_pct == 25 && row.snr_db == std::optional<double>(20.0)) g = &row;
  }
  if (g) {
    s << "25%/20 dB: clarke " << num(g->reference_db) << " dB, bessel " << num(g->shifted_db)
      << " dB, degradation " << num(g->delta_db) << " dB ("
      << (g->delta_db >= 3.0 && g->delta_db <= 5.0 ? "inside" : "outside")
      << " the 3-5 dB band); ";
  }
  s << r.degradation.size() << " configurations reported";
  return {finite && g && g->delta_db <= 10.0, s.str()};
}

Outcome determinism(const fs::path& work) {
  const std::string fasx = FASX_PATH;
  const fs::path dir = work / "determinism";
  fs::create_directories(dir);
  bool ok = true;
  for (const char* tag : {"a", "b"}) {
    const std::string data = (dir / (std::string(tag) + ".fasc")).string();
    ok = ok && shell(fasx + " gen-data --config tiny --out " + data) == 0;
    ok = ok && shell(fasx + " train --config tiny --epochs 5 --quiet --data " + data + " --out-dir " +
                     (dir / tag).string()) == 0;
  }
  if (!ok) return {false, "fasx run failed"};
  std::ostringstream s;
  bool same = true;
  for (const char* f : {"a.fasc|b.fasc", "a/loss.csv|b/loss.csv", "a/best.ssnw|b/best.ssnw",
                        "a/final.ssnw|b/final.ssnw"}) {
    const std::string pair = f;
    const auto bar = pair.find('|');
    const std::string x = slurp(dir / pair.substr(0, bar));
    const bool eq = !x.empty() && x == slurp(dir / pair.substr(bar + 1));
    same = same && eq;
    s << pair.substr(bar + 1) << (eq ? " identical; " : " DIFFERS; ");
  }
  return {same, s.str()};
}

Outcome ablation(const DeskRuns& d) {
  const double moe = row_at(d.ablation.moe_rows, 25).nmse_db;
  const double plain = row_at(d.ablation.no_moe_rows, 25).nmse_db;
  std::ostringstream s;
  s << "25%: moe " << num(moe) << " dB, no-moe " << num(plain) << " dB; deltas (no-moe - moe):";
  for (const ShiftRow& r : d.ablation.comparison) s << " " << num(r.observed_pct, 0) << "% " << num(r.delta_db);
  const bool csv = fs::exists(d.ablation.moe.best_checkpoint.parent_path().parent_path() / "ablation.csv");
  return {moe <= -5.0 && plain <= -5.0 && csv && d.ablation.comparison.size() == d.spec.observed_pcts.size(),
          s.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run: one PASS/FAIL line per criterion"};
  std::string work_dir = "acceptance_work";
  std::optional<std::size_t> epochs;
  app.add_option("--work-dir", work_dir, "Scratch directory")->capture_default_str();
  app.add_option("--epochs", epochs, "Override the desk epoch count (smoke runs)");
  CLI11_PARSE(app, argc, argv);

  const fs::path work = work_dir;
  fs::remove_all(work);
  fs::create_directories(work);

  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << name << ": " << o.detail
              << std::endl;
  };

  report(1, "gradient fidelity", gradient_fidelity);
  report(2, "channel statistics", channel_statistics);
  report(3, "oracle equivalence", oracle_equivalence);

  DeskRuns desk;
  std::string desk_error;
  try {
    run_desk(desk, work, epochs);
  } catch (const std::exception& e) {
    desk_error = e.what();
  }
  auto with_desk = [&](const std::function<Outcome(const DeskRuns&)>& f) {
    return [&, f] {
      if (!desk_error.empty()) return Outcome{false, "desk training failed: " + desk_error};
      return f(desk);
    };
  };
  report(4, "desk-scale learning", with_desk(desk_learning));
  report(5, "mask-ratio trend", with_desk(mask_ratio_trend));
  report(6, "flexibility", with_desk(flexibility));
  report(7, "information barrier", with_desk(information_barrier));
  report(8, "zero-shot pipeline", with_desk(zero_shot));
  report(9, "determinism", [&] { return determinism(work); });
  report(10, "ablation harness", with_desk(ablation));

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
