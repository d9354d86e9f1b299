#include "fas/cli/run_config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "fas/error.hpp"
#include "fas/kv_text.hpp"

namespace fas {
namespace {

const char* const kSections[] = {"grid", "channel", "model", "train", "eval"};

std::size_t to_count(const std::string& value, const std::string& key) {
  const long long v = kv::parse_int(value, key);
  if (v < 0) throw Error(ErrorKind::config, "'" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + kv::format_double(v[i]);
  return s;
}

std::string join_snrs(const std::vector<std::optional<double>>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_snr(v[i]);
  return s;
}

void apply_grid(PortGrid& g, const std::string& k, const std::string& v) {
  if (k == "nx") g.nx = to_count(v, k);
  else if (k == "ny") g.ny = to_count(v, k);
  else if (k == "wx_m") g.wx_m = kv::parse_double(v, k);
  else if (k == "wy_m") g.wy_m = kv::parse_double(v, k);
  else if (k == "lambda_m") g.lambda_m = kv::parse_double(v, k);
  else throw Error(ErrorKind::config, "unknown key '" + k + "' in [grid]");
}

void apply_channel(DatasetHeader& c, const std::string& k, const std::string& v) {
  if (k == "model") {
    const auto m = parse_correlation_model(v);
    if (!m) throw Error(ErrorKind::config, "model must be clarke or bessel, got '" + v + "'");
    c.model = *m;
  } else if (k == "m_antennas") c.m_antennas = to_count(v, k);
  else if (k == "delta2") c.delta2 = kv::parse_double(v, k);
  else if (k == "count") c.count = to_count(v, k);
  else if (k == "seed") c.seed = static_cast<std::uint64_t>(to_count(v, k));
  else if (k == "dtype") {
    if (v == "f32") c.dtype = StorageType::f32;
    else if (v == "f64") c.dtype = StorageType::f64;
    else throw Error(ErrorKind::config, "dtype must be f32 or f64, got '" + v + "'");
  } else {
    throw Error(ErrorKind::config, "unknown key '" + k + "' in [channel]");
  }
}

void apply_model(SSNetConfig& m, const std::string& k, const std::string& v) {
  if (k == "d_model") m.d_model = to_count(v, k);
  else if (k == "d_dec") m.d_dec = to_count(v, k);
  else if (k == "depth_enc") m.depth_enc = to_count(v, k);
  else if (k == "depth_dec") m.depth_dec = to_count(v, k);
  else if (k == "heads") m.heads = to_count(v, k);
  else if (k == "experts") m.experts = to_count(v, k);
  else if (k == "active_experts") m.active_experts = to_count(v, k);
  else if (k == "dropout") m.dropout = kv::parse_double(v, k);
  else if (k == "norm_eps") m.norm_eps = kv::parse_double(v, k);
  else if (k == "moe_residual") m.moe_residual = kv::parse_bool(v, k);
  else if (k == "renormalize_topk") m.renormalize_topk = kv::parse_bool(v, k);
  else if (k == "use_moe") m.use_moe = kv::parse_bool(v, k);
  else throw Error(ErrorKind::config, "unknown key '" + k + "' in [model]");
}

void apply_train(TrainPlan& t, const std::string& k, const std::string& v) {
  if (k == "split") t.split = kv::parse_double(v, k);
  else if (k == "epochs") t.epochs = to_count(v, k);
  else if (k == "batch_size") t.batch_size = to_count(v, k);
  else if (k == "base_lr") t.base_lr = kv::parse_double(v, k);
  else if (k == "warmup_epochs") t.warmup_epochs = to_count(v, k);
  else if (k == "beta1") t.beta1 = kv::parse_double(v, k);
  else if (k == "beta2") t.beta2 = kv::parse_double(v, k);
  else if (k == "weight_decay") t.weight_decay = kv::parse_double(v, k);
  else if (k == "mask_ratio") t.mask_ratio = kv::parse_double(v, k);
  else if (k == "seed") t.seed = static_cast<std::uint64_t>(to_count(v, k));
  else if (k == "train_snr_db") {
    if (v == "none") t.train_snr_db.reset();
    else t.train_snr_db = kv::parse_double(v, k);
  } else if (k == "heldout_limit") {
    t.heldout_limit = to_count(v, k);
  } else {
    throw Error(ErrorKind::config, "unknown key '" + k + "' in [train]");
  }
}

void apply_eval(EvalSpec& e, const std::string& k, const std::string& v) {
  if (k == "observed") e.observed_pcts = parse_number_list(v, k);
  else if (k == "snr") e.snrs = parse_snr_list(v);
  else if (k == "seed") e.seed = static_cast<std::uint64_t>(to_count(v, k));
  else if (k == "max_samples") e.max_samples = to_count(v, k);
  else throw Error(ErrorKind::config, "unknown key '" + k + "' in [eval]");
}

}  // namespace

std::vector<double> parse_number_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item =
        kv::trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    out.push_back(kv::parse_double(item, what));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::optional<double>> parse_snr_list(std::string_view text) {
  std::vector<std::optional<double>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item =
        kv::trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    if (item == "none") {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(kv::parse_double(item, "snr"));
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void RunConfig::sync() {
  model.grid = channel.grid;
  model.m_antennas = channel.m_antennas;
  train.model = model;
}

void RunConfig::validate() const {
  channel.grid.validate();
  if (channel.m_antennas < 1) throw Error(ErrorKind::config, "m_antennas must be >= 1");
  if (!(channel.delta2 >= 0.0)) throw Error(ErrorKind::config, "delta2 must be >= 0");
  model.validate();
  train.validate();
  for (double p : eval.observed_pcts)
    if (!(p > 0.0 && p < 100.0)) {
      throw Error(ErrorKind::config, "observed percentage " + kv::format_double(p) +
                                         " must lie in (0, 100)");
    }
}

std::string RunConfig::serialize() const {
  const kv::Entries all = channel.to_entries();
  auto pick = [&](std::initializer_list<const char*> keys) {
    kv::Entries out;
    for (const char* k : keys)
      for (const auto& e : all)
        if (e.first == k) out.push_back(e);
    return out;
  };
  kv::Entries model_entries;
  for (const auto& e : model.to_entries()) {
    const std::string& k = e.first;
    if (k == "nx" || k == "ny" || k == "wx_m" || k == "wy_m" || k == "lambda_m" ||
        k == "m_antennas") {
      continue;
    }
    model_entries.push_back(e);
  }
  const kv::Entries train_entries = {
      {"split", kv::format_double(train.split)},
      {"epochs", std::to_string(train.epochs)},
      {"batch_size", std::to_string(train.batch_size)},
      {"base_lr", kv::format_double(train.base_lr)},
      {"warmup_epochs", std::to_string(train.warmup_epochs)},
      {"beta1", kv::format_double(train.beta1)},
      {"beta2", kv::format_double(train.beta2)},
      {"weight_decay", kv::format_double(train.weight_decay)},
      {"mask_ratio", kv::format_double(train.mask_ratio)},
      {"seed", std::to_string(train.seed)},
      {"train_snr_db", format_snr(train.train_snr_db)},
      {"heldout_limit", std::to_string(train.heldout_limit)},
  };
  const kv::Entries eval_entries = {
      {"observed", join_numbers(eval.observed_pcts)},
      {"snr", join_snrs(eval.snrs)},
      {"seed", std::to_string(eval.seed)},
      {"max_samples", std::to_string(eval.max_samples)},
  };
  std::string out;
  out += "[grid]\n" + kv::serialize(pick({"nx", "ny", "wx_m", "wy_m", "lambda_m"}));
  out += "\n[channel]\n" +
         kv::serialize(pick({"model", "m_antennas", "delta2", "count", "seed", "dtype"}));
  out += "\n[model]\n" + kv::serialize(model_entries);
  out += "\n[train]\n" + kv::serialize(train_entries);
  out += "\n[eval]\n" + kv::serialize(eval_entries);
  return out;
}

RunConfig RunConfig::parse(std::string_view text) {
  // An optional leading "preset = name" line picks the base.
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    const std::string_view t = kv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') break;
    const kv::Entries e = kv::parse(t);
    if (e.size() == 1 && e[0].first == "preset") return parse(text, preset(e[0].second));
    break;
  }
  RunConfig base;
  base.sync();
  return parse(text, base);
}

RunConfig RunConfig::parse(std::string_view text, const RunConfig& base) {
  RunConfig cfg = base;
  std::map<std::string, std::string> bodies;
  std::string current;
  std::istringstream lines{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const std::string_view t = kv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw Error(ErrorKind::config, "line " + std::to_string(lineno) + ": malformed section");
      }
      current = std::string(kv::trim(t.substr(1, t.size() - 2)));
      bool known = false;
      for (const char* s : kSections) known = known || current == s;
      if (!known) throw Error(ErrorKind::config, "unknown section [" + current + "]");
      if (bodies.count(current)) {
        throw Error(ErrorKind::config, "duplicate section [" + current + "]");
      }
      bodies[current];
      continue;
    }
    if (current.empty()) {
      const kv::Entries e = kv::parse(t);
      if (e.size() == 1 && e[0].first == "preset") continue;
      throw Error(ErrorKind::config,
                  "line " + std::to_string(lineno) + ": key outside of any section");
    }
    bodies[current] += std::string(t) + "\n";
  }
  for (const auto& [section, body] : bodies) {
    for (const auto& [k, v] : kv::parse(body)) {
      if (section == "grid") apply_grid(cfg.channel.grid, k, v);
      else if (section == "channel") apply_channel(cfg.channel, k, v);
      else if (section == "model") apply_model(cfg.model, k, v);
      else if (section == "train") apply_train(cfg.train, k, v);
      else apply_eval(cfg.eval, k, v);
    }
  }
  cfg.sync();
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<std::string> RunConfig::preset_names() { return {"tiny", "desk", "full"}; }

RunConfig RunConfig::preset(std::string_view name) {
  RunConfig c;
  if (name == "tiny") {
    c.channel.grid = PortGrid{4, 4, 0.04, 0.08, 0.0857};
    c.channel.m_antennas = 2;
    c.channel.count = 500;
    c.model.d_model = 16;
    c.model.d_dec = 8;
    c.model.depth_enc = 1;
    c.model.depth_dec = 1;
    c.model.heads = 2;
    c.model.experts = 2;
    c.model.active_experts = 1;
    c.model.dropout = 0.0;
    c.train.epochs = 20;
    c.train.warmup_epochs = 4;
    c.train.batch_size = 32;
    c.train.base_lr = 1e-3;
    c.eval.observed_pcts = {25, 50};
  } else if (name == "desk") {
    c.channel.grid = PortGrid{8, 8, 0.04, 0.08, 0.0857};
    c.channel.m_antennas = 4;
    c.channel.count = 2500;
    c.model.d_model = 32;
    c.model.d_dec = 16;
    c.model.depth_enc = 2;
    c.model.depth_dec = 1;
    c.model.heads = 4;
    c.train.epochs = 200;
    c.train.warmup_epochs = 40;
    c.train.base_lr = 1e-3;
    c.train.heldout_limit = 250;
  } else if (name == "full") {
    c.channel.grid = PortGrid{16, 32, 0.02, 0.04, 0.0857};
    c.channel.m_antennas = 8;
    c.channel.count = 20000;
    c.train.epochs = 400;
    c.train.warmup_epochs = 40;
    c.train.base_lr = 1.5e-4;
    c.eval.snrs = {std::nullopt, 0.0, 10.0, 20.0};
  } else {
    throw Error(ErrorKind::config, "unknown preset '" + std::string(name) +
                                       "' (expected tiny, desk or full)");
  }
  c.sync();
  c.validate();
  return c;
}

RunConfig resolve_config(const std::string& name_or_path) {
  for (const std::string& p : RunConfig::preset_names())
    if (p == name_or_path) return RunConfig::preset(p);
  return RunConfig::load(name_or_path);
}

}  // namespace fas
