#include "fas/model/checkpoint.hpp"

#include <fstream>

#include "fas/binary_io.hpp"
#include "fas/error.hpp"

namespace fas {
namespace {

constexpr char kMagic[4] = {'S', 'S', 'N', 'W'};
constexpr std::string_view kMetaPrefix = "meta.";

void write_tensor(std::ostream& out, const Tensor& t) {
  for (double v : t.values()) binary::write_f64(out, v);
}

void read_tensor(std::istream& in, Tensor& t, const std::string& context) {
  for (double& v : t.values()) v = binary::read_f64(in, context);
}

}  // namespace

std::optional<std::string> Checkpoint::meta_value(std::string_view key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return std::nullopt;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for writing");

  kv::Entries header = checkpoint.weights.config().to_entries();
  header.emplace_back("optimizer", checkpoint.with_optimizer ? "true" : "false");
  for (const auto& [k, v] : checkpoint.meta) header.emplace_back(std::string(kMetaPrefix) + k, v);
  const std::string text = kv::serialize(header);

  out.write(kMagic, 4);
  binary::write_le<std::uint16_t>(out, Checkpoint::kVersion);
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  const auto& params = checkpoint.weights.params();
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter& p : params) {
    binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t e : p.value.shape()) binary::write_le<std::uint64_t>(out, e);
    write_tensor(out, p.value);
    if (checkpoint.with_optimizer) {
      binary::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(p.step));
      write_tensor(out, p.first_moment);
      write_tensor(out, p.second_moment);
    }
  }
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write to '" + path.string() + "' failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string ctx = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + ctx + "'");

  if (binary::read_bytes(in, 4, ctx) != std::string_view(kMagic, 4)) {
    throw Error(ErrorKind::io, ctx + ": bad magic, not an SSNW checkpoint");
  }
  const auto version = binary::read_le<std::uint16_t>(in, ctx);
  if (version != Checkpoint::kVersion) {
    throw Error(ErrorKind::io, ctx + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = binary::read_le<std::uint32_t>(in, ctx);
  if (len > (1u << 20)) throw Error(ErrorKind::io, ctx + ": implausible header length");
  const std::string text = binary::read_bytes(in, len, ctx);

  kv::Entries model_entries;
  kv::Entries meta;
  bool with_optimizer = false;
  SSNetConfig config;
  try {
    for (auto& [k, v] : kv::parse(text)) {
      if (k == "optimizer") {
        with_optimizer = kv::parse_bool(v, k);
      } else if (k.starts_with(kMetaPrefix)) {
        meta.emplace_back(k.substr(kMetaPrefix.size()), v);
      } else {
        model_entries.emplace_back(k, v);
      }
    }
    config = SSNetConfig::from_entries(model_entries);
  } catch (const Error& e) {
    throw Error(ErrorKind::io, ctx + ": " + e.what());
  }

  Checkpoint ck{SSNetWeights(config), with_optimizer, std::move(meta)};
  auto& params = ck.weights.params();
  const auto count = binary::read_le<std::uint32_t>(in, ctx);
  if (count != params.size()) {
    throw Error(ErrorKind::io, ctx + ": " + std::to_string(count) + " parameter blocks, layout has " +
                                   std::to_string(params.size()));
  }
  for (Parameter& p : params) {
    const auto name_len = binary::read_le<std::uint32_t>(in, ctx);
    if (name_len > 4096) throw Error(ErrorKind::io, ctx + ": implausible parameter name length");
    const std::string name = binary::read_bytes(in, name_len, ctx);
    if (name != p.name) {
      throw Error(ErrorKind::io, ctx + ": expected parameter '" + p.name + "', found '" + name + "'");
    }
    const auto rank = binary::read_le<std::uint32_t>(in, ctx);
    std::vector<std::size_t> shape(rank);
    for (auto& e : shape) e = static_cast<std::size_t>(binary::read_le<std::uint64_t>(in, ctx));
    if (shape != p.value.shape()) {
      throw Error(ErrorKind::io, ctx + ": parameter '" + name + "' has shape " +
                                     shape_string(shape) + ", expected " +
                                     shape_string(p.value.shape()));
    }
    read_tensor(in, p.value, ctx);
    if (with_optimizer) {
      p.step = static_cast<std::int64_t>(binary::read_le<std::uint64_t>(in, ctx));
      read_tensor(in, p.first_moment, ctx);
      read_tensor(in, p.second_moment, ctx);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::io, ctx + ": trailing bytes after the last parameter");
  }
  return ck;
}

}  // namespace fas
