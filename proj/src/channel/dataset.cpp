#include "fas/channel/dataset.hpp"

#include <algorithm>
#include <map>

#include "fas/binary_io.hpp"
#include "fas/channel/sampling.hpp"
#include "fas/error.hpp"

namespace fas {
namespace {

constexpr char kMagic[4] = {'F', 'A', 'S', 'C'};
constexpr std::size_t kGenerateChunk = 256;

std::string_view to_string(StorageType t) { return t == StorageType::f32 ? "f32" : "f64"; }

const std::string& require(const std::map<std::string, std::string, std::less<>>& m,
                           const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end()) throw Error(ErrorKind::io, "dataset header is missing key '" + key + "'");
  return it->second;
}

void write_record(std::ostream& out, const Tensor& sample, StorageType dtype) {
  for (double v : sample.values()) {
    if (dtype == StorageType::f32) {
      binary::write_f32(out, static_cast<float>(v));
    } else {
      binary::write_f64(out, v);
    }
  }
}

void write_preamble(std::ostream& out, const DatasetHeader& header) {
  out.write(kMagic, 4);
  binary::write_le<std::uint16_t>(out, DatasetHeader::kVersion);
  const std::string text = kv::serialize(header.to_entries());
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

DatasetHeader read_preamble(std::istream& in, const std::string& context) {
  const std::string magic = binary::read_bytes(in, 4, context);
  if (magic != std::string_view(kMagic, 4)) {
    throw Error(ErrorKind::io, context + ": bad magic, not a FASC dataset");
  }
  const auto version = binary::read_le<std::uint16_t>(in, context);
  if (version != DatasetHeader::kVersion) {
    throw Error(ErrorKind::io, context + ": unsupported format version " + std::to_string(version));
  }
  const auto len = binary::read_le<std::uint32_t>(in, context);
  if (len > (1u << 20)) throw Error(ErrorKind::io, context + ": implausible header length");
  const std::string text = binary::read_bytes(in, len, context);
  try {
    return DatasetHeader::from_entries(kv::parse(text));
  } catch (const Error& e) {
    throw Error(ErrorKind::io, context + ": " + e.what());
  }
}

}  // namespace

kv::Entries DatasetHeader::to_entries() const {
  return {
      {"nx", std::to_string(grid.nx)},
      {"ny", std::to_string(grid.ny)},
      {"wx_m", kv::format_double(grid.wx_m)},
      {"wy_m", kv::format_double(grid.wy_m)},
      {"lambda_m", kv::format_double(grid.lambda_m)},
      {"model", std::string(fas::to_string(model))},
      {"m_antennas", std::to_string(m_antennas)},
      {"delta2", kv::format_double(delta2)},
      {"count", std::to_string(count)},
      {"dtype", std::string(to_string(dtype))},
      {"seed", std::to_string(seed)},
  };
}

DatasetHeader DatasetHeader::from_entries(const kv::Entries& entries) {
  std::map<std::string, std::string, std::less<>> m(entries.begin(), entries.end());
  DatasetHeader h;
  h.grid.nx = static_cast<std::size_t>(kv::parse_int(require(m, "nx"), "nx"));
  h.grid.ny = static_cast<std::size_t>(kv::parse_int(require(m, "ny"), "ny"));
  h.grid.wx_m = kv::parse_double(require(m, "wx_m"), "wx_m");
  h.grid.wy_m = kv::parse_double(require(m, "wy_m"), "wy_m");
  h.grid.lambda_m = kv::parse_double(require(m, "lambda_m"), "lambda_m");
  const auto model = parse_correlation_model(require(m, "model"));
  if (!model) throw Error(ErrorKind::io, "dataset header: unknown model '" + m["model"] + "'");
  h.model = *model;
  h.m_antennas = static_cast<std::size_t>(kv::parse_int(require(m, "m_antennas"), "m_antennas"));
  h.delta2 = kv::parse_double(require(m, "delta2"), "delta2");
  h.count = static_cast<std::size_t>(kv::parse_int(require(m, "count"), "count"));
  const std::string& dtype = require(m, "dtype");
  if (dtype == "f32") {
    h.dtype = StorageType::f32;
  } else if (dtype == "f64") {
    h.dtype = StorageType::f64;
  } else {
    throw Error(ErrorKind::io, "dataset header: unknown dtype '" + dtype + "'");
  }
  h.seed = std::stoull(require(m, "seed"));
  return h;
}

Dataset::Dataset(DatasetHeader header) : header_(std::move(header)) { header_.count = 0; }

Tensor Dataset::sample(std::size_t index) const {
  if (index >= size_) {
    throw Error(ErrorKind::dimension, "dataset index " + std::to_string(index) + " out of range");
  }
  const std::size_t n = header_.values_per_sample();
  std::vector<double> values(n);
  if (header_.dtype == StorageType::f32) {
    std::copy_n(f32_.begin() + static_cast<std::ptrdiff_t>(index * n), n, values.begin());
  } else {
    std::copy_n(f64_.begin() + static_cast<std::ptrdiff_t>(index * n), n, values.begin());
  }
  return Tensor({header_.grid.port_count(), 2 * header_.m_antennas}, std::move(values));
}

void Dataset::append(const Tensor& sample) {
  if (sample.size() != header_.values_per_sample()) {
    throw Error(ErrorKind::dimension, "dataset append: sample " + shape_string(sample.shape()) +
                                          " does not match header");
  }
  for (double v : sample.values()) {
    if (header_.dtype == StorageType::f32) {
      f32_.push_back(static_cast<float>(v));
    } else {
      f64_.push_back(v);
    }
  }
  ++size_;
  header_.count = size_;
}

DatasetWriter::DatasetWriter(const std::filesystem::path& path, const DatasetHeader& header)
    : path_(path), header_(header), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  write_preamble(out_, header_);
}

void DatasetWriter::append(const Tensor& sample) {
  if (sample.size() != header_.values_per_sample()) {
    throw Error(ErrorKind::dimension, "dataset writer: sample size mismatch");
  }
  write_record(out_, sample, header_.dtype);
  ++written_;
}

void DatasetWriter::close() {
  out_.close();
  if (!out_) throw Error(ErrorKind::io, "write failed: " + path_.string());
  if (written_ != header_.count) {
    throw Error(ErrorKind::io, path_.string() + ": header declares " +
                                   std::to_string(header_.count) + " samples, wrote " +
                                   std::to_string(written_));
  }
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  DatasetWriter writer(path, dataset.header());
  for (std::size_t i = 0; i < dataset.size(); ++i) writer.append(dataset.sample(i));
  writer.close();
}

DatasetHeader read_dataset_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return read_preamble(in, path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  const std::string ctx = path.string();
  const DatasetHeader header = read_preamble(in, ctx);
  const std::size_t count = header.count;
  Dataset ds(header);
  const std::size_t n = ds.header_.values_per_sample();
  try {
    ds.header_.grid.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::io, ctx + ": " + e.what());
  }
  if (ds.header_.dtype == StorageType::f32) {
    ds.f32_.resize(count * n);
    for (float& v : ds.f32_) v = binary::read_f32(in, ctx);
  } else {
    ds.f64_.resize(count * n);
    for (double& v : ds.f64_) v = binary::read_f64(in, ctx);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::io, ctx + ": trailing bytes after " + std::to_string(count) + " records");
  }
  ds.size_ = count;
  ds.header_.count = count;
  return ds;
}

namespace {

// Fills samples [begin, end) into out, in parallel across samples.
void generate_chunk(const ChannelFactors& factors, const DatasetHeader& header,
                    std::size_t begin, std::size_t end, std::vector<Tensor>& out) {
  const RngStream root(header.seed, "dataset");
  out.assign(end - begin, Tensor());
  const long n = static_cast<long>(end - begin);
#pragma omp parallel for schedule(static)
  for (long k = 0; k < n; ++k) {
    RngStream rng = root.child(begin + static_cast<std::size_t>(k));
    out[static_cast<std::size_t>(k)] = sample_channel(factors, header.m_antennas, rng);
  }
}

void check_generate(const DatasetHeader& header) {
  if (header.count < 1) throw Error(ErrorKind::config, "dataset count must be at least 1");
  if (header.m_antennas < 1) throw Error(ErrorKind::config, "m_antennas must be at least 1");
  header.grid.validate();
}

}  // namespace

Dataset generate_dataset(const DatasetHeader& header) {
  check_generate(header);
  const ChannelFactors factors =
      factorize(correlation_matrix(header.grid, header.model), header.delta2);
  Dataset ds(header);
  std::vector<Tensor> chunk;
  for (std::size_t b = 0; b < header.count; b += kGenerateChunk) {
    generate_chunk(factors, header, b, std::min(header.count, b + kGenerateChunk), chunk);
    for (const Tensor& s : chunk) ds.append(s);
  }
  return ds;
}

void generate_dataset_file(const DatasetHeader& header, const std::filesystem::path& path) {
  check_generate(header);
  const ChannelFactors factors =
      factorize(correlation_matrix(header.grid, header.model), header.delta2);
  DatasetWriter writer(path, header);
  std::vector<Tensor> chunk;
  for (std::size_t b = 0; b < header.count; b += kGenerateChunk) {
    generate_chunk(factors, header, b, std::min(header.count, b + kGenerateChunk), chunk);
    // f32 storage rounds here, matching what Dataset::append stores in memory.
    for (const Tensor& s : chunk) writer.append(s);
  }
  writer.close();
}

}  // namespace fas
