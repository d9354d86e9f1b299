#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fas/channel/correlation.hpp"
#include "fas/channel/grid.hpp"
#include "fas/kv_text.hpp"
#include "fas/numerics/tensor.hpp"

namespace fas {

enum class StorageType { f32, f64 };

/// Dataset container ("FASC"):
///   magic "FASC" | u16 LE version | u32 LE header length | header text |
///   count records of N_S×2M LE values, row-major in port order.
/// The header is a key=value document with keys nx, ny, wx_m, wy_m,
/// lambda_m, model, m_antennas, delta2, count, dtype, seed.
struct DatasetHeader {
  static constexpr std::uint16_t kVersion = 1;

  PortGrid grid;
  CorrelationModel model = CorrelationModel::clarke;
  std::size_t m_antennas = 8;
  double delta2 = 1.0;
  std::size_t count = 0;
  StorageType dtype = StorageType::f32;
  std::uint64_t seed = 0;

  std::size_t values_per_sample() const noexcept { return grid.port_count() * 2 * m_antennas; }
  kv::Entries to_entries() const;
  static DatasetHeader from_entries(const kv::Entries& entries);

  friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

/// In-memory dataset; values are kept at the storage precision and promoted
/// to double when a sample is read.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(DatasetHeader header);

  const DatasetHeader& header() const noexcept { return header_; }
  std::size_t size() const noexcept { return size_; }

  /// N_S×2M sample promoted to double.
  Tensor sample(std::size_t index) const;
  /// Appends a sample (rounded to the storage precision) and bumps the header count.
  void append(const Tensor& sample);

  const std::vector<float>& raw_f32() const noexcept { return f32_; }
  const std::vector<double>& raw_f64() const noexcept { return f64_; }

 private:
  friend Dataset read_dataset(const std::filesystem::path& path);

  DatasetHeader header_;
  std::size_t size_ = 0;
  std::vector<float> f32_;
  std::vector<double> f64_;
};

/// Streams records to disk in index order; close() checks the declared count.
class DatasetWriter {
 public:
  DatasetWriter(const std::filesystem::path& path, const DatasetHeader& header);
  void append(const Tensor& sample);
  void close();
  std::size_t written() const noexcept { return written_; }

 private:
  std::filesystem::path path_;
  DatasetHeader header_;
  std::ofstream out_;
  std::size_t written_ = 0;
};

void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
/// Throws ErrorKind::io on open failure, bad magic, unknown version, or truncation.
Dataset read_dataset(const std::filesystem::path& path);
DatasetHeader read_dataset_header(const std::filesystem::path& path);

/// Deterministic noise-free dataset: sample i is drawn from the stream
/// (seed, "dataset").child(i), so samples can be generated in parallel and
/// written in index order.
Dataset generate_dataset(const DatasetHeader& header);
void generate_dataset_file(const DatasetHeader& header, const std::filesystem::path& path);

}  // namespace fas
