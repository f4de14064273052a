#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polarmig/scene.hpp"

namespace polarmig {

enum class DataKind { coherency2x2, response3x3, preprocessed3x3 };

std::string to_string(DataKind k);
DataKind data_kind_from_string(const std::string& s);

// Complex matrix field indexed (row, col, freq, i, j), row-major.
class ArrayDataSet {
 public:
  using RowMat3 = Eigen::Matrix<cd, 3, 3, Eigen::RowMajor>;
  using RowMat2 = Eigen::Matrix<cd, 2, 2, Eigen::RowMajor>;

  ArrayDataSet() = default;
  ArrayDataSet(DataKind kind, const ArrayGeom& array, const SourceSpec& source, const FrequencyBand& band);

  DataKind kind() const { return kind_; }
  int dim() const { return kind_ == DataKind::coherency2x2 ? 2 : 3; }
  const ArrayGeom& array() const { return array_; }
  const SourceSpec& source() const { return source_; }
  const FrequencyBand& band() const { return band_; }
  int frequencies() const { return band_.samples; }

  std::size_t offset(std::size_t receiver, int f) const {
    return (receiver * std::size_t(band_.samples) + std::size_t(f)) * std::size_t(dim() * dim());
  }
  CMat3d mat3(std::size_t receiver, int f) const { return Eigen::Map<const RowMat3>(values_.data() + offset(receiver, f)); }
  CMat2d mat2(std::size_t receiver, int f) const { return Eigen::Map<const RowMat2>(values_.data() + offset(receiver, f)); }
  void set(std::size_t receiver, int f, const CMat3d& M) { Eigen::Map<RowMat3>(values_.data() + offset(receiver, f)) = M; }
  void set(std::size_t receiver, int f, const CMat2d& M) { Eigen::Map<RowMat2>(values_.data() + offset(receiver, f)) = M; }

  const std::vector<cd>& values() const { return values_; }
  std::vector<cd>& values() { return values_; }

 private:
  DataKind kind_ = DataKind::response3x3;
  ArrayGeom array_;
  SourceSpec source_;
  FrequencyBand band_;
  std::vector<cd> values_;
};

ArrayDataSet coherency_synthesize(const Scene& scene, const FrequencyBand& band, bool include_second_born = false);

// Full response or its projection P_par Pi P_s, which equals U_par Pi~ U_s^T.
ArrayDataSet response_dataset(const Scene& scene, const FrequencyBand& band, bool projected,
                              bool include_second_born = false);

void dataset_write(const std::string& path, const ArrayDataSet& ds);
ArrayDataSet dataset_read(const std::string& path);

// Shared on-disk container: magic, u64 header length, JSON header, f64 LE payload.
inline constexpr char kMagic[] = "POLARMIG1";
inline constexpr std::size_t kMagicLen = 9;

struct Container {
  std::string header;  // JSON text
  std::vector<double> payload;
};
void container_write(const std::string& path, const std::string& header, const std::vector<double>& payload);
Container container_read(const std::string& path);

}  // namespace polarmig
