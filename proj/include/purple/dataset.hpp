#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace purple {

using GroupId = std::uint32_t;

/// Marker stored in the per-row true-label column when y is not observed.
inline constexpr std::int8_t kUnknownLabel = -1;

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the file loaders; carries the 1-based line number of the fault.
class ParseError : public DatasetError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct SparseEntry {
  std::uint32_t index;
  double value;
};

/// Row-major dense matrix or CSR sparse matrix behind one interface. All
/// numeric consumers go through dot/axpy/for_each_nonzero so the two storage
/// modes are interchangeable.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  static FeatureMatrix dense(std::size_t n_rows, std::size_t n_dims, std::vector<double> values);
  /// Rows must have strictly increasing indices below n_dims.
  static FeatureMatrix sparse(std::size_t n_dims, const std::vector<std::vector<SparseEntry>>& rows);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_dims() const { return n_dims_; }
  bool is_sparse() const { return sparse_; }
  std::size_t nnz() const;

  double dot(std::size_t row, std::span<const double> w) const;
  /// out += scale * x_row
  void axpy(std::size_t row, double scale, std::span<double> out) const;
  double value(std::size_t row, std::size_t col) const;

  template <typename F>
  void for_each_nonzero(std::size_t row, F&& f) const {
    if (sparse_) {
      for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) f(indices_[k], values_[k]);
    } else {
      const double* r = values_.data() + row * n_dims_;
      for (std::size_t j = 0; j < n_dims_; ++j)
        if (r[j] != 0.0) f(static_cast<std::uint32_t>(j), r[j]);
    }
  }

  std::vector<SparseEntry> row_entries(std::size_t row) const;
  std::vector<double> row_dense(std::size_t row) const;

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  FeatureMatrix to_dense() const;
  FeatureMatrix to_sparse() const;
  /// Removes the given columns' entries (dimensionality is kept).
  FeatureMatrix without_columns(std::span<const std::uint32_t> cols) const;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_dims_ = 0;
  bool sparse_ = false;
  std::vector<double> values_;
  std::vector<std::uint32_t> indices_;
  std::vector<std::size_t> row_ptr_;
};

/// Grouped positive-unlabeled data. `s` is the observed label, `y` the true
/// label (kUnknownLabel when absent) and `latent_p` the generator's
/// p(y=1|x,g), present only on generated data.
struct LabeledDataset {
  FeatureMatrix features;
  std::vector<GroupId> group;
  std::vector<std::string> group_names;
  std::vector<std::uint8_t> s;
  std::vector<std::int8_t> y;
  std::optional<std::vector<double>> latent_p;

  std::size_t size() const { return s.size(); }
  std::size_t n_dims() const { return features.n_dims(); }
  std::size_t n_groups() const { return group_names.size(); }

  /// True iff every row carries a known y.
  bool has_true_labels() const;
  std::optional<GroupId> find_group(std::string_view name) const;
  GroupId group_id(std::string_view name) const;
  std::size_t count_group(GroupId g) const;

  LabeledDataset subset(std::span<const std::size_t> rows) const;
  /// Rows of a single group, group table unchanged.
  LabeledDataset group_subset(GroupId g) const;

  /// Throws DatasetError when an invariant is broken (label domain, no false
  /// positives, row-count agreement, empty groups).
  void validate() const;
};

enum class FileFormat { dense_csv, sparse_pu };

/// Chooses the format from a path's extension: `.csv` is dense, anything else
/// sparse.
FileFormat format_for_path(const std::string& path);

LabeledDataset load_dataset(const std::string& path, FileFormat format);
LabeledDataset parse_dataset(std::string_view text, FileFormat format);
void write_dataset(const LabeledDataset& data, const std::string& path, FileFormat format);
std::string format_dataset(const LabeledDataset& data, FileFormat format);

struct SplitSpec {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  std::uint64_t seed = 0;
  std::size_t n_repeats = 5;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

struct DataSplit {
  LabeledDataset train, val, test;
};

/// Group-stratified shuffle split. Within each group, floor(n * val) and
/// floor(n * test) rows go to validation and test; the remainder to train.
SplitIndices split_indices(const LabeledDataset& data, const SplitSpec& spec, std::size_t repeat_index);
DataSplit split(const LabeledDataset& data, const SplitSpec& spec, std::size_t repeat_index);

struct GroupSummary {
  std::string name;
  std::size_t n = 0;
  std::size_t positives = 0;
  double observed_rate = 0.0;
};

std::vector<GroupSummary> group_summary(const LabeledDataset& data);

}  // namespace purple
