#include "purple/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "purple/rng.hpp"

namespace purple {

ParseError::ParseError(std::size_t line, const std::string& what)
    : DatasetError("line " + std::to_string(line) + ": " + what), line_(line) {}

// ---------------------------------------------------------------------------
// FeatureMatrix

FeatureMatrix FeatureMatrix::dense(std::size_t n_rows, std::size_t n_dims, std::vector<double> values) {
  if (values.size() != n_rows * n_dims) throw DatasetError("dense matrix: value count does not match shape");
  FeatureMatrix m;
  m.n_rows_ = n_rows;
  m.n_dims_ = n_dims;
  m.sparse_ = false;
  m.values_ = std::move(values);
  return m;
}

FeatureMatrix FeatureMatrix::sparse(std::size_t n_dims, const std::vector<std::vector<SparseEntry>>& rows) {
  FeatureMatrix m;
  m.n_rows_ = rows.size();
  m.n_dims_ = n_dims;
  m.sparse_ = true;
  m.row_ptr_.reserve(rows.size() + 1);
  m.row_ptr_.push_back(0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t k = 0; k < rows[r].size(); ++k) {
      const auto& e = rows[r][k];
      if (e.index >= n_dims) throw DatasetError("sparse row " + std::to_string(r) + ": index out of range");
      if (k > 0 && rows[r][k - 1].index >= e.index)
        throw DatasetError("sparse row " + std::to_string(r) + ": indices must be strictly increasing");
      m.indices_.push_back(e.index);
      m.values_.push_back(e.value);
    }
    m.row_ptr_.push_back(m.indices_.size());
  }
  return m;
}

std::size_t FeatureMatrix::nnz() const {
  if (sparse_) return indices_.size();
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

double FeatureMatrix::dot(std::size_t row, std::span<const double> w) const {
  double acc = 0.0;
  if (sparse_) {
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) acc += values_[k] * w[indices_[k]];
  } else {
    const double* r = values_.data() + row * n_dims_;
    for (std::size_t j = 0; j < n_dims_; ++j) acc += r[j] * w[j];
  }
  return acc;
}

void FeatureMatrix::axpy(std::size_t row, double scale, std::span<double> out) const {
  if (sparse_) {
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) out[indices_[k]] += scale * values_[k];
  } else {
    const double* r = values_.data() + row * n_dims_;
    for (std::size_t j = 0; j < n_dims_; ++j) out[j] += scale * r[j];
  }
}

double FeatureMatrix::value(std::size_t row, std::size_t col) const {
  if (!sparse_) return values_[row * n_dims_ + col];
  auto first = indices_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  auto last = indices_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(col));
  if (it == last || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - indices_.begin())];
}

std::vector<SparseEntry> FeatureMatrix::row_entries(std::size_t row) const {
  std::vector<SparseEntry> out;
  for_each_nonzero(row, [&](std::uint32_t j, double v) { out.push_back({j, v}); });
  return out;
}

std::vector<double> FeatureMatrix::row_dense(std::size_t row) const {
  std::vector<double> out(n_dims_, 0.0);
  for_each_nonzero(row, [&](std::uint32_t j, double v) { out[j] = v; });
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  if (!sparse_) {
    std::vector<double> vals;
    vals.reserve(rows.size() * n_dims_);
    for (std::size_t r : rows) {
      auto first = values_.begin() + static_cast<std::ptrdiff_t>(r * n_dims_);
      vals.insert(vals.end(), first, first + static_cast<std::ptrdiff_t>(n_dims_));
    }
    return dense(rows.size(), n_dims_, std::move(vals));
  }
  FeatureMatrix m;
  m.n_rows_ = rows.size();
  m.n_dims_ = n_dims_;
  m.sparse_ = true;
  m.row_ptr_.reserve(rows.size() + 1);
  m.row_ptr_.push_back(0);
  for (std::size_t r : rows) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      m.indices_.push_back(indices_[k]);
      m.values_.push_back(values_[k]);
    }
    m.row_ptr_.push_back(m.indices_.size());
  }
  return m;
}

FeatureMatrix FeatureMatrix::to_dense() const {
  if (!sparse_) return *this;
  std::vector<double> vals(n_rows_ * n_dims_, 0.0);
  for (std::size_t r = 0; r < n_rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) vals[r * n_dims_ + indices_[k]] = values_[k];
  return dense(n_rows_, n_dims_, std::move(vals));
}

FeatureMatrix FeatureMatrix::to_sparse() const {
  if (sparse_) return *this;
  std::vector<std::vector<SparseEntry>> rows(n_rows_);
  for (std::size_t r = 0; r < n_rows_; ++r) rows[r] = row_entries(r);
  return sparse(n_dims_, rows);
}

FeatureMatrix FeatureMatrix::without_columns(std::span<const std::uint32_t> cols) const {
  std::vector<bool> drop(n_dims_, false);
  for (auto c : cols)
    if (c < n_dims_) drop[c] = true;
  if (!sparse_) {
    FeatureMatrix m = *this;
    for (std::size_t r = 0; r < n_rows_; ++r)
      for (std::size_t j = 0; j < n_dims_; ++j)
        if (drop[j]) m.values_[r * n_dims_ + j] = 0.0;
    return m;
  }
  std::vector<std::vector<SparseEntry>> rows(n_rows_);
  for (std::size_t r = 0; r < n_rows_; ++r)
    for_each_nonzero(r, [&](std::uint32_t j, double v) {
      if (!drop[j]) rows[r].push_back({j, v});
    });
  return sparse(n_dims_, rows);
}

// ---------------------------------------------------------------------------
// LabeledDataset

bool LabeledDataset::has_true_labels() const {
  return !y.empty() && std::none_of(y.begin(), y.end(), [](std::int8_t v) { return v == kUnknownLabel; });
}

std::optional<GroupId> LabeledDataset::find_group(std::string_view name) const {
  for (std::size_t g = 0; g < group_names.size(); ++g)
    if (group_names[g] == name) return static_cast<GroupId>(g);
  return std::nullopt;
}

GroupId LabeledDataset::group_id(std::string_view name) const {
  auto g = find_group(name);
  if (!g) throw DatasetError("unknown group '" + std::string(name) + "'");
  return *g;
}

std::size_t LabeledDataset::count_group(GroupId g) const {
  return static_cast<std::size_t>(std::count(group.begin(), group.end(), g));
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.features = features.select_rows(rows);
  out.group_names = group_names;
  out.group.reserve(rows.size());
  out.s.reserve(rows.size());
  if (!y.empty()) out.y.reserve(rows.size());
  if (latent_p) out.latent_p.emplace().reserve(rows.size());
  for (std::size_t r : rows) {
    out.group.push_back(group[r]);
    out.s.push_back(s[r]);
    if (!y.empty()) out.y.push_back(y[r]);
    if (latent_p) out.latent_p->push_back((*latent_p)[r]);
  }
  return out;
}

LabeledDataset LabeledDataset::group_subset(GroupId g) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < group.size(); ++i)
    if (group[i] == g) rows.push_back(i);
  return subset(rows);
}

void LabeledDataset::validate() const {
  const std::size_t n = s.size();
  if (features.n_rows() != n || group.size() != n) throw DatasetError("column lengths disagree");
  if (!y.empty() && y.size() != n) throw DatasetError("y column length disagrees");
  if (latent_p && latent_p->size() != n) throw DatasetError("latent_p column length disagrees");
  std::vector<std::size_t> counts(group_names.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (s[i] > 1) throw DatasetError("row " + std::to_string(i) + ": s must be 0 or 1");
    if (group[i] >= group_names.size()) throw DatasetError("row " + std::to_string(i) + ": group id out of range");
    ++counts[group[i]];
    if (!y.empty()) {
      if (y[i] != 0 && y[i] != 1 && y[i] != kUnknownLabel)
        throw DatasetError("row " + std::to_string(i) + ": y must be 0, 1 or unknown");
      if (s[i] == 1 && y[i] == 0) throw DatasetError("row " + std::to_string(i) + ": s=1 with y=0");
    }
  }
  for (std::size_t g = 0; g < counts.size(); ++g)
    if (counts[g] == 0) throw DatasetError("group '" + group_names[g] + "' has no rows");
}

// ---------------------------------------------------------------------------
// File I/O

namespace {

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view v) {
  while (!v.empty() && (v.front() == ' ' || v.front() == '\t' || v.front() == '\r')) v.remove_prefix(1);
  while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.remove_suffix(1);
  return v;
}

double parse_real(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError(line, "not a finite number: '" + std::string(tok) + "'");
  return v;
}

std::uint64_t parse_count(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, "not a non-negative integer: '" + std::string(tok) + "'");
  return v;
}

std::uint8_t parse_s(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  if (tok == "0") return 0;
  if (tok == "1") return 1;
  throw ParseError(line, "s must be 0 or 1, got '" + std::string(tok) + "'");
}

std::int8_t parse_y(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  if (tok == "?") return kUnknownLabel;
  if (tok == "0") return 0;
  if (tok == "1") return 1;
  throw ParseError(line, "y must be 0, 1 or ?, got '" + std::string(tok) + "'");
}

class GroupTable {
 public:
  GroupId intern(std::string_view name, std::size_t line) {
    name = trim(name);
    if (name.empty()) throw ParseError(line, "empty group name");
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    GroupId id = static_cast<GroupId>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(std::string(name), id);
    return id;
  }
  std::vector<std::string> take() { return std::move(names_); }

 private:
  std::vector<std::string> names_;
  std::map<std::string, GroupId> ids_;
};

void finish(LabeledDataset& data) {
  if (std::all_of(data.y.begin(), data.y.end(), [](std::int8_t v) { return v == kUnknownLabel; })) data.y.clear();
  for (std::size_t i = 0; i < data.y.size(); ++i)
    if (data.s[i] == 1 && data.y[i] == 0)
      throw DatasetError("row " + std::to_string(i) + ": s=1 with y=0 violates no-false-positives");
}

LabeledDataset parse_dense(std::string_view text) {
  LabeledDataset data;
  GroupTable groups;
  std::vector<double> values;
  std::size_t line_no = 0;
  std::size_t dims = 0;
  bool header_seen = false;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto cols = split_on(line, ',');
    if (!header_seen) {
      if (cols.size() < 3 || trim(cols[0]) != "g" || trim(cols[1]) != "s" || trim(cols[2]) != "y")
        throw ParseError(line_no, "header must start with g,s,y");
      for (std::size_t j = 3; j < cols.size(); ++j)
        if (trim(cols[j]) != "x" + std::to_string(j - 3))
          throw ParseError(line_no, "expected feature column x" + std::to_string(j - 3));
      dims = cols.size() - 3;
      header_seen = true;
      continue;
    }
    if (cols.size() != dims + 3)
      throw ParseError(line_no, "expected " + std::to_string(dims + 3) + " fields, got " + std::to_string(cols.size()));
    data.group.push_back(groups.intern(cols[0], line_no));
    data.s.push_back(parse_s(cols[1], line_no));
    data.y.push_back(parse_y(cols[2], line_no));
    for (std::size_t j = 0; j < dims; ++j) values.push_back(parse_real(cols[j + 3], line_no));
  }
  if (!header_seen) throw ParseError(line_no, "missing header");
  data.features = FeatureMatrix::dense(data.s.size(), dims, std::move(values));
  data.group_names = groups.take();
  finish(data);
  return data;
}

LabeledDataset parse_sparse(std::string_view text) {
  LabeledDataset data;
  GroupTable groups;
  std::vector<std::vector<SparseEntry>> rows;
  std::size_t line_no = 0;
  std::size_t dims = 0;
  bool header_seen = false;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      constexpr std::string_view prefix = "#sparse d=";
      if (line.substr(0, prefix.size()) != prefix) throw ParseError(line_no, "header must be '#sparse d=<dims>'");
      dims = parse_count(line.substr(prefix.size()), line_no);
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> toks;
    for (auto t : split_on(line, ' '))
      if (!trim(t).empty()) toks.push_back(t);
    if (toks.size() < 3) throw ParseError(line_no, "expected '<g> <s> <y|?>' followed by features");
    data.group.push_back(groups.intern(toks[0], line_no));
    data.s.push_back(parse_s(toks[1], line_no));
    data.y.push_back(parse_y(toks[2], line_no));
    std::vector<SparseEntry> row;
    for (std::size_t k = 3; k < toks.size(); ++k) {
      auto colon = toks[k].find(':');
      if (colon == std::string_view::npos) throw ParseError(line_no, "feature must be '<index>:<value>'");
      auto idx = parse_count(toks[k].substr(0, colon), line_no);
      if (idx >= dims) throw ParseError(line_no, "feature index " + std::to_string(idx) + " out of range");
      if (!row.empty() && row.back().index >= idx) throw ParseError(line_no, "feature indices must be ascending");
      row.push_back({static_cast<std::uint32_t>(idx), parse_real(toks[k].substr(colon + 1), line_no)});
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError(line_no, "missing header");
  data.features = FeatureMatrix::sparse(dims, rows);
  data.group_names = groups.take();
  finish(data);
  return data;
}

std::string format_real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_y(const LabeledDataset& data, std::size_t i) {
  if (data.y.empty() || data.y[i] == kUnknownLabel) return "?";
  return data.y[i] ? "1" : "0";
}

}  // namespace

FileFormat format_for_path(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".csv") return FileFormat::dense_csv;
  return FileFormat::sparse_pu;
}

LabeledDataset parse_dataset(std::string_view text, FileFormat format) {
  return format == FileFormat::dense_csv ? parse_dense(text) : parse_sparse(text);
}

LabeledDataset load_dataset(const std::string& path, FileFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), format);
}

std::string format_dataset(const LabeledDataset& data, FileFormat format) {
  std::string out;
  const std::size_t d = data.n_dims();
  if (format == FileFormat::dense_csv) {
    out += "g,s,y";
    for (std::size_t j = 0; j < d; ++j) out += ",x" + std::to_string(j);
    out += '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
      out += data.group_names[data.group[i]];
      out += data.s[i] ? ",1," : ",0,";
      out += format_y(data, i);
      auto row = data.features.row_dense(i);
      for (double v : row) {
        out += ',';
        out += format_real(v);
      }
      out += '\n';
    }
    return out;
  }
  out += "#sparse d=" + std::to_string(d) + "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += data.group_names[data.group[i]];
    out += data.s[i] ? " 1 " : " 0 ";
    out += format_y(data, i);
    data.features.for_each_nonzero(i, [&](std::uint32_t j, double v) {
      out += ' ';
      out += std::to_string(j);
      out += ':';
      out += format_real(v);
    });
    out += '\n';
  }
  return out;
}

void write_dataset(const LabeledDataset& data, const std::string& path, FileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write " + path);
  out << format_dataset(data, format);
  if (!out) throw DatasetError("write failed for " + path);
}

// ---------------------------------------------------------------------------
// Splitting

void SplitSpec::validate() const {
  for (double f : {train, val, test})
    if (!(f > 0.0 && f < 1.0)) throw DatasetError("split fractions must lie in (0,1)");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw DatasetError("split fractions must sum to 1");
  if (n_repeats == 0) throw DatasetError("n_repeats must be positive");
}

SplitIndices split_indices(const LabeledDataset& data, const SplitSpec& spec, std::size_t repeat_index) {
  spec.validate();
  if (repeat_index >= spec.n_repeats) throw DatasetError("repeat_index out of range");
  std::vector<std::vector<std::size_t>> by_group(data.n_groups());
  for (std::size_t i = 0; i < data.size(); ++i) by_group[data.group[i]].push_back(i);

  Engine rng(derive_seed(spec.seed, {stream_tag("split"), repeat_index}));
  SplitIndices out;
  for (std::size_t g = 0; g < by_group.size(); ++g) {
    auto& rows = by_group[g];
    if (rows.size() < 3)
      throw DatasetError("group '" + data.group_names[g] + "' has fewer than 3 rows; cannot stratify");
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n = rows.size();
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.val + 1e-9));
    const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test + 1e-9));
    const auto n_train = n - n_val - n_test;
    out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val.insert(out.val.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train),
                   rows.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test.insert(out.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

DataSplit split(const LabeledDataset& data, const SplitSpec& spec, std::size_t repeat_index) {
  auto idx = split_indices(data, spec, repeat_index);
  return {data.subset(idx.train), data.subset(idx.val), data.subset(idx.test)};
}

std::vector<GroupSummary> group_summary(const LabeledDataset& data) {
  std::vector<GroupSummary> out(data.n_groups());
  for (std::size_t g = 0; g < out.size(); ++g) out[g].name = data.group_names[g];
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& sum = out[data.group[i]];
    ++sum.n;
    sum.positives += data.s[i];
  }
  std::erase_if(out, [](const GroupSummary& g) { return g.n == 0; });
  for (auto& g : out) g.observed_rate = static_cast<double>(g.positives) / static_cast<double>(g.n);
  return out;
}

}  // namespace purple
