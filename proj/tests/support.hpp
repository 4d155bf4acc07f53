#pragma once

#include <vector>

#include "purple/dataset.hpp"

namespace testing_support {

using purple::GroupId;
using purple::LabeledDataset;

/// Dense dataset from explicit columns; y defaults to unknown.
inline LabeledDataset make_dense(std::size_t n_dims, std::vector<double> x, std::vector<GroupId> group,
                                 std::vector<std::uint8_t> s, std::vector<std::string> names = {"a", "b"},
                                 std::vector<std::int8_t> y = {}) {
  LabeledDataset d;
  const std::size_t n = s.size();
  d.features = purple::FeatureMatrix::dense(n, n_dims, std::move(x));
  d.group = std::move(group);
  d.group_names = std::move(names);
  d.s = std::move(s);
  d.y = std::move(y);
  return d;
}

}  // namespace testing_support
