#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tala/common.hpp"
#include "tala/error.hpp"

TALA_NAMESPACE_BEGIN

/// Ordered label inventory with a reverse index. Order is fixed at
/// construction and is what the output layers and serialized models use.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> labels) {
    for (auto& l : labels) add(std::move(l));
  }

  // Sorted, de-duplicated inventory.
  template <typename Range>
  static LabelSet sorted_from(const Range& labels) {
    std::vector<std::string> v(labels.begin(), labels.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return LabelSet(std::move(v));
  }

  std::size_t add(std::string label) {
    if (auto it = index_.find(label); it != index_.end()) return it->second;
    index_.emplace(label, labels_.size());
    labels_.push_back(std::move(label));
    return labels_.size() - 1;
  }

  std::optional<std::size_t> find(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t at(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw DataError("unknown label '" + label + "'");
    return it->second;
  }

  const std::string& operator[](std::size_t i) const { return labels_[i]; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const LabelSet& a, const LabelSet& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, std::size_t> index_;
};

TALA_NAMESPACE_END
