#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tala/common.hpp"
#include "tala/nn.hpp"

TALA_NAMESPACE_BEGIN

struct FloretConfig {
  std::size_t buckets = 50000;
  std::size_t dim = 32;
  std::size_t min_n = 3;
  std::size_t max_n = 5;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr = 0.05;
  std::uint32_t hash_seed1 = 2166136261u;
  std::uint32_t hash_seed2 = 16777619u;
  std::uint64_t seed = 0;
};

/// Words and character n-grams share one bucket table; every key hashes to
/// two rows. A word vector is the mean over its keys of the two-row sums.
struct FloretTable {
  std::size_t buckets = 0;
  std::size_t dim = 0;
  std::size_t min_n = 3;
  std::size_t max_n = 5;
  std::uint32_t hash_seed1 = 0;
  std::uint32_t hash_seed2 = 0;
  Tensor weights;  // buckets x dim

  nlohmann::json metadata() const;
};

// Unique lookup keys for a word: "<word>" first, then the character n-grams
// of "<word>" for n in [min_n, max_n] in order of length and position.
std::vector<std::string> floret_keys(std::string_view word, std::size_t min_n, std::size_t max_n);

std::vector<Real> floret_lookup(std::string_view word, const FloretTable& table);

FloretTable make_floret_table(const FloretConfig& config);

// Skip-gram with negative sampling. `epoch_losses` receives the mean loss of
// every epoch when non-null.
FloretTable train_floret(const std::vector<std::vector<std::string>>& corpus,
                         const FloretConfig& config,
                         std::vector<double>* epoch_losses = nullptr);

// Writes <stem>.bin (weight blob) and <stem>.json (metadata).
void save_floret(const FloretTable& table, const std::string& stem);
FloretTable load_floret(const std::string& stem);

TALA_NAMESPACE_END
