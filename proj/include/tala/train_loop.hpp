#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "tala/common.hpp"
#include "tala/nn.hpp"

TALA_NAMESPACE_BEGIN

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t patience = 10;
  std::size_t batch_size = 8;
  AdamConfig adam;
  std::uint64_t seed = 0;
  // A dev score of 1.0 cannot improve, so training ends there.
  bool stop_when_perfect = true;
};

struct TrainHistory {
  std::vector<double> losses;      // mean example loss per epoch
  std::vector<double> dev_scores;  // per epoch
  std::size_t best_epoch = 0;      // 1-based; 0 when no epoch ran
  double best_score = 0.0;

  nlohmann::json to_json() const;
};

// Minibatch Adam with early stopping. `example_loss(i, scale)` adds the
// gradient of scale * loss_i into the store and returns loss_i. The store is
// left holding the weights of the best dev epoch.
TrainHistory train_loop(ParamStore& store, std::size_t num_examples, const TrainConfig& config,
                        const std::function<double(std::size_t, double)>& example_loss,
                        const std::function<double()>& dev_score);

TALA_NAMESPACE_END
