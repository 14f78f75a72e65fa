#include "tala/train_loop.hpp"

#include <algorithm>
#include <numeric>

#include "tala/error.hpp"
#include "tala/random.hpp"

TALA_NAMESPACE_BEGIN

nlohmann::json TrainHistory::to_json() const {
  return {{"losses", losses}, {"dev_scores", dev_scores}, {"best_epoch", best_epoch},
          {"best_score", best_score}};
}

TrainHistory train_loop(ParamStore& store, std::size_t num_examples, const TrainConfig& config,
                        const std::function<double(std::size_t, double)>& example_loss,
                        const std::function<double()>& dev_score) {
  if (num_examples == 0) throw TrainingError("no training examples");
  if (config.batch_size == 0) throw ConfigError("batch_size must be positive");
  TrainHistory history;
  Rng rng(config.seed ^ 0xd1b54a32d192ed03ULL);
  std::vector<std::size_t> order(num_examples);
  std::iota(order.begin(), order.end(), 0);

  std::vector<Tensor> best;
  const auto snapshot = [&] {
    best.clear();
    for (const auto& p : store.params()) best.push_back(p.value);
  };
  snapshot();
  history.best_score = -1.0;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < num_examples; start += config.batch_size) {
      const std::size_t end = std::min(num_examples, start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      store.zero_grad();
      for (std::size_t i = start; i < end; ++i) loss_sum += example_loss(order[i], scale);
      adam_step(store, config.adam);
    }
    history.losses.push_back(loss_sum / static_cast<double>(num_examples));
    const double score = dev_score();
    history.dev_scores.push_back(score);
    if (score > history.best_score) {
      history.best_score = score;
      history.best_epoch = epoch;
      since_best = 0;
      snapshot();
    } else if (++since_best >= config.patience) {
      break;
    }
    if (config.stop_when_perfect && score >= 1.0) break;
  }
  for (std::size_t i = 0; i < best.size(); ++i) store[i].value = best[i];
  if (history.best_score < 0) history.best_score = 0.0;
  return history;
}

TALA_NAMESPACE_END
