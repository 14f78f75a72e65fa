#include "tala/benchmark.hpp"

#include <ostream>

#include "tala/error.hpp"
#include "tala/pipeline.hpp"

TALA_NAMESPACE_BEGIN

namespace {

struct HeldOut {
  Dataset train, dev, test;
};

HeldOut held_out(const Dataset& train, const Dataset& dev, const std::string& test_path,
                 Dataset (*read)(const std::string&), std::uint64_t seed) {
  if (!test_path.empty()) return {train, dev, read(test_path)};
  HoldoutSplit split = holdout_split(train, SplitRatios{}, seed);
  return {std::move(split.train), std::move(split.dev), std::move(split.test)};
}

Dataset read_iob_dataset(const std::string& path) { return read_iob_file(path).dataset; }

}  // namespace

MetricsReport run_benchmark(const PipelineConfig& config, std::ostream* log) {
  const TrainingData data = load_training_data(config);
  const SharedInit shared = prepare_shared(config, data, log);
  const ParamStore* init = shared.tok2vec ? &*shared.tok2vec : nullptr;
  const std::uint64_t seed = config.system.seed;
  const auto& ev = config.evaluation;
  MetricsReport report;

  if (config.enabled.tagger || config.enabled.parser) {
    const auto folds = kfold_split(data.treebank, ev.folds, seed);
    const auto sizes = kfold_sizes(data.treebank.size(), ev.folds);
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const Dataset none;
      if (config.enabled.tagger) {
        const auto r = train_tagger(folds[f].train, none, config.tagger_config(seed + f), init, shared.vectors);
        report.add("tagger.acc", tagger_accuracy(r.model, folds[f].test), "fold");
      }
      if (config.enabled.parser) {
        const auto r = train_parser(folds[f].train, none, config.parser_config(seed + f), init, shared.vectors);
        const auto s = parser_scores(r.model, folds[f].test, ev.exclude_punct);
        report.add("parser.uas", s.uas, "fold");
        report.add("parser.las", s.las, "fold");
      }
      if (log) *log << "fold " << f + 1 << "/" << folds.size() << " done\n";
    }
    for (const char* m : {"tagger.acc", "parser.uas", "parser.las"}) {
      if (report.contains(m)) report.metrics[m].fold_sizes = sizes;
    }
  }

  for (std::size_t t = 0; t < ev.trials; ++t) {
    const std::uint64_t trial_seed = seed + t;
    if (config.enabled.ner) {
      const HeldOut d =
          held_out(data.ner_train, data.ner_dev, config.paths.ner_test, &read_iob_dataset, trial_seed);
      const auto r = train_ner(d.train, d.dev, config.ner_config(trial_seed), init, shared.vectors);
      const PRF s = ner_scores(r.model, d.test);
      report.add("ner.p", s.precision);
      report.add("ner.r", s.recall);
      report.add("ner.f1", s.f1);
    }
    if (config.enabled.textcat) {
      const HeldOut d = held_out(data.textcat_train, data.textcat_dev, config.paths.textcat_test,
                                 &read_textcat_jsonl_file, trial_seed);
      const auto r = train_textcat(d.train, d.dev, config.textcat_config(trial_seed), init, shared.vectors);
      const auto s = textcat_scores(r.model, d.test);
      report.add("textcat.acc", s.accuracy);
      report.add("textcat.f1", s.macro_f1);
    }
    if (log && (config.enabled.ner || config.enabled.textcat))
      *log << "trial " << t + 1 << "/" << ev.trials << " done\n";
  }
  for (const char* m : {"ner.p", "ner.r", "ner.f1"}) {
    if (report.contains(m)) report.metrics[m].convention = kSpanConvention;
  }
  return report;
}

TALA_NAMESPACE_END
