#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tala/common.hpp"
#include "tala/config.hpp"
#include "tala/corpus.hpp"
#include "tala/floret.hpp"
#include "tala/metrics.hpp"
#include "tala/ner.hpp"
#include "tala/parser.hpp"
#include "tala/tagger.hpp"
#include "tala/textcat.hpp"

TALA_NAMESPACE_BEGIN

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelsDirEnv = "TALA_MODELS_DIR";

/// Output of a pipeline run over one text.
struct AnnotatedDoc {
  std::string leading_ws;
  std::vector<Token> tokens;
  std::vector<std::size_t> sentence_starts;
  std::optional<std::vector<std::string>> upos;
  // Absolute token index of each head; a sentence root points at itself.
  std::optional<std::vector<int>> heads;
  std::optional<std::vector<std::string>> deprels;
  std::vector<Span> ents;
  std::map<std::string, double> cats;

  std::string text() const;
  // {tokens, upos, heads, deprels, ents: [{start, end, label}], cats}
  nlohmann::json to_json() const;
  friend bool operator==(const AnnotatedDoc&, const AnnotatedDoc&) = default;
};

/// Trained components in their fixed order tagger, parser, ner, textcat.
/// Each owns its tok2vec copy; a floret table, when present, is shared.
class Pipeline {
 public:
  PipelineConfig config;
  std::optional<TaggerModel> tagger;
  std::optional<ParserModel> parser;
  std::optional<NerModel> ner;
  std::optional<TextcatModel> textcat;
  std::shared_ptr<const FloretTable> vectors;

  std::vector<std::string> components() const;

  AnnotatedDoc apply(std::string_view text) const;
  // Pre-tokenized input; sentences are split as for raw text.
  AnnotatedDoc apply(const std::vector<Token>& tokens) const;

  nlohmann::json meta() const;
  // Writes meta.json, config.cfg, one <component>.bin per component and
  // vectors.bin/vectors.json when a floret table is used.
  void save(const std::string& dir) const;
  std::uint64_t fingerprint() const;
};

// Directories tried for a model name, in order: the name as a path,
// `models_dir`, $TALA_MODELS_DIR, ./models.
std::vector<std::string> model_search_paths(const std::string& name, const std::string& models_dir = "");

// Throws DataError listing the searched locations when nothing is found, and
// when the stored format version differs from kModelFormatVersion.
Pipeline load_pipeline(const std::string& path_or_name, const std::string& models_dir = "");

// Raw text, one paragraph per line, tokenized.
std::vector<std::vector<std::string>> read_text_corpus(const std::string& path);

struct SharedInit {
  std::shared_ptr<const FloretTable> vectors;
  std::optional<ParamStore> tok2vec;  // starting tok2vec.* weights
  std::vector<double> pretrain_losses;
  std::vector<double> vectors_losses;
};

struct TrainingData {
  Dataset treebank, treebank_dev;
  Dataset ner_train, ner_dev;
  Dataset textcat_train, textcat_dev;
};

// Reads every dataset the enabled components need. ConfigError when an
// enabled component has no training path.
TrainingData load_training_data(const PipelineConfig& config);

// Stages 1 and 2: floret vectors and tok2vec pretraining, as configured.
// Without a dedicated corpus they fall back to the words of `data`.
SharedInit prepare_shared(const PipelineConfig& config, const TrainingData& data, std::ostream* log = nullptr);

struct TrainedPipeline {
  Pipeline pipeline;
  nlohmann::json report;  // per-stage training histories
};

// Runs all stages and, when paths.output is set, saves the model there.
// A failing stage is rethrown with its name prepended.
TrainedPipeline train_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

struct EvaluationData {
  const Dataset* treebank = nullptr;
  const Dataset* ner = nullptr;
  const Dataset* textcat = nullptr;
};

// tagger.acc, parser.uas/las, ner.p/r/f1, textcat.acc/f1 for whichever
// component and dataset pairs are available.
MetricsReport evaluate_pipeline(const Pipeline& pipeline, const EvaluationData& data,
                                bool exclude_punct = false);

TALA_NAMESPACE_END
