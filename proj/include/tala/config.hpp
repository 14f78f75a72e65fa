#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tala/common.hpp"
#include "tala/floret.hpp"
#include "tala/ner.hpp"
#include "tala/parser.hpp"
#include "tala/pretrain.hpp"
#include "tala/tagger.hpp"
#include "tala/textcat.hpp"
#include "tala/tok2vec.hpp"
#include "tala/train_loop.hpp"

TALA_NAMESPACE_BEGIN

struct PathsSection {
  std::string treebank;         // CoNLL-U training treebank (tagger, parser)
  std::string treebank_dev;
  std::string treebank_test;
  std::string ner_train;        // IOB2
  std::string ner_dev;
  std::string ner_test;
  std::string textcat_train;    // JSON lines
  std::string textcat_dev;
  std::string textcat_test;
  std::string pretrain_corpus;  // raw text, one paragraph per line
  std::string vectors_corpus;   // raw text for floret training
  std::string init_tok2vec;     // weights produced by `pretrain`
  std::string vectors;          // stem of a saved floret table
  std::string output;           // model directory written by `train`
};

struct SystemSection {
  std::uint64_t seed = 0;
  std::string name = "tl_tala_md";
  std::string version = kVersion;
  std::string lang = "tl";
  std::string tier = "md";  // md or lg
};

struct PretrainingSection {
  bool enabled = false;
  std::size_t epochs = 5;
  std::size_t n_bytes = 4;
  std::size_t batch_size = 16;
  double lr = 0.001;
};

struct VectorsSection {
  bool enabled = false;  // true by default for the lg tier
  FloretConfig floret;
};

struct ComponentToggles {
  bool tagger = true;
  bool parser = true;
  bool ner = true;
  bool textcat = false;
};

struct TrainingSection {
  std::size_t epochs = 100;
  std::size_t patience = 10;
  std::size_t batch_size = 8;
  AdamConfig adam;
};

struct EvaluationSection {
  std::size_t folds = 10;
  std::size_t trials = 5;
  bool exclude_punct = false;
};

/// Fully resolved pipeline configuration. Every field has a value, so a
/// saved config.cfg reproduces the run without consulting any defaults.
struct PipelineConfig {
  PathsSection paths;
  SystemSection system;
  PretrainingSection pretraining;
  VectorsSection vectors;
  Tok2VecConfig tok2vec;
  ComponentToggles enabled;
  std::size_t parser_hidden = 128;
  std::size_t ner_hidden = 64;
  std::size_t textcat_buckets = kDefaultBowBuckets;
  std::size_t textcat_hidden = 64;
  std::vector<std::string> textcat_labels;
  TrainingSection training;
  EvaluationSection evaluation;

  TrainConfig train_config(std::uint64_t seed) const;
  PretrainConfig pretrain_config() const;
  TaggerConfig tagger_config(std::uint64_t seed) const;
  ParserConfig parser_config(std::uint64_t seed) const;
  NerConfig ner_config(std::uint64_t seed) const;
  TextcatConfig textcat_config(std::uint64_t seed) const;
  FloretConfig floret_config() const;
};

// Parses INI text: [section] headers, `key = value` lines, `#` or `;`
// comments. Unknown sections or keys, malformed values and duplicates throw
// ConfigError naming the line. Tier presets apply before explicit values.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);

// Canonical text of every section and key.
std::string format_config(const PipelineConfig& config);

TALA_NAMESPACE_END
