#include "tala/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tala/error.hpp"
#include "tala/pretrain.hpp"
#include "tala/tokenizer.hpp"

TALA_NAMESPACE_BEGIN

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// AnnotatedDoc

std::string AnnotatedDoc::text() const { return detokenize(TokenizedText{leading_ws, tokens}); }

nlohmann::json AnnotatedDoc::to_json() const {
  nlohmann::json j;
  std::vector<std::string> words;
  for (const auto& t : tokens) words.push_back(t.text);
  j["tokens"] = words;
  j["upos"] = upos ? nlohmann::json(*upos) : nlohmann::json(nullptr);
  j["heads"] = heads ? nlohmann::json(*heads) : nlohmann::json(nullptr);
  j["deprels"] = deprels ? nlohmann::json(*deprels) : nlohmann::json(nullptr);
  j["ents"] = nlohmann::json::array();
  for (const auto& e : ents) j["ents"].push_back({{"start", e.start}, {"end", e.end}, {"label", e.label}});
  j["cats"] = nlohmann::json::object();
  for (const auto& [label, p] : cats) j["cats"][label] = p;
  return j;
}

// ---------------------------------------------------------------------------
// Pipeline

std::vector<std::string> Pipeline::components() const {
  std::vector<std::string> out;
  if (tagger) out.emplace_back("tagger");
  if (parser) out.emplace_back("parser");
  if (ner) out.emplace_back("ner");
  if (textcat) out.emplace_back("textcat");
  return out;
}

AnnotatedDoc Pipeline::apply(std::string_view text) const {
  TokenizedText tok = tokenize(text);
  AnnotatedDoc doc = apply(tok.tokens);
  doc.leading_ws = std::move(tok.leading_ws);
  return doc;
}

AnnotatedDoc Pipeline::apply(const std::vector<Token>& tokens) const {
  AnnotatedDoc doc;
  doc.tokens = tokens;
  doc.sentence_starts = sentence_starts(tokens);
  if (tagger) doc.upos.emplace();
  if (parser) {
    doc.heads.emplace();
    doc.deprels.emplace();
  }
  std::vector<std::string> all_words;
  all_words.reserve(tokens.size());
  for (const auto& t : tokens) all_words.push_back(t.text);

  for (std::size_t s = 0; s < doc.sentence_starts.size(); ++s) {
    const std::size_t start = doc.sentence_starts[s];
    const std::size_t end = s + 1 < doc.sentence_starts.size() ? doc.sentence_starts[s + 1] : tokens.size();
    const std::vector<std::string> words(all_words.begin() + static_cast<std::ptrdiff_t>(start),
                                         all_words.begin() + static_cast<std::ptrdiff_t>(end));
    if (tagger) {
      const auto tags = tagger->tag(words);
      doc.upos->insert(doc.upos->end(), tags.begin(), tags.end());
    }
    if (parser) {
      const ParseResult r = parser->parse(words);
      for (std::size_t i = 0; i < words.size(); ++i) {
        const int h = r.heads[i] == kRootHead ? static_cast<int>(i) : r.heads[i];
        doc.heads->push_back(static_cast<int>(start) + h);
      }
      doc.deprels->insert(doc.deprels->end(), r.deprels.begin(), r.deprels.end());
    }
    if (ner) {
      for (const Span& e : ner->decode(words).spans) doc.ents.push_back({start + e.start, start + e.end, e.label});
    }
  }
  if (textcat) {
    const auto out = textcat->classify(all_words);
    for (std::size_t c = 0; c < out.probs.size(); ++c) doc.cats[textcat->labels()[c]] = out.probs[c];
  }
  return doc;
}

nlohmann::json Pipeline::meta() const {
  nlohmann::json labels = nlohmann::json::object();
  if (tagger) labels["tagger"] = tagger->tags().labels();
  if (parser) labels["parser"] = parser->deprels().labels();
  if (ner) labels["ner"] = ner->types().labels();
  if (textcat) labels["textcat"] = textcat->labels().labels();
  nlohmann::json j = {{"name", config.system.name},
                      {"version", config.system.version},
                      {"lang", config.system.lang},
                      {"tier", config.system.tier},
                      {"format_version", kModelFormatVersion},
                      {"tala_version", kVersion},
                      {"components", components()},
                      {"labels", labels},
                      {"vectors", vectors ? vectors->metadata() : nlohmann::json(nullptr)}};
  if (parser) j["parser_actions"] = parser->action_inventory();
  const Tok2Vec* t2v = tagger ? &tagger->tok2vec()
                       : parser ? &parser->tok2vec()
                       : ner    ? &ner->tok2vec()
                       : textcat ? &textcat->tok2vec()
                                 : nullptr;
  if (t2v) j["tok2vec"] = t2v->metadata();
  return j;
}

void Pipeline::save(const std::string& dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create model directory '" + dir + "': " + ec.message());
  const fs::path root(dir);
  {
    std::ofstream out(root / "meta.json");
    out << meta().dump(2) << '\n';
    if (!out) throw DataError("cannot write " + (root / "meta.json").string());
  }
  {
    std::ofstream out(root / "config.cfg");
    out << format_config(config);
    if (!out) throw DataError("cannot write " + (root / "config.cfg").string());
  }
  if (tagger) save_weights_file((root / "tagger.bin").string(), tagger->params());
  if (parser) save_weights_file((root / "parser.bin").string(), parser->params());
  if (ner) save_weights_file((root / "ner.bin").string(), ner->params());
  if (textcat) save_weights_file((root / "textcat.bin").string(), textcat->params());
  if (vectors) save_floret(*vectors, (root / "vectors").string());
}

std::uint64_t Pipeline::fingerprint() const {
  std::uint64_t h = 0;
  const auto mix = [&](std::uint64_t v) { h = (h ^ v) * 0x100000001b3ULL + 0x9e3779b97f4a7c15ULL; };
  if (tagger) mix(weights_fingerprint(tagger->params()));
  if (parser) mix(weights_fingerprint(parser->params()));
  if (ner) mix(weights_fingerprint(ner->params()));
  if (textcat) mix(weights_fingerprint(textcat->params()));
  if (vectors) {
    ParamStore s;
    s.add("vectors", vectors->weights);
    mix(weights_fingerprint(s));
  }
  return h;
}

std::vector<std::string> model_search_paths(const std::string& name, const std::string& models_dir) {
  std::vector<std::string> out{name};
  if (!models_dir.empty()) out.push_back((fs::path(models_dir) / name).string());
  if (const char* env = std::getenv(kModelsDirEnv); env && *env) out.push_back((fs::path(env) / name).string());
  out.push_back((fs::path("models") / name).string());
  return out;
}

namespace {

LabelSet labels_of(const nlohmann::json& meta, const char* component) {
  return LabelSet(meta.at("labels").at(component).get<std::vector<std::string>>());
}

}  // namespace

Pipeline load_pipeline(const std::string& path_or_name, const std::string& models_dir) {
  const auto candidates = model_search_paths(path_or_name, models_dir);
  std::string dir;
  for (const auto& c : candidates) {
    if (fs::is_regular_file(fs::path(c) / "meta.json")) {
      dir = c;
      break;
    }
  }
  if (dir.empty()) {
    std::string msg = "model '" + path_or_name + "' not found; searched:";
    for (const auto& c : candidates) msg += "\n  " + c;
    throw DataError(msg);
  }
  const fs::path root(dir);
  nlohmann::json meta;
  try {
    std::ifstream in(root / "meta.json");
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid meta.json in '" + dir + "': " + e.what());
  }
  const int version = meta.value("format_version", -1);
  if (version != kModelFormatVersion)
    throw DataError("model '" + dir + "' has format version " + std::to_string(version) + ", expected " +
                    std::to_string(kModelFormatVersion));

  Pipeline p;
  p.config = load_config((root / "config.cfg").string());
  if (!meta.at("vectors").is_null()) {
    p.vectors = std::make_shared<const FloretTable>(load_floret((root / "vectors").string()));
  }
  const auto& cfg = p.config;
  try {
    for (const auto& c : meta.at("components")) {
      const std::string name = c.get<std::string>();
      const std::string blob = (root / (name + ".bin")).string();
      if (name == "tagger") {
        p.tagger.emplace(cfg.tok2vec, labels_of(meta, "tagger"), 0, p.vectors);
        load_weights_file(blob, p.tagger->params());
      } else if (name == "parser") {
        p.parser.emplace(cfg.tok2vec, labels_of(meta, "parser"), cfg.parser_hidden, 0, p.vectors);
        load_weights_file(blob, p.parser->params());
      } else if (name == "ner") {
        p.ner.emplace(cfg.tok2vec, labels_of(meta, "ner"), cfg.ner_hidden, 0, p.vectors);
        load_weights_file(blob, p.ner->params());
      } else if (name == "textcat") {
        p.textcat.emplace(cfg.tok2vec, labels_of(meta, "textcat"), cfg.textcat_buckets, cfg.textcat_hidden, 0,
                          p.vectors);
        load_weights_file(blob, p.textcat->params());
      } else {
        throw DataError("unknown component '" + name + "' in " + (root / "meta.json").string());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid meta.json in '" + dir + "': " + e.what());
  }
  return p;
}

// ---------------------------------------------------------------------------
// Training

std::vector<std::vector<std::string>> read_text_corpus(const std::string& path) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (path != "-") {
    file.open(path);
    if (!file) throw DataError("cannot open '" + path + "'");
    in = &file;
  }
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(*in, line)) {
    std::vector<std::string> words;
    for (const auto& t : tokenize(line).tokens) words.push_back(t.text);
    if (!words.empty()) out.push_back(std::move(words));
  }
  return out;
}

namespace {

template <typename F>
auto run_stage(const std::string& name, F&& f) -> decltype(f()) {
  const std::string prefix = "stage '" + name + "': ";
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const TrainingError& e) {
    throw TrainingError(prefix + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

void require_path(bool enabled, const std::string& path, const char* component, const char* key) {
  if (enabled && path.empty())
    throw ConfigError(std::string("components.") + component + " is enabled but paths." + key + " is empty");
}

std::vector<std::vector<std::string>> fallback_corpus(const TrainingData& data) {
  std::vector<std::vector<std::string>> out;
  for (const Dataset* ds : {&data.treebank, &data.ner_train, &data.textcat_train}) {
    for (const auto& s : ds->sentences) {
      if (!s.tokens.empty()) out.push_back(s.words());
    }
  }
  return out;
}

void log_history(std::ostream* log, const std::string& stage, const TrainHistory& h) {
  if (!log) return;
  *log << stage << ": " << h.losses.size() << " epochs, best dev score " << h.best_score << " at epoch "
       << h.best_epoch << '\n';
}

}  // namespace

TrainingData load_training_data(const PipelineConfig& config) {
  const auto& p = config.paths;
  const auto& on = config.enabled;
  require_path(on.tagger || on.parser, p.treebank, on.tagger ? "tagger" : "parser", "treebank");
  require_path(on.ner, p.ner_train, "ner", "ner_train");
  require_path(on.textcat, p.textcat_train, "textcat", "textcat_train");
  TrainingData d;
  if (on.tagger || on.parser) {
    d.treebank = read_conllu_file(p.treebank);
    if (!p.treebank_dev.empty()) d.treebank_dev = read_conllu_file(p.treebank_dev);
  }
  if (on.ner) {
    d.ner_train = read_iob_file(p.ner_train).dataset;
    if (!p.ner_dev.empty()) d.ner_dev = read_iob_file(p.ner_dev).dataset;
  }
  if (on.textcat) {
    d.textcat_train = read_textcat_jsonl_file(p.textcat_train);
    if (!p.textcat_dev.empty()) d.textcat_dev = read_textcat_jsonl_file(p.textcat_dev);
  }
  return d;
}

SharedInit prepare_shared(const PipelineConfig& config, const TrainingData& data, std::ostream* log) {
  SharedInit shared;
  run_stage("vectors", [&] {
    if (!config.paths.vectors.empty()) {
      shared.vectors = std::make_shared<const FloretTable>(load_floret(config.paths.vectors));
    } else if (config.vectors.enabled) {
      const auto corpus = config.paths.vectors_corpus.empty() ? fallback_corpus(data)
                                                              : read_text_corpus(config.paths.vectors_corpus);
      shared.vectors = std::make_shared<const FloretTable>(
          train_floret(corpus, config.floret_config(), &shared.vectors_losses));
      if (log) *log << "vectors: " << shared.vectors_losses.size() << " epochs\n";
    }
  });
  run_stage("pretraining", [&] {
    if (!config.paths.init_tok2vec.empty()) {
      ParamStore store = init_tok2vec_store(config.tok2vec, config.system.seed, shared.vectors);
      load_weights_file(config.paths.init_tok2vec, store);
      shared.tok2vec = std::move(store);
    } else if (config.pretraining.enabled) {
      const auto corpus = config.paths.pretrain_corpus.empty() ? fallback_corpus(data)
                                                               : read_text_corpus(config.paths.pretrain_corpus);
      PretrainResult r = pretrain(corpus, config.tok2vec, config.pretrain_config(), shared.vectors);
      shared.pretrain_losses = r.epoch_losses;
      shared.tok2vec = std::move(r.store);
      if (log) *log << "pretraining: " << shared.pretrain_losses.size() << " epochs\n";
    }
  });
  return shared;
}

TrainedPipeline train_pipeline(const PipelineConfig& config, std::ostream* log) {
  const TrainingData data = run_stage("data", [&] { return load_training_data(config); });
  const SharedInit shared = prepare_shared(config, data, log);
  const ParamStore* init = shared.tok2vec ? &*shared.tok2vec : nullptr;
  const std::uint64_t seed = config.system.seed;

  TrainedPipeline out;
  Pipeline& p = out.pipeline;
  p.config = config;
  p.vectors = shared.vectors;
  out.report = nlohmann::json::object();
  if (!shared.vectors_losses.empty()) out.report["vectors"] = {{"losses", shared.vectors_losses}};
  if (!shared.pretrain_losses.empty()) out.report["pretraining"] = {{"losses", shared.pretrain_losses}};

  if (config.enabled.tagger) {
    auto r = run_stage("tagger", [&] {
      return train_tagger(data.treebank, data.treebank_dev, config.tagger_config(seed), init, p.vectors);
    });
    log_history(log, "tagger", r.history);
    out.report["tagger"] = r.history.to_json();
    p.tagger = std::move(r.model);
  }
  if (config.enabled.parser) {
    auto r = run_stage("parser", [&] {
      return train_parser(data.treebank, data.treebank_dev, config.parser_config(seed), init, p.vectors);
    });
    log_history(log, "parser", r.history);
    out.report["parser"] = r.history.to_json();
    out.report["parser"]["excluded_nonprojective"] = r.excluded_nonprojective;
    p.parser = std::move(r.model);
  }
  if (config.enabled.ner) {
    auto r = run_stage("ner", [&] {
      return train_ner(data.ner_train, data.ner_dev, config.ner_config(seed), init, p.vectors);
    });
    log_history(log, "ner", r.history);
    out.report["ner"] = r.history.to_json();
    p.ner = std::move(r.model);
  }
  if (config.enabled.textcat) {
    auto r = run_stage("textcat", [&] {
      return train_textcat(data.textcat_train, data.textcat_dev, config.textcat_config(seed), init, p.vectors);
    });
    log_history(log, "textcat", r.history);
    out.report["textcat"] = r.history.to_json();
    p.textcat = std::move(r.model);
  }
  if (!config.paths.output.empty()) run_stage("save", [&] { p.save(config.paths.output); });
  return out;
}

MetricsReport evaluate_pipeline(const Pipeline& p, const EvaluationData& data, bool exclude_punct) {
  MetricsReport report;
  if (data.treebank) {
    if (p.tagger) report.add("tagger.acc", tagger_accuracy(*p.tagger, *data.treebank), "run");
    if (p.parser) {
      const auto s = parser_scores(*p.parser, *data.treebank, exclude_punct);
      report.add("parser.uas", s.uas, "run");
      report.add("parser.las", s.las, "run");
    }
  }
  if (data.ner && p.ner) {
    const PRF s = ner_scores(*p.ner, *data.ner);
    report.add("ner.p", s.precision, "run");
    report.add("ner.r", s.recall, "run");
    report.add("ner.f1", s.f1, "run");
    for (const char* m : {"ner.p", "ner.r", "ner.f1"}) report.metrics[m].convention = kSpanConvention;
  }
  if (data.textcat && p.textcat) {
    const auto s = textcat_scores(*p.textcat, *data.textcat);
    report.add("textcat.acc", s.accuracy, "run");
    report.add("textcat.f1", s.macro_f1, "run");
  }
  return report;
}

TALA_NAMESPACE_END
