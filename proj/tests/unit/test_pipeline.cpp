#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tala/benchmark.hpp"
#include "tala/config.hpp"
#include "tala/error.hpp"
#include "tala/pipeline.hpp"
#include "tala/toy_corpus.hpp"
#include "tala/tokenizer.hpp"

using namespace tala;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tala_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string small_config(const fs::path& data, const std::string& extra = "") {
  const auto at = [&](const char* f) { return (data / f).string(); };
  return "[paths]\ntreebank = " + at("treebank.conllu") + "\nner_train = " + at("ner.iob") +
         "\ntextcat_train = " + at("textcat.jsonl") +
         "\n\n[components.tok2vec]\nwidth = 16\nembed_width = 16\ndepth = 1\nrows = 200,50,100,50\n"
         "\n[components.parser]\nhidden = 16\n[components.ner]\nhidden = 16\n"
         "\n[components.textcat]\nbuckets = 512\nhidden = 16\n"
         "\n[training]\nepochs = 3\npatience = 3\n" +
         extra;
}

fs::path toy_dir(const std::string& name, std::size_t n = 20) {
  const fs::path dir = scratch(name);
  write_toy_corpus(make_toy_corpus({n, 1}), dir.string());
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, Defaults) {
  const PipelineConfig c = parse_config("");
  EXPECT_EQ(c.system.tier, "md");
  EXPECT_TRUE(c.enabled.tagger);
  EXPECT_TRUE(c.enabled.parser);
  EXPECT_TRUE(c.enabled.ner);
  EXPECT_FALSE(c.enabled.textcat);
  EXPECT_EQ(c.evaluation.folds, 10u);
  EXPECT_EQ(c.evaluation.trials, 5u);
}

TEST(Config, UnknownKeyNamesLine) {
  try {
    parse_config("[training]\nepochs = 3\nlearning_rat = 0.1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("line 3"), std::string::npos) << what;
    EXPECT_NE(what.find("learning_rat"), std::string::npos) << what;
  }
  EXPECT_THROW(parse_config("[nonsense]\n"), ConfigError);
  EXPECT_THROW(parse_config("[training]\nepochs = many\n"), ConfigError);
  EXPECT_THROW(parse_config("[training]\nepochs = 1\nepochs = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("[evaluation]\nfolds = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[components.ner]\nenabled = yes\n"), ConfigError);
}

TEST(Config, TierAndRoundTrip) {
  const PipelineConfig lg = parse_config("[system]\ntier = lg\n");
  EXPECT_TRUE(lg.vectors.enabled);
  EXPECT_GT(lg.tok2vec.width, parse_config("").tok2vec.width);
  const PipelineConfig c = parse_config("# comment\n[system]\nseed = 42\n[components.textcat]\nenabled = true\n"
                                        "labels = a, b\n[training]\nlr = 0.01\n");
  EXPECT_EQ(c.system.seed, 42u);
  EXPECT_EQ(c.textcat_labels, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(format_config(parse_config(format_config(c))), format_config(c));
}

TEST(Pipeline, TrainSaveLoadPredict) {
  const fs::path data = toy_dir("pipe_data");
  const fs::path out = scratch("pipe_model");
  PipelineConfig cfg = parse_config(small_config(data, "[components.textcat]\n"));
  cfg.enabled.textcat = true;
  cfg.paths.output = out.string();
  const TrainedPipeline t = train_pipeline(cfg);
  EXPECT_TRUE(t.report.contains("tagger"));
  for (const char* f : {"meta.json", "config.cfg", "tagger.bin", "parser.bin", "ner.bin", "textcat.bin"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }

  const Pipeline loaded = load_pipeline(out.string());
  EXPECT_EQ(loaded.components(), (std::vector<std::string>{"tagger", "parser", "ner", "textcat"}));
  EXPECT_EQ(loaded.fingerprint(), t.pipeline.fingerprint());
  const std::string text = "Ako si Juan de la Cruz.";
  const AnnotatedDoc a = t.pipeline.apply(text);
  EXPECT_GE(a.tokens.size(), 7u);
  ASSERT_TRUE(a.upos && a.heads && a.deprels);
  EXPECT_EQ(a.upos->size(), a.tokens.size());
  EXPECT_EQ(a.text(), text);
  EXPECT_EQ(loaded.apply(text), a);
  EXPECT_EQ(t.pipeline.apply(text), a);
  EXPECT_EQ(a.cats.size(), 2u);

  const AnnotatedDoc empty = loaded.apply("");
  EXPECT_TRUE(empty.tokens.empty());
}

TEST(Pipeline, DefaultComponentsAndSentenceSplit) {
  const fs::path data = toy_dir("pipe_default");
  const fs::path out = scratch("pipe_default_model");
  PipelineConfig cfg = parse_config(small_config(data));
  cfg.paths.output = out.string();
  train_pipeline(cfg);
  const Pipeline p = load_pipeline(out.string());
  EXPECT_EQ(p.components(), (std::vector<std::string>{"tagger", "parser", "ner"}));
  const AnnotatedDoc d = p.apply("Kumain si Ana. Umuwi si Juan sa Cebu.");
  ASSERT_EQ(d.sentence_starts, (std::vector<std::size_t>{0, 4}));
  // Heads never cross a sentence boundary.
  for (std::size_t i = 0; i < d.tokens.size(); ++i) {
    const bool first = i < 4;
    const int h = (*d.heads)[i];
    EXPECT_EQ(static_cast<std::size_t>(h) < 4, first) << i;
  }
}

TEST(Pipeline, LoadErrors) {
  try {
    load_pipeline("nonexistent-model", "/no/such/dir");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("/no/such/dir"), std::string::npos) << what;
  }

  const fs::path data = toy_dir("pipe_version", 10);
  const fs::path out = scratch("pipe_version_model");
  PipelineConfig cfg = parse_config(small_config(data));
  cfg.enabled.parser = false;
  cfg.enabled.ner = false;
  cfg.paths.output = out.string();
  train_pipeline(cfg);
  auto meta = nlohmann::json::parse(slurp(out / "meta.json"));
  meta["format_version"] = kModelFormatVersion + 1;
  std::ofstream(out / "meta.json") << meta.dump();
  EXPECT_THROW(load_pipeline(out.string()), DataError);
}

TEST(Pipeline, ModelsDirLookup) {
  const fs::path data = toy_dir("pipe_lookup", 10);
  const fs::path models = scratch("pipe_models");
  PipelineConfig cfg = parse_config(small_config(data));
  cfg.enabled.parser = false;
  cfg.enabled.ner = false;
  cfg.paths.output = (models / "tl_small").string();
  train_pipeline(cfg);
  EXPECT_EQ(load_pipeline("tl_small", models.string()).components(), (std::vector<std::string>{"tagger"}));
}

TEST(Pipeline, TrainingIsDeterministic) {
  const fs::path data = toy_dir("pipe_det", 12);
  PipelineConfig cfg = parse_config(small_config(data));
  const auto a = train_pipeline(cfg);
  const auto b = train_pipeline(cfg);
  EXPECT_EQ(a.pipeline.fingerprint(), b.pipeline.fingerprint());
  EXPECT_EQ(a.report, b.report);
}

TEST(Pipeline, StageFailureNamesStage) {
  const fs::path data = toy_dir("pipe_fail", 5);
  PipelineConfig cfg = parse_config(small_config(data));
  cfg.enabled.textcat = true;
  cfg.textcat_labels = {"other", "travel"};
  try {
    train_pipeline(cfg);
    FAIL() << "expected failure";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("textcat"), std::string::npos) << e.what();
  }
  PipelineConfig missing = parse_config("");
  EXPECT_THROW(train_pipeline(missing), ConfigError);
}

TEST(Benchmark, ProtocolShape) {
  const fs::path data = toy_dir("bench", 23);
  PipelineConfig cfg = parse_config(small_config(data, "[evaluation]\nfolds = 10\ntrials = 2\n"));
  cfg.enabled.parser = false;
  cfg.training.epochs = 1;
  const MetricsReport r = run_benchmark(cfg);
  const auto& tag = r.at("tagger.acc");
  EXPECT_EQ(tag.trials.size(), 10u);
  EXPECT_EQ(tag.unit, "fold");
  EXPECT_EQ(tag.fold_sizes, (std::vector<std::size_t>{3, 3, 3, 2, 2, 2, 2, 2, 2, 2}));
  EXPECT_EQ(r.at("ner.f1").trials.size(), 2u);
  EXPECT_TRUE(r.at("ner.f1").convention.has_value());

  cfg.evaluation.trials = 1;
  cfg.enabled.tagger = false;
  EXPECT_EQ(run_benchmark(cfg).at("ner.f1").std, 0.0);
}

TEST(ToyCorpus, ValidAndDeterministic) {
  const Dataset a = make_toy_corpus({50, 7});
  EXPECT_EQ(a, make_toy_corpus({50, 7}));
  std::size_t food = 0;
  for (const auto& s : a.sentences) {
    EXPECT_NO_THROW(validate_sentence(s));
    EXPECT_TRUE(is_projective(to_conll_heads(*s.heads)));
    food += *s.category == "food";
  }
  EXPECT_GT(food, 0u);
  EXPECT_LT(food, a.size());
}
