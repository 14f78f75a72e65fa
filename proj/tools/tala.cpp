// Command-line front end: convert, pretrain, vectors, train, evaluate,
// predict, agreement, benchmark and toy-corpus.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tala/benchmark.hpp"
#include "tala/config.hpp"
#include "tala/corpus.hpp"
#include "tala/error.hpp"
#include "tala/floret.hpp"
#include "tala/metrics.hpp"
#include "tala/pipeline.hpp"
#include "tala/pretrain.hpp"
#include "tala/toy_corpus.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kTraining = 3 };

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string models_dir;
};

tala::PipelineConfig resolve_config(const Globals& g) {
  if (g.config.empty()) throw tala::ConfigError("--config is required for this command");
  tala::PipelineConfig c = tala::load_config(g.config);
  if (g.seed_set) c.system.seed = g.seed;
  return c;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw tala::DataError("cannot write '" + path + "'");
}

tala::Dataset read_format(const std::string& format, const std::string& path) {
  if (format == "conllu") return tala::read_conllu_file(path);
  if (format == "iob") {
    auto r = tala::read_iob_file(path);
    if (r.repairs) std::cerr << "repaired " << r.repairs << " I- openings\n";
    return std::move(r.dataset);
  }
  return tala::read_textcat_jsonl_file(path);
}

std::string write_format(const std::string& format, const tala::Dataset& ds) {
  if (format == "conllu") return tala::write_conllu(ds);
  if (format == "iob") return tala::write_iob(ds);
  return tala::write_jsonl(ds);
}

struct AlignedTags {
  std::vector<std::vector<std::string>> tags;  // per annotator
  std::size_t sentences = 0;
  std::vector<std::size_t> sentence_of_token;
};

// Reads aligned IOB2 files token by token, failing on the first line where
// the files disagree about tokens or sentence breaks.
AlignedTags read_aligned(const std::vector<std::string>& paths) {
  std::vector<std::vector<std::string>> lines(paths.size());
  for (std::size_t k = 0; k < paths.size(); ++k) {
    tala::read_iob_file(paths[k]);  // scheme validation
    std::ifstream in(paths[k]);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines[k].push_back(line);
    }
    while (!lines[k].empty() && lines[k].back().empty()) lines[k].pop_back();
  }
  AlignedTags out;
  out.tags.resize(paths.size());
  const std::size_t n = lines[0].size();
  const auto token_of = [](const std::string& l) { return l.substr(0, l.find('\t')); };
  bool in_sentence = false;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string token = token_of(lines[0][i]);
    for (std::size_t k = 1; k < paths.size(); ++k) {
      if (i >= lines[k].size())
        throw tala::DataError("line " + std::to_string(i + 1) + ": " + paths[k] + " ends early");
      if (token_of(lines[k][i]) != token)
        throw tala::DataError("line " + std::to_string(i + 1) + ": " + paths[k] + " has '" +
                              token_of(lines[k][i]) + "' where " + paths[0] + " has '" + token + "'");
    }
    if (token.empty() || token == "-DOCSTART-") {
      in_sentence = false;
      continue;
    }
    if (!in_sentence) {
      ++out.sentences;
      in_sentence = true;
    }
    out.sentence_of_token.push_back(out.sentences - 1);
    for (std::size_t k = 0; k < paths.size(); ++k)
      out.tags[k].push_back(lines[k][i].substr(lines[k][i].find('\t') + 1));
  }
  for (std::size_t k = 1; k < paths.size(); ++k) {
    if (lines[k].size() > n)
      throw tala::DataError("line " + std::to_string(n + 1) + ": " + paths[0] + " ends early");
  }
  return out;
}

std::vector<std::string> read_rounds(const std::string& path, const AlignedTags& aligned) {
  std::ifstream in(path);
  if (!in) throw tala::DataError("cannot open '" + path + "'");
  std::vector<std::string> per_sentence;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) per_sentence.push_back(line);
  }
  if (per_sentence.size() != aligned.sentences)
    throw tala::DataError(path + ": " + std::to_string(per_sentence.size()) + " round labels for " +
                          std::to_string(aligned.sentences) + " sentences");
  std::vector<std::string> out;
  for (std::size_t s : aligned.sentence_of_token) out.push_back(per_sentence[s]);
  return out;
}

void print_report(const tala::MetricsReport& report, bool json) {
  if (json) {
    std::cout << report.to_json().dump(2) << '\n';
  } else {
    std::cout << report.to_table();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tala: trainable tagging, parsing, NER and text categorization pipelines"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(tala::kVersion));
  Globals g;
  app.add_option("--config", g.config, "Pipeline config file (.cfg)");
  app.add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t s) { g.seed = s, g.seed_set = true; }, "Override [system] seed");
  app.add_option("--models-dir", g.models_dir, "Directory searched for model names")->envname(tala::kModelsDirEnv);

  // convert
  auto* convert = app.add_subcommand("convert", "Convert between CoNLL-U, IOB2 and JSON lines");
  std::string from, to, input = "-", output;
  convert->add_option("--from", from, "Input format")->required()->check(CLI::IsMember({"conllu", "iob", "jsonl"}));
  convert->add_option("--to", to, "Output format")->required()->check(CLI::IsMember({"conllu", "iob", "jsonl"}));
  convert->add_option("input", input, "Input file, - for stdin");
  convert->add_option("-o,--output", output, "Output file (default stdout)");

  // pretrain
  auto* pretrain_cmd = app.add_subcommand("pretrain", "Character-cloze pretraining of tok2vec weights");
  std::string corpus, pretrain_out;
  pretrain_cmd->add_option("--corpus", corpus, "Raw text corpus (default [paths] pretrain_corpus)");
  pretrain_cmd->add_option("-o,--output", pretrain_out, "Weights file to write")->required();

  // vectors
  auto* vectors_cmd = app.add_subcommand("vectors", "Train floret static vectors");
  std::string vectors_corpus, vectors_out;
  vectors_cmd->add_option("--corpus", vectors_corpus, "Raw text corpus (default [paths] vectors_corpus)");
  vectors_cmd->add_option("-o,--output", vectors_out, "Output stem; writes <stem>.bin and <stem>.json")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a pipeline from a config");
  std::string train_out;
  train_cmd->add_option("-o,--output", train_out, "Model directory (default [paths] output)");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a trained pipeline");
  std::string model, eval_treebank, eval_ner, eval_textcat;
  bool eval_json = false, exclude_punct = false;
  eval_cmd->add_option("model", model, "Model directory or name")->required();
  eval_cmd->add_option("--treebank", eval_treebank, "CoNLL-U test file");
  eval_cmd->add_option("--ner", eval_ner, "IOB2 test file");
  eval_cmd->add_option("--textcat", eval_textcat, "JSON-lines test file");
  eval_cmd->add_flag("--exclude-punct", exclude_punct, "Leave PUNCT tokens out of UAS/LAS");
  eval_cmd->add_flag("--json", eval_json, "Print JSON instead of a table");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Annotate stdin text, one document per line");
  std::string predict_model;
  predict_cmd->add_option("model", predict_model, "Model directory or name")->required();

  // agreement
  auto* agree_cmd = app.add_subcommand("agreement", "Inter-annotator agreement over aligned IOB2 files");
  std::vector<std::string> agree_files;
  std::string rounds_file;
  bool agree_json = false;
  agree_cmd->add_option("files", agree_files, "Annotator files")->required()->expected(2, -1);
  agree_cmd->add_option("--rounds", rounds_file, "One round label per sentence");
  agree_cmd->add_flag("--json", agree_json, "Print JSON instead of a table");

  // benchmark
  auto* bench_cmd = app.add_subcommand("benchmark", "Cross-validation and multi-trial evaluation");
  std::string bench_json;
  bench_cmd->add_option("--json", bench_json, "Also write the report JSON to this file");

  // toy-corpus
  auto* toy_cmd = app.add_subcommand("toy-corpus", "Write the bundled toy corpus");
  std::string toy_dir;
  std::size_t toy_sentences = 40;
  std::uint64_t toy_seed = 0;
  toy_cmd->add_option("-o,--output", toy_dir, "Output directory")->required();
  toy_cmd->add_option("-n,--sentences", toy_sentences, "Number of sentences");
  toy_cmd->add_option("--toy-seed", toy_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*convert) {
      write_output(output, write_format(to, read_format(from, input)));
    } else if (*pretrain_cmd) {
      const auto config = resolve_config(g);
      const std::string path = corpus.empty() ? config.paths.pretrain_corpus : corpus;
      if (path.empty()) throw tala::ConfigError("no pretraining corpus: pass --corpus or set [paths] pretrain_corpus");
      std::shared_ptr<const tala::FloretTable> vectors;
      if (!config.paths.vectors.empty())
        vectors = std::make_shared<const tala::FloretTable>(tala::load_floret(config.paths.vectors));
      const auto result = tala::pretrain(tala::read_text_corpus(path), config.tok2vec, config.pretrain_config(), vectors);
      for (std::size_t e = 0; e < result.epoch_losses.size(); ++e)
        std::cerr << "epoch " << e + 1 << " loss " << result.epoch_losses[e] << '\n';
      tala::save_weights_file(pretrain_out, result.store);
    } else if (*vectors_cmd) {
      const auto config = resolve_config(g);
      const std::string path = vectors_corpus.empty() ? config.paths.vectors_corpus : vectors_corpus;
      if (path.empty()) throw tala::ConfigError("no vectors corpus: pass --corpus or set [paths] vectors_corpus");
      std::vector<double> losses;
      const auto table = tala::train_floret(tala::read_text_corpus(path), config.floret_config(), &losses);
      for (std::size_t e = 0; e < losses.size(); ++e) std::cerr << "epoch " << e + 1 << " loss " << losses[e] << '\n';
      tala::save_floret(table, vectors_out);
    } else if (*train_cmd) {
      auto config = resolve_config(g);
      if (!train_out.empty()) config.paths.output = train_out;
      if (config.paths.output.empty()) throw tala::ConfigError("no output directory: pass -o or set [paths] output");
      const auto trained = tala::train_pipeline(config, &std::cerr);
      std::cout << trained.report.dump(2) << '\n';
    } else if (*eval_cmd) {
      const auto pipeline = tala::load_pipeline(model, g.models_dir);
      tala::Dataset treebank, ner, textcat;
      tala::EvaluationData data;
      if (!eval_treebank.empty()) data.treebank = &(treebank = tala::read_conllu_file(eval_treebank));
      if (!eval_ner.empty()) data.ner = &(ner = tala::read_iob_file(eval_ner).dataset);
      if (!eval_textcat.empty()) data.textcat = &(textcat = tala::read_textcat_jsonl_file(eval_textcat));
      if (!data.treebank && !data.ner && !data.textcat)
        throw tala::ConfigError("nothing to evaluate: pass --treebank, --ner or --textcat");
      print_report(tala::evaluate_pipeline(pipeline, data, exclude_punct), eval_json);
    } else if (*predict_cmd) {
      const auto pipeline = tala::load_pipeline(predict_model, g.models_dir);
      std::string line;
      while (std::getline(std::cin, line)) std::cout << pipeline.apply(line).to_json().dump() << '\n';
    } else if (*agree_cmd) {
      const AlignedTags aligned = read_aligned(agree_files);
      std::vector<std::string> rounds;
      if (!rounds_file.empty()) rounds = read_rounds(rounds_file, aligned);
      const auto result = tala::iaa_report(aligned.tags, rounds);
      if (agree_json) {
        std::cout << result.to_json().dump(2) << '\n';
      } else {
        std::cout << result.to_table();
      }
    } else if (*bench_cmd) {
      const auto config = resolve_config(g);
      const auto report = tala::run_benchmark(config, &std::cerr);
      std::cout << report.to_table();
      if (!bench_json.empty()) write_output(bench_json, report.to_json().dump(2) + "\n");
    } else if (*toy_cmd) {
      tala::write_toy_corpus(tala::make_toy_corpus({toy_sentences, toy_seed}), toy_dir);
    }
  } catch (const tala::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const tala::TrainingError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kTraining;
  } catch (const tala::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kTraining;
  }
  return kOk;
}
