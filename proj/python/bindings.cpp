#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tala/benchmark.hpp"
#include "tala/config.hpp"
#include "tala/corpus.hpp"
#include "tala/error.hpp"
#include "tala/hash.hpp"
#include "tala/metrics.hpp"
#include "tala/pipeline.hpp"
#include "tala/tokenizer.hpp"
#include "tala/toy_corpus.hpp"

namespace py = pybind11;
using namespace tala;

namespace {

// Structured results cross the boundary as JSON text; the Python
// package decodes them.
std::string dump(const nlohmann::json& j) { return j.dump(); }

std::vector<std::tuple<std::size_t, std::size_t, std::string>> to_tuples(const std::vector<Span>& spans) {
  std::vector<std::tuple<std::size_t, std::size_t, std::string>> out;
  for (const auto& s : spans) out.emplace_back(s.start, s.end, s.label);
  return out;
}

std::vector<Span> from_tuples(const std::vector<std::tuple<std::size_t, std::size_t, std::string>>& t) {
  std::vector<Span> out;
  for (const auto& [a, b, l] : t) out.push_back({a, b, l});
  return out;
}

Dataset read_any(const std::string& text, const std::string& format) {
  std::istringstream in(text);
  if (format == "conllu") return read_conllu(in);
  if (format == "iob") return read_iob(in).dataset;
  if (format == "jsonl") return read_textcat_jsonl(in);
  throw ConfigError("unknown format '" + format + "'");
}

}  // namespace

PYBIND11_MODULE(_tala, m) {
  m.doc() = "Tagging, parsing, NER and text categorization pipelines";
  m.attr("__version__") = kVersion;

  // Translators run newest first, so the base class goes in first.
  const auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<TrainingError>(m, "TrainingError", base.ptr());

  m.def("hash32", [](const py::bytes& key, std::uint32_t seed) { return hash32(std::string(key), seed); },
        py::arg("key"), py::arg("seed"));
  m.def("tokenize", [](const std::string& text) {
    std::vector<std::string> out;
    for (const auto& t : tokenize(text).tokens) out.push_back(t.text);
    return out;
  });

  m.def("cohen_kappa", &cohen_kappa);
  m.def("pairwise_f1_no_o", &pairwise_f1_no_o);
  m.def("span_prf", [](const std::vector<std::tuple<std::size_t, std::size_t, std::string>>& gold,
                       const std::vector<std::tuple<std::size_t, std::size_t, std::string>>& pred) {
    const PRF r = span_prf(from_tuples(gold), from_tuples(pred));
    return std::make_tuple(r.precision, r.recall, r.f1);
  });
  m.def("aggregate_trials", [](const std::vector<double>& v) {
    const TrialSummary s = aggregate_trials(v);
    return std::make_pair(s.mean, s.std);
  });
  m.def("iaa_report", [](const std::vector<std::vector<std::string>>& annotations) {
    return dump(iaa_report(annotations).to_json());
  });
  m.def("spans_to_biluo", [](std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, std::string>>& s) {
    return spans_to_biluo(n, from_tuples(s));
  });
  m.def("biluo_to_spans", [](const std::vector<std::string>& tags, bool strict) {
    return to_tuples(biluo_to_spans(tags, strict ? BiluoMode::kStrict : BiluoMode::kLenient));
  }, py::arg("tags"), py::arg("strict") = true);

  m.def("convert", [](const std::string& text, const std::string& from, const std::string& to) {
    const Dataset ds = read_any(text, from);
    if (to == "conllu") return write_conllu(ds);
    if (to == "iob") return write_iob(ds);
    if (to == "jsonl") return write_jsonl(ds);
    throw ConfigError("unknown format '" + to + "'");
  });
  m.def("write_toy_corpus", [](const std::string& dir, std::size_t sentences, std::uint64_t seed) {
    write_toy_corpus(make_toy_corpus({sentences, seed}), dir);
  }, py::arg("dir"), py::arg("sentences") = 40, py::arg("seed") = 0);

  m.def("normalize_config", [](const std::string& text) { return format_config(parse_config(text)); });
  m.def("train", [](const std::string& config_text) {
    py::gil_scoped_release release;
    return dump(train_pipeline(parse_config(config_text)).report);
  });
  m.def("benchmark", [](const std::string& config_text) {
    py::gil_scoped_release release;
    return dump(run_benchmark(parse_config(config_text)).to_json());
  });

  py::class_<Pipeline>(m, "Pipeline")
      .def_property_readonly("components", &Pipeline::components)
      .def("apply", [](const Pipeline& p, const std::string& text) { return dump(p.apply(text).to_json()); })
      .def("save", &Pipeline::save)
      .def("meta", [](const Pipeline& p) { return dump(p.meta()); })
      .def("evaluate", [](const Pipeline& p, const std::string& treebank, const std::string& ner,
                          const std::string& textcat, bool exclude_punct) {
        Dataset tb, nr, tc;
        EvaluationData data;
        if (!treebank.empty()) data.treebank = &(tb = read_conllu_file(treebank));
        if (!ner.empty()) data.ner = &(nr = read_iob_file(ner).dataset);
        if (!textcat.empty()) data.textcat = &(tc = read_textcat_jsonl_file(textcat));
        return dump(evaluate_pipeline(p, data, exclude_punct).to_json());
      }, py::arg("treebank") = "", py::arg("ner") = "", py::arg("textcat") = "", py::arg("exclude_punct") = false);

  m.def("load", [](const std::string& name, const std::string& models_dir) { return load_pipeline(name, models_dir); },
        py::arg("name"), py::arg("models_dir") = "");
}
