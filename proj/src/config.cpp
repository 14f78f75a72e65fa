#include "tala/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tala/error.hpp"

TALA_NAMESPACE_BEGIN

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    out.push_back(trim(std::string_view(v).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("expected a number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

Field size_field(std::string section, std::string key, std::size_t& ref, bool positive = true) {
  return {std::move(section), std::move(key),
          [&ref, positive](const std::string& v) {
            ref = parse_number<std::size_t>(v);
            if (positive && ref == 0) throw ConfigError("value must be positive");
          },
          [&ref] { return std::to_string(ref); }};
}

Field double_field(std::string section, std::string key, double& ref) {
  return {std::move(section), std::move(key), [&ref](const std::string& v) { ref = parse_number<double>(v); },
          [&ref] { return format_double(ref); }};
}

Field bool_field(std::string section, std::string key, bool& ref) {
  return {std::move(section), std::move(key), [&ref](const std::string& v) { ref = parse_bool(v); },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

Field string_field(std::string section, std::string key, std::string& ref) {
  return {std::move(section), std::move(key), [&ref](const std::string& v) { ref = v; },
          [&ref] { return ref; }};
}

std::vector<Field> schema(PipelineConfig& c) {
  std::vector<Field> f;
  auto& p = c.paths;
  for (auto [key, ref] : std::initializer_list<std::pair<const char*, std::string*>>{
           {"treebank", &p.treebank},
           {"treebank_dev", &p.treebank_dev},
           {"treebank_test", &p.treebank_test},
           {"ner_train", &p.ner_train},
           {"ner_dev", &p.ner_dev},
           {"ner_test", &p.ner_test},
           {"textcat_train", &p.textcat_train},
           {"textcat_dev", &p.textcat_dev},
           {"textcat_test", &p.textcat_test},
           {"pretrain_corpus", &p.pretrain_corpus},
           {"vectors_corpus", &p.vectors_corpus},
           {"init_tok2vec", &p.init_tok2vec},
           {"vectors", &p.vectors},
           {"output", &p.output}})
    f.push_back(string_field("paths", key, *ref));

  f.push_back({"system", "seed", [&c](const std::string& v) { c.system.seed = parse_number<std::uint64_t>(v); },
               [&c] { return std::to_string(c.system.seed); }});
  f.push_back(string_field("system", "name", c.system.name));
  f.push_back(string_field("system", "version", c.system.version));
  f.push_back(string_field("system", "lang", c.system.lang));
  f.push_back({"system", "tier",
               [&c](const std::string& v) {
                 if (v != "md" && v != "lg") throw ConfigError("tier must be md or lg, got '" + v + "'");
                 c.system.tier = v;
               },
               [&c] { return c.system.tier; }});

  f.push_back(bool_field("pretraining", "enabled", c.pretraining.enabled));
  f.push_back(size_field("pretraining", "epochs", c.pretraining.epochs, false));
  f.push_back(size_field("pretraining", "n_bytes", c.pretraining.n_bytes));
  f.push_back(size_field("pretraining", "batch_size", c.pretraining.batch_size));
  f.push_back(double_field("pretraining", "lr", c.pretraining.lr));

  auto& fl = c.vectors.floret;
  f.push_back(bool_field("vectors", "enabled", c.vectors.enabled));
  f.push_back(size_field("vectors", "buckets", fl.buckets));
  f.push_back(size_field("vectors", "dim", fl.dim));
  f.push_back(size_field("vectors", "minn", fl.min_n));
  f.push_back(size_field("vectors", "maxn", fl.max_n));
  f.push_back(size_field("vectors", "window", fl.window));
  f.push_back(size_field("vectors", "negatives", fl.negatives));
  f.push_back(size_field("vectors", "epochs", fl.epochs, false));
  f.push_back(double_field("vectors", "lr", fl.lr));

  const std::string t2v = "components.tok2vec";
  f.push_back(size_field(t2v, "width", c.tok2vec.width));
  f.push_back(size_field(t2v, "embed_width", c.tok2vec.embed_width));
  f.push_back(size_field(t2v, "depth", c.tok2vec.depth, false));
  f.push_back(size_field(t2v, "window", c.tok2vec.window, false));
  f.push_back(size_field(t2v, "num_hashes", c.tok2vec.num_hashes));
  f.push_back({t2v, "rows",
               [&c](const std::string& v) {
                 const auto parts = split_list(v);
                 if (parts.size() != 4)
                   throw ConfigError("rows needs four values (norm, prefix, suffix, shape)");
                 for (std::size_t a = 0; a < 4; ++a) {
                   c.tok2vec.rows[a] = parse_number<std::size_t>(parts[a]);
                   if (c.tok2vec.rows[a] == 0) throw ConfigError("rows must be positive");
                 }
               },
               [&c] {
                 std::vector<std::string> s;
                 for (auto r : c.tok2vec.rows) s.push_back(std::to_string(r));
                 return join(s);
               }});
  f.push_back({t2v, "seed_base", [&c](const std::string& v) { c.tok2vec.seed_base = parse_number<std::uint32_t>(v); },
               [&c] { return std::to_string(c.tok2vec.seed_base); }});

  f.push_back(bool_field("components.tagger", "enabled", c.enabled.tagger));
  f.push_back(bool_field("components.parser", "enabled", c.enabled.parser));
  f.push_back(size_field("components.parser", "hidden", c.parser_hidden));
  f.push_back(bool_field("components.ner", "enabled", c.enabled.ner));
  f.push_back(size_field("components.ner", "hidden", c.ner_hidden));
  f.push_back(bool_field("components.textcat", "enabled", c.enabled.textcat));
  f.push_back(size_field("components.textcat", "buckets", c.textcat_buckets));
  f.push_back(size_field("components.textcat", "hidden", c.textcat_hidden));
  f.push_back({"components.textcat", "labels", [&c](const std::string& v) { c.textcat_labels = split_list(v); },
               [&c] { return join(c.textcat_labels); }});

  f.push_back(size_field("training", "epochs", c.training.epochs, false));
  f.push_back(size_field("training", "patience", c.training.patience));
  f.push_back(size_field("training", "batch_size", c.training.batch_size));
  f.push_back(double_field("training", "lr", c.training.adam.lr));
  f.push_back(double_field("training", "beta1", c.training.adam.beta1));
  f.push_back(double_field("training", "beta2", c.training.adam.beta2));
  f.push_back(double_field("training", "eps", c.training.adam.eps));
  f.push_back(double_field("training", "grad_clip", c.training.adam.grad_clip));

  f.push_back(size_field("evaluation", "folds", c.evaluation.folds));
  f.push_back(size_field("evaluation", "trials", c.evaluation.trials));
  f.push_back(bool_field("evaluation", "exclude_punct", c.evaluation.exclude_punct));
  return f;
}

void apply_tier(PipelineConfig& c) {
  if (c.system.tier == "lg") {
    c.tok2vec.width = 128;
    c.vectors.enabled = true;
    c.system.name = "tl_tala_lg";
  }
}

struct Entry {
  std::string value;
  std::size_t line;
};

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  std::map<std::pair<std::string, std::string>, Entry> entries;
  std::set<std::string> sections;
  {
    PipelineConfig scratch;
    for (const auto& f : schema(scratch)) sections.insert(f.section);
  }
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!sections.count(section)) throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key outside of any section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!entries.emplace(std::pair{section, key}, Entry{value, line_no}).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key " + section + "." + key);
  }

  PipelineConfig config;
  auto fields = schema(config);
  const auto apply = [&](const Field& f, const Entry& e) {
    try {
      f.set(e.value);
    } catch (const ConfigError& err) {
      throw ConfigError("line " + std::to_string(e.line) + ": " + f.section + "." + f.key + ": " + err.what());
    }
  };
  for (const auto& [k, e] : entries) {
    bool known = false;
    for (const auto& f : fields) known = known || (f.section == k.first && f.key == k.second);
    if (!known) throw ConfigError("line " + std::to_string(e.line) + ": unknown key " + k.first + "." + k.second);
  }
  for (const auto& f : fields) {
    if (f.section == "system" && f.key == "tier") {
      if (auto it = entries.find({f.section, f.key}); it != entries.end()) apply(f, it->second);
    }
  }
  apply_tier(config);
  for (const auto& f : fields) {
    if (auto it = entries.find({f.section, f.key}); it != entries.end()) apply(f, it->second);
  }
  if (config.vectors.floret.min_n > config.vectors.floret.max_n)
    throw ConfigError("vectors.minn must not exceed vectors.maxn");
  if (config.evaluation.folds < 2) throw ConfigError("evaluation.folds must be at least 2");
  return config;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string format_config(const PipelineConfig& config) {
  PipelineConfig copy = config;
  std::ostringstream out;
  std::string section;
  for (const auto& f : schema(copy)) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get() << '\n';
  }
  return out.str();
}

TrainConfig PipelineConfig::train_config(std::uint64_t seed) const {
  TrainConfig t;
  t.epochs = training.epochs;
  t.patience = training.patience;
  t.batch_size = training.batch_size;
  t.adam = training.adam;
  t.seed = seed;
  return t;
}

PretrainConfig PipelineConfig::pretrain_config() const {
  PretrainConfig p;
  p.epochs = pretraining.epochs;
  p.n_bytes = pretraining.n_bytes;
  p.batch_size = pretraining.batch_size;
  p.adam = training.adam;
  p.adam.lr = pretraining.lr;
  p.seed = system.seed;
  return p;
}

TaggerConfig PipelineConfig::tagger_config(std::uint64_t seed) const { return {tok2vec, train_config(seed)}; }

ParserConfig PipelineConfig::parser_config(std::uint64_t seed) const {
  return {tok2vec, parser_hidden, train_config(seed)};
}

NerConfig PipelineConfig::ner_config(std::uint64_t seed) const { return {tok2vec, ner_hidden, train_config(seed)}; }

TextcatConfig PipelineConfig::textcat_config(std::uint64_t seed) const {
  return {tok2vec, textcat_buckets, textcat_hidden, textcat_labels, train_config(seed)};
}

FloretConfig PipelineConfig::floret_config() const {
  FloretConfig f = vectors.floret;
  f.seed = system.seed;
  return f;
}

TALA_NAMESPACE_END
