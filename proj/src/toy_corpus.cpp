#include "tala/toy_corpus.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "tala/error.hpp"
#include "tala/random.hpp"
#include "tala/tokenizer.hpp"

TALA_NAMESPACE_BEGIN

namespace {

constexpr std::array kFirstNames = {"Juan", "Maria", "Jose", "Ana", "Pedro", "Rosa", "Carlo", "Liza", "Miguel", "Elena"};
constexpr std::array kSurnames = {"Santos", "Reyes", "Cruz", "Bautista", "Garcia", "Mendoza"};
constexpr std::array kPlaces = {"Maynila", "Cebu", "Davao", "Baguio", "Iloilo", "Tagaytay", "San Pablo", "Santa Rosa"};
constexpr std::array kOrgs = {"Ateneo", "Jollibee", "Petron", "Meralco", "Ayala Land", "Globe Telecom"};
constexpr std::array kFoods = {"adobo", "sinigang", "kanin", "tinapay", "mangga", "isda", "kape", "lugaw"};
constexpr std::array kTravelVerbs = {"Pumunta", "Umuwi", "Bumisita", "Lumipad", "Naglakbay"};
constexpr std::array kFoodVerbs = {"Kumain", "Nagluto", "Bumili", "Naghanda"};
constexpr std::array kAdverbs = {"kahapon", "ngayon", "bukas", "kanina"};

template <std::size_t N>
std::string pick(const std::array<const char*, N>& items, Rng& rng) {
  return items[rng.uniform_below(N)];
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(s).tokens) out.push_back(t.text);
  return out;
}

std::string lower_first(std::string s) {
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z') s[0] = static_cast<char>(s[0] - 'A' + 'a');
  return s;
}

class Builder {
 public:
  // Appends a token and returns its index. `head` may be filled in later.
  std::size_t add(const std::string& text, const char* upos, int head, const char* deprel) {
    s_.tokens.push_back({text, " "});
    upos_.emplace_back(upos);
    heads_.push_back(head);
    deprels_.emplace_back(deprel);
    return s_.tokens.size() - 1;
  }

  // Multiword proper name: the first word heads the rest with `flat`.
  std::size_t name(const std::vector<std::string>& words, const char* label, int head, const char* deprel) {
    const std::size_t first = add(words[0], "PROPN", head, deprel);
    for (std::size_t i = 1; i < words.size(); ++i) add(words[i], "PROPN", static_cast<int>(first), "flat");
    s_.ents.push_back({first, first + words.size(), label});
    return first;
  }

  // Case marker followed by a name or noun it attaches to.
  std::size_t marked(const std::string& marker, const std::vector<std::string>& words, const char* label,
                     const char* upos, int head, const char* deprel) {
    const std::size_t m = add(marker, "ADP", 0, "case");
    std::size_t target = 0;
    if (label) {
      target = name(words, label, head, deprel);
    } else {
      target = add(words[0], upos, head, deprel);
    }
    heads_[m] = static_cast<int>(target);
    return target;
  }

  void set_head(std::size_t token, int head) { heads_[token] = head; }

  Sentence finish(const std::string& category) {
    s_.upos = upos_;
    s_.heads = heads_;
    s_.deprels = deprels_;
    s_.category = category;
    std::sort(s_.ents.begin(), s_.ents.end());
    // The final period attaches without a space before it.
    if (s_.tokens.size() >= 2) s_.tokens[s_.tokens.size() - 2].trailing_ws = "";
    return std::move(s_);
  }

 private:
  Sentence s_;
  std::vector<std::string> upos_;
  std::vector<int> heads_;
  std::vector<std::string> deprels_;
};

std::vector<std::string> person(Rng& rng) {
  std::vector<std::string> p{pick(kFirstNames, rng)};
  if (rng.uniform() < 0.4) p.push_back(pick(kSurnames, rng));
  return p;
}

Sentence generate(Rng& rng) {
  Builder b;
  const std::size_t kind = rng.uniform_below(4);
  const bool with_adverb = rng.uniform() < 0.3;
  const auto place_or_org = [&](int head) {
    if (rng.uniform() < 0.5) return b.marked("sa", split_words(pick(kPlaces, rng)), "LOC", nullptr, head, "obl");
    return b.marked("sa", split_words(pick(kOrgs, rng)), "ORG", nullptr, head, "obl");
  };
  std::string category;
  std::size_t verb = 0;
  switch (kind) {
    case 0:  // Pumunta si Juan sa Maynila .
      verb = b.add(pick(kTravelVerbs, rng), "VERB", kRootHead, "root");
      b.marked("si", person(rng), "PER", nullptr, 0, "nsubj");
      place_or_org(0);
      category = "travel";
      break;
    case 1:  // Kumain ng adobo si Maria sa Cebu .
      verb = b.add(pick(kFoodVerbs, rng), "VERB", kRootHead, "root");
      b.marked("ng", {pick(kFoods, rng)}, nullptr, "NOUN", 0, "obj");
      b.marked("si", person(rng), "PER", nullptr, 0, "nsubj");
      if (rng.uniform() < 0.5) place_or_org(0);
      category = "food";
      break;
    case 2:  // Nagluto si Pedro ng sinigang .
      verb = b.add(pick(kFoodVerbs, rng), "VERB", kRootHead, "root");
      b.marked("si", person(rng), "PER", nullptr, 0, "nsubj");
      b.marked("ng", {pick(kFoods, rng)}, nullptr, "NOUN", 0, "obj");
      category = "food";
      break;
    default: {  // Si Ana ay umuwi sa Davao .
      const std::size_t subj = b.marked("Si", person(rng), "PER", nullptr, 0, "nsubj");
      const std::size_t ay = b.add("ay", "AUX", 0, "aux");
      verb = b.add(lower_first(pick(kTravelVerbs, rng)), "VERB", kRootHead, "root");
      b.set_head(subj, static_cast<int>(verb));
      b.set_head(ay, static_cast<int>(verb));
      place_or_org(static_cast<int>(verb));
      category = "travel";
      break;
    }
  }
  if (with_adverb) b.add(pick(kAdverbs, rng), "ADV", static_cast<int>(verb), "advmod");
  b.add(".", "PUNCT", static_cast<int>(verb), "punct");
  return b.finish(category);
}

}  // namespace

Dataset make_toy_corpus(const ToyCorpusOptions& options) {
  Rng rng(options.seed);
  Dataset ds;
  for (std::size_t i = 0; i < options.sentences; ++i) {
    ds.sentences.push_back(generate(rng));
    validate_sentence(ds.sentences.back());
  }
  return ds;
}

void write_toy_corpus(const Dataset& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(fs::path(dir) / name);
    out << text;
    if (!out) throw DataError("cannot write " + (fs::path(dir) / name).string());
  };
  write("treebank.conllu", write_conllu(corpus));
  write("ner.iob", write_iob(corpus));
  write("textcat.jsonl", write_jsonl(corpus));
  std::string raw;
  for (const auto& s : corpus.sentences) {
    std::string line = detokenize(s.tokens);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    raw += line + '\n';
  }
  write("raw.txt", raw);
}

TALA_NAMESPACE_END
