#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "tala/error.hpp"
#include "tala/ner.hpp"
#include "tala/parser.hpp"
#include "tala/random.hpp"
#include "tala/tagger.hpp"
#include "tala/textcat.hpp"
#include "tala/toy_corpus.hpp"

using namespace tala;

namespace {

Tok2VecConfig tiny() {
  Tok2VecConfig c;
  c.width = 16;
  c.embed_width = 16;
  c.depth = 1;
  c.rows = {200, 50, 100, 50};
  return c;
}

TrainConfig quick(std::size_t epochs = 3) {
  TrainConfig t;
  t.epochs = epochs;
  t.patience = epochs;
  return t;
}

Dataset toy(std::size_t n, std::uint64_t seed = 0) { return make_toy_corpus({n, seed}); }

std::vector<std::string> random_words(Rng& rng, std::size_t n) {
  static const std::vector<std::string> vocab{"si", "Juan", "ng", "kanin", "sa", "Cebu", ".", "ay", "Pumunta", "x"};
  std::vector<std::string> w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(vocab[rng.uniform_below(vocab.size())]);
  return w;
}

// Replays actions from the initial state and returns 1-based heads.
std::vector<int> replay(const std::vector<Action>& actions, std::size_t n) {
  TransitionState st(n);
  for (const auto& a : actions) st = apply_action(st, a);
  std::vector<int> heads(n, -1);
  for (const auto& arc : st.arcs()) heads[static_cast<std::size_t>(arc.dependent - 1)] = arc.head;
  return heads;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parser

TEST(Projective, Examples) {
  EXPECT_TRUE(is_projective({2, 0, 2}));
  // Arcs 3->1 and 4->2 cross. ({3, 4, 0, 2} would also close the cycle 2->4->2.)
  EXPECT_FALSE(is_projective({3, 4, 0, 3}));
  EXPECT_THROW(is_projective({3, 4, 0, 2}), DataError);
  EXPECT_TRUE(is_projective({0}));
  EXPECT_THROW(is_projective({0, 0}), DataError);
  EXPECT_THROW(is_projective({2, 1}), DataError);
}

TEST(Transitions, ValidActions) {
  const TransitionState init(3);
  const ActionSet a = valid_actions(init);
  EXPECT_TRUE(a.shift);
  EXPECT_TRUE(a.right_arc);
  EXPECT_FALSE(a.left_arc);
  EXPECT_FALSE(a.reduce);

  TransitionState st(1);
  st = apply_action(st, Action::right("root"));
  const ActionSet end = valid_actions(st);
  EXPECT_TRUE(end.reduce);
  EXPECT_FALSE(end.shift);
  st = apply_action(st, Action::reduce());
  EXPECT_TRUE(valid_actions(st).empty());
  EXPECT_TRUE(st.is_terminal());
}

TEST(Transitions, ApplySemantics) {
  TransitionState st(2);
  st = apply_action(st, Action::shift());
  EXPECT_EQ(st.stack(), (std::vector<int>{0, 1}));
  st = apply_action(st, Action::left("nsubj"));
  EXPECT_EQ(st.stack(), (std::vector<int>{0}));
  EXPECT_EQ(st.head(1), 2);
  EXPECT_EQ(st.label(1), "nsubj");
  EXPECT_EQ(st.buffer_front(), 2);

  TransitionState s2(2);
  s2 = apply_action(s2, Action::shift());
  try {
    apply_action(s2, Action::reduce());
    FAIL() << "expected Error";
  } catch (const Error& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("REDUCE"), std::string::npos) << what;
    EXPECT_NE(what.find("stack"), std::string::npos) << what;
  }
}

TEST(Oracle, Examples) {
  const auto seq = oracle_transitions({2, 0, 2}, {"nsubj", "root", "obj"});
  ASSERT_EQ(seq.size(), 4u);
  EXPECT_EQ(seq[0].kind, ActionKind::kShift);
  EXPECT_EQ(seq[1], Action::left("nsubj"));
  EXPECT_EQ(seq[2], Action::right("root"));
  EXPECT_EQ(seq[3], Action::right("obj"));
  EXPECT_EQ(oracle_transitions({0}, {"root"}), (std::vector<Action>{Action::right("root")}));
  EXPECT_THROW(oracle_transitions({3, 4, 0, 3}, {"a", "b", "root", "c"}), DataError);
}

TEST(Oracle, ReplayToyTreebank) {
  for (const auto& s : toy(200).sentences) {
    const auto heads = to_conll_heads(*s.heads);
    const auto actions = oracle_transitions(heads, *s.deprels);
    EXPECT_LE(actions.size(), 2 * s.size());
    TransitionState st(s.size());
    for (const auto& a : actions) st = apply_action(st, a);
    std::vector<int> h(s.size());
    std::vector<std::string> l(s.size());
    for (const auto& arc : st.arcs()) {
      h[arc.dependent - 1] = arc.head;
      l[arc.dependent - 1] = arc.label;
    }
    EXPECT_EQ(h, heads);
    EXPECT_EQ(l, *s.deprels);
  }
}

TEST(Oracle, ReplaySmallRandomTrees) {
  Rng rng(17);
  int checked = 0;
  while (checked < 200) {
    const std::size_t n = 1 + rng.uniform_below(6);
    std::vector<int> heads(n);
    const std::size_t root = rng.uniform_below(n);
    for (std::size_t i = 0; i < n; ++i) {
      heads[i] = i == root ? 0 : static_cast<int>(1 + rng.uniform_below(n));
    }
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = heads[i] != static_cast<int>(i + 1);
    if (!ok) continue;
    try {
      if (!is_projective(heads)) continue;
    } catch (const DataError&) {
      continue;
    }
    const std::vector<std::string> labels(n, "dep");
    ASSERT_EQ(replay(oracle_transitions(heads, labels), n), heads);
    ++checked;
  }
}

TEST(ParserModel, EveryTokenGetsOneHeadForAnyWeights) {
  Rng rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ParserModel m(tiny(), LabelSet({"nsubj", "obj", "root"}), 8, seed);
    for (int k = 0; k < 5; ++k) {
      const auto words = random_words(rng, 1 + rng.uniform_below(12));
      const ParseResult r = m.parse(words);
      ASSERT_EQ(r.heads.size(), words.size());
      EXPECT_NO_THROW(validate_tree(r.heads));
      EXPECT_LE(r.transitions, 2 * words.size());
    }
  }
  ParserModel m(tiny(), LabelSet({"root"}), 8, 1);
  EXPECT_EQ(m.parse(std::vector<std::string>{"Oo"}).heads, (std::vector<int>{kRootHead}));
}

TEST(ParserModel, ActionInventory) {
  ParserModel m(tiny(), LabelSet({"nsubj", "root"}), 8, 1);
  EXPECT_EQ(m.num_actions(), 6u);
  for (std::size_t id = 0; id < m.num_actions(); ++id) EXPECT_EQ(m.action_id(m.action(id)), id);
  EXPECT_THROW(m.action_id(Action::left("nope")), Error);
}

TEST(TrainParser, ExcludesNonProjective) {
  Dataset ds = toy(20);
  Sentence np;
  for (const char* w : {"a", "b", "c", "d"}) np.tokens.push_back({w, " "});
  np.upos = std::vector<std::string>(4, "X");
  np.heads = from_conll_heads({3, 4, 0, 3});
  np.deprels = std::vector<std::string>{"dep", "dep", "root", "dep"};
  ds.sentences.push_back(np);
  ParserConfig pc{tiny(), 16, quick(1)};
  EXPECT_EQ(train_parser(ds, {}, pc).excluded_nonprojective, 1u);

  Dataset only;
  only.sentences.push_back(np);
  EXPECT_THROW(train_parser(only, {}, pc), TrainingError);
}

TEST(TrainParser, Deterministic) {
  const Dataset ds = toy(15);
  ParserConfig pc{tiny(), 16, quick(2)};
  EXPECT_EQ(weights_fingerprint(train_parser(ds, {}, pc).model.params()),
            weights_fingerprint(train_parser(ds, {}, pc).model.params()));
}

// ---------------------------------------------------------------------------
// Tagger

TEST(Tagger, ShapesAndErrors) {
  TaggerModel m(tiny(), LabelSet({"NOUN", "VERB"}), 3);
  EXPECT_EQ(m.tag(std::vector<std::string>{"a", "b", "c"}).size(), 3u);
  const auto one = m.tag(std::vector<std::string>{"a"});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_TRUE(m.tags().find(one[0]).has_value());

  TaggerConfig tc{tiny(), quick(1)};
  EXPECT_THROW(train_tagger({}, {}, tc), TrainingError);
  Dataset bad = toy(3);
  bad.sentences[1].upos.reset();
  EXPECT_THROW(train_tagger(bad, {}, tc), DataError);
}

TEST(Tagger, DeterministicAndUnknownTagsScoreAsErrors) {
  const Dataset ds = toy(15);
  TaggerConfig tc{tiny(), quick(2)};
  const auto a = train_tagger(ds, {}, tc);
  const auto b = train_tagger(ds, {}, tc);
  EXPECT_EQ(weights_fingerprint(a.model.params()), weights_fingerprint(b.model.params()));
  Dataset odd = toy(2, 9);
  for (auto& t : *odd.sentences[0].upos) t = "NEVERSEEN";
  const double acc = tagger_accuracy(a.model, odd);
  EXPECT_LT(acc, 1.0);
}

// ---------------------------------------------------------------------------
// NER

TEST(NerActions, LegalNext) {
  const LabelSet types({"LOC", "PER"});
  const std::size_t T = types.size();
  const auto id = [&](NerMove m, const char* t) { return ner_action_id({m, types.at(t)}); };
  const auto after_o = legal_next(static_cast<int>(ner_action_id({NerMove::kO, 0})), T);
  EXPECT_FALSE(after_o[id(NerMove::kI, "PER")]);
  EXPECT_TRUE(after_o[id(NerMove::kB, "PER")]);

  const auto after_b = legal_next(static_cast<int>(id(NerMove::kB, "PER")), T);
  std::vector<std::size_t> allowed;
  for (std::size_t a = 0; a < after_b.size(); ++a) {
    if (after_b[a]) allowed.push_back(a);
  }
  std::vector<std::size_t> expect{id(NerMove::kI, "PER"), id(NerMove::kL, "PER")};
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(allowed, expect);

  EXPECT_TRUE(legal_next(kNerStart, T)[id(NerMove::kU, "LOC")]);
  EXPECT_FALSE(legal_next(kNerStart, T, true)[id(NerMove::kB, "LOC")]);
  EXPECT_FALSE(legal_next(static_cast<int>(id(NerMove::kB, "LOC")), T, true)[id(NerMove::kI, "LOC")]);
}

TEST(NerActions, NamesRoundTrip) {
  const LabelSet types({"LOC", "ORG", "PER"});
  for (std::size_t a = 0; a < ner_num_actions(3); ++a) {
    EXPECT_EQ(ner_action_from_tag(ner_action_name(a, types), types), a);
  }
}

TEST(NerDecode, ValidForRandomWeights) {
  Rng rng(3);
  const LabelSet types({"LOC", "ORG", "PER"});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    NerModel m(tiny(), types, 8, seed);
    for (auto& p : m.params().params()) {
      for (Real& v : p.value.data) v = static_cast<Real>(rng.uniform(-2, 2));
    }
    for (int k = 0; k < 5; ++k) {
      const auto d = m.decode(random_words(rng, 1 + rng.uniform_below(15)));
      ASSERT_TRUE(is_legal_sequence(d.actions, types.size()));
      EXPECT_EQ(biluo_to_spans(d.tags), d.spans);
    }
  }
}

TEST(NerDecode, SpansFromActions) {
  const LabelSet types({"PER"});
  const std::vector<std::size_t> ids{ner_action_id({NerMove::kB, 0}), ner_action_id({NerMove::kL, 0}),
                                     ner_action_id({NerMove::kO, 0})};
  EXPECT_TRUE(is_legal_sequence(ids, 1));
  std::vector<std::string> tags;
  for (auto a : ids) tags.push_back(ner_action_name(a, types));
  EXPECT_EQ(biluo_to_spans(tags), (std::vector<Span>{{0, 2, "PER"}}));
  EXPECT_FALSE(is_legal_sequence({ner_action_id({NerMove::kI, 0})}, 1));
}

TEST(TrainNer, ZeroEntitiesDecodesAllO) {
  Dataset ds = toy(10);
  for (auto& s : ds.sentences) s.ents.clear();
  NerConfig nc{tiny(), 8, quick(1)};
  const auto r = train_ner(ds, {}, nc);
  for (const auto& s : ds.sentences) EXPECT_TRUE(r.model.entities(s).empty());
}

TEST(TrainNer, Deterministic) {
  const Dataset ds = toy(15);
  NerConfig nc{tiny(), 8, quick(2)};
  EXPECT_EQ(weights_fingerprint(train_ner(ds, {}, nc).model.params()),
            weights_fingerprint(train_ner(ds, {}, nc).model.params()));
}

// ---------------------------------------------------------------------------
// Text categorization

TEST(Bow, Keys) {
  EXPECT_EQ(bow_keys({"ako", "si", "juan"}),
            (std::vector<std::string>{"ako", "si", "juan", "ako si", "si juan"}));
  EXPECT_EQ(bow_keys({"Oo"}), (std::vector<std::string>{"oo"}));
  const auto a = bow_features({"ako", "si"}, 1024);
  const auto b = bow_features({"ako", "si"}, 1024);
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.values, b.values);
  double norm = 0;
  for (Real v : a.values) norm += double(v) * v;
  EXPECT_NEAR(norm, 1.0, 1e-6);
}

TEST(TextcatModel, EnsembleIsMeanOfHeads) {
  TextcatModel m(tiny(), LabelSet({"a", "b"}), 64, 4, 1);
  auto& store = m.params();
  store.find("textcat.out.W")->value.fill(0);
  store.find("textcat.bow.b")->value.data = {std::log(0.8f), std::log(0.2f)};
  store.find("textcat.out.b")->value.data = {std::log(0.6f), std::log(0.4f)};
  const auto out = m.classify({"kumain", "ako"});
  EXPECT_NEAR(out.bow[0], 0.8, 1e-6);
  EXPECT_NEAR(out.ffn[0], 0.6, 1e-6);
  EXPECT_NEAR(out.probs[0], 0.7, 1e-6);
  EXPECT_NEAR(out.probs[1], 0.3, 1e-6);

  store.find("textcat.bow.b")->value.fill(0);
  store.find("textcat.out.b")->value.fill(0);
  const auto uni = m.classify({"kumain"});
  EXPECT_NEAR(uni.probs[0], 0.5, 1e-6);
}

TEST(TextcatModel, ProbabilitiesSumToOne) {
  Rng rng(12);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TextcatModel m(tiny(), LabelSet({"a", "b", "c"}), 64, 4, seed);
    for (auto& p : m.params().params()) {
      for (Real& v : p.value.data) v = static_cast<Real>(rng.uniform(-1, 1));
    }
    const auto out = m.classify(random_words(rng, 1 + rng.uniform_below(8)));
    EXPECT_NEAR(std::accumulate(out.probs.begin(), out.probs.end(), 0.0), 1.0, 1e-6);
  }
}

TEST(TrainTextcat, LabelRules) {
  TextcatConfig tc;
  tc.tok2vec = tiny();
  tc.buckets = 256;
  tc.hidden = 8;
  tc.training = quick(1);
  const Dataset ds = toy(6);
  tc.labels = {"food"};
  EXPECT_THROW(train_textcat(ds, {}, tc), Error);
  tc.labels = {"food", "sports"};
  EXPECT_THROW(train_textcat(ds, {}, tc), DataError);

  Dataset single;
  single.sentences.push_back(ds.sentences[0]);
  tc.labels = {"food", "travel"};
  EXPECT_NO_THROW(train_textcat(single, {}, tc));
}

TEST(TrainTextcat, Deterministic) {
  TextcatConfig tc;
  tc.tok2vec = tiny();
  tc.buckets = 256;
  tc.hidden = 8;
  tc.training = quick(2);
  const Dataset ds = toy(12);
  EXPECT_EQ(weights_fingerprint(train_textcat(ds, {}, tc).model.params()),
            weights_fingerprint(train_textcat(ds, {}, tc).model.params()));
}
