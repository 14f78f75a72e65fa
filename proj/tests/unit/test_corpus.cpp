#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "tala/corpus.hpp"
#include "tala/error.hpp"
#include "tala/random.hpp"
#include "tala/tokenizer.hpp"
#include "tala/toy_corpus.hpp"

using namespace tala;

namespace {

Dataset conllu(const std::string& text) {
  std::istringstream in(text);
  return read_conllu(in);
}

IobReadResult iob(const std::string& text) {
  std::istringstream in(text);
  return read_iob(in);
}

std::string row(int id, const std::string& form, const std::string& upos, int head, const std::string& rel,
                const std::string& misc = "_") {
  return std::to_string(id) + "\t" + form + "\t_\t" + upos + "\t_\t_\t" + std::to_string(head) + "\t" + rel +
         "\t_\t" + misc + "\n";
}

}  // namespace

TEST(Conllu, TwoTokenBlock) {
  const Dataset ds = conllu(row(1, "Ako", "PRON", 0, "root") + row(2, "si", "ADP", 1, "case") + "\n");
  ASSERT_EQ(ds.size(), 1u);
  const Sentence& s = ds.sentences[0];
  EXPECT_EQ(s.words(), (std::vector<std::string>{"Ako", "si"}));
  EXPECT_EQ(*s.heads, (std::vector<int>{kRootHead, 0}));
  EXPECT_EQ(*s.deprels, (std::vector<std::string>{"root", "case"}));
  EXPECT_EQ(*s.upos, (std::vector<std::string>{"PRON", "ADP"}));
}

TEST(Conllu, EmptyStream) { EXPECT_TRUE(conllu("").empty()); }

TEST(Conllu, RangeLinesSkipped) {
  const std::string text = "1-2\tAkosi\t_\t_\t_\t_\t_\t_\t_\t_\n" + row(1, "Ako", "PRON", 0, "root") +
                           row(2, "si", "ADP", 1, "case") + "\n";
  EXPECT_EQ(conllu(text).sentences.at(0).size(), 2u);
}

TEST(Conllu, CommentsAndEmptyNodesSkipped) {
  const std::string text = "# sent_id = 1\n# text = Ako si\n" + row(1, "Ako", "PRON", 0, "root") +
                           "1.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n" + row(2, "si", "ADP", 1, "case") + "\n";
  EXPECT_EQ(conllu(text).sentences.at(0).size(), 2u);
}

TEST(Conllu, ColumnCountErrorHasLineNumber) {
  const std::string text = row(1, "Ako", "PRON", 0, "root") + "2\tsi\t_\tADP\n\n";
  try {
    conllu(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Conllu, HeadOutOfRange) {
  EXPECT_THROW(conllu(row(1, "Ako", "PRON", 0, "root") + row(2, "si", "ADP", 5, "case") + "\n"), ParseError);
}

TEST(Conllu, CycleAndMultiRootRejected) {
  EXPECT_THROW(conllu(row(1, "a", "X", 0, "root") + row(2, "b", "X", 0, "root") + "\n"), ParseError);
  EXPECT_THROW(conllu(row(1, "a", "X", 2, "dep") + row(2, "b", "X", 1, "dep") + "\n"), ParseError);
}

TEST(Conllu, WriteOneSentenceEndsWithBlankLine) {
  const Dataset ds = conllu(row(1, "Ako", "PRON", 0, "root") + row(2, "si", "ADP", 1, "case") + "\n");
  const std::string text = write_conllu(ds);
  ASSERT_GE(text.size(), 2u);
  EXPECT_EQ(text.substr(text.size() - 2), "\n\n");
  EXPECT_EQ(write_conllu(Dataset{}), "");
}

TEST(Conllu, WriteRequiresAnnotations) {
  Dataset ds;
  Sentence s;
  s.tokens = {{"a", " "}};
  ds.sentences.push_back(s);
  EXPECT_THROW(write_conllu(ds), DataError);
}

TEST(Conllu, RoundTripToyCorpus) {
  const Dataset ds = make_toy_corpus({60, 3});
  const Dataset back = conllu(write_conllu(ds));
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Sentence& a = ds.sentences[i];
    const Sentence& b = back.sentences[i];
    EXPECT_EQ(a.tokens, b.tokens);
    EXPECT_EQ(a.upos, b.upos);
    EXPECT_EQ(a.heads, b.heads);
    EXPECT_EQ(a.deprels, b.deprels);
    EXPECT_EQ(a.ents, b.ents);
  }
  EXPECT_EQ(write_conllu(back), write_conllu(ds));
}

TEST(Iob, SingleSpan) {
  const auto r = iob("Juan\tB-PER\nCruz\tI-PER\n.\tO\n\n");
  ASSERT_EQ(r.dataset.size(), 1u);
  EXPECT_EQ(r.dataset.sentences[0].ents, (std::vector<Span>{{0, 2, "PER"}}));
  EXPECT_EQ(r.repairs, 0u);
}

TEST(Iob, AllOutside) { EXPECT_TRUE(iob("ng\tO\nbahay\tO\n").dataset.sentences.at(0).ents.empty()); }

TEST(Iob, RepairsIOpening) {
  const auto r = iob("ng\tO\nMaynila\tI-LOC\n\n");
  EXPECT_EQ(r.dataset.sentences.at(0).ents, (std::vector<Span>{{1, 2, "LOC"}}));
  EXPECT_EQ(r.repairs, 1u);
}

TEST(Iob, RejectsBadTagsAndMisc) {
  EXPECT_THROW(iob("Juan\tU-PER\n"), ParseError);
  EXPECT_THROW(iob("Juan\tB-MISC\n"), ParseError);
  std::istringstream in("Juan\tB-MISC\n");
  EXPECT_NO_THROW(read_iob(in, IobReadOptions{false}));
}

TEST(Iob, RoundTrip) {
  const Dataset ds = make_toy_corpus({30, 4});
  const Dataset back = iob(write_iob(ds)).dataset;
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(back.sentences[i].ents, ds.sentences[i].ents);
}

TEST(Biluo, Encode) {
  EXPECT_EQ(spans_to_biluo(4, {{0, 2, "PER"}}), (std::vector<std::string>{"B-PER", "L-PER", "O", "O"}));
  EXPECT_EQ(spans_to_biluo(3, {{1, 2, "LOC"}}), (std::vector<std::string>{"O", "U-LOC", "O"}));
  EXPECT_EQ(spans_to_biluo(2, {}), (std::vector<std::string>{"O", "O"}));
  EXPECT_EQ(spans_to_biluo(4, {{0, 3, "ORG"}}), (std::vector<std::string>{"B-ORG", "I-ORG", "L-ORG", "O"}));
}

TEST(Biluo, OverlapRejected) { EXPECT_THROW(spans_to_biluo(4, {{0, 2, "PER"}, {1, 3, "LOC"}}), DataError); }

TEST(Biluo, Decode) {
  EXPECT_EQ(biluo_to_spans({"B-PER", "L-PER", "O"}), (std::vector<Span>{{0, 2, "PER"}}));
  EXPECT_EQ(biluo_to_spans({"U-LOC"}), (std::vector<Span>{{0, 1, "LOC"}}));
  EXPECT_TRUE(biluo_to_spans({"O", "O"}).empty());
}

TEST(Biluo, InvalidSequenceStrictAndLenient) {
  try {
    biluo_to_spans({"O", "I-PER", "L-PER"});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(biluo_to_spans({"B-PER", "L-LOC"}), DataError);
  EXPECT_THROW(biluo_to_spans({"B-PER"}), DataError);
  EXPECT_EQ(biluo_to_spans({"O", "I-PER", "L-PER", "U-LOC"}, BiluoMode::kLenient),
            (std::vector<Span>{{3, 4, "LOC"}}));
}

TEST(Biluo, RandomRoundTrip) {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(20);
    std::vector<Span> spans;
    std::size_t i = 0;
    while (i < n) {
      if (rng.uniform() < 0.4) {
        const std::size_t len = 1 + rng.uniform_below(std::min<std::size_t>(4, n - i));
        spans.push_back({i, i + len, rng.uniform() < 0.5 ? "PER" : "LOC"});
        i += len;
      } else {
        ++i;
      }
    }
    ASSERT_EQ(biluo_to_spans(spans_to_biluo(n, spans)), spans);
  }
}

TEST(Textcat, ReadsTokensAndText) {
  std::istringstream in(R"({"tokens": ["Kumain", "si", "Ana"], "label": "food"})"
                        "\n"
                        R"({"text": "Pumunta si Juan.", "label": "travel"})"
                        "\n");
  const Dataset ds = read_textcat_jsonl(in);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(*ds.sentences[0].category, "food");
  EXPECT_EQ(ds.sentences[1].words(), (std::vector<std::string>{"Pumunta", "si", "Juan", "."}));
}

TEST(Textcat, MissingLabelIsError) {
  std::istringstream in("{\"tokens\": [\"a\"]}\n");
  EXPECT_THROW(read_textcat_jsonl(in), ParseError);
}

TEST(KFold, SizesFromExample) {
  EXPECT_EQ(kfold_sizes(23, 10), (std::vector<std::size_t>{3, 3, 3, 2, 2, 2, 2, 2, 2, 2}));
  Dataset ds = make_toy_corpus({23, 1});
  const auto folds = kfold_split(ds, 10, 5);
  ASSERT_EQ(folds.size(), 10u);
  for (std::size_t f = 0; f < 10; ++f) EXPECT_EQ(folds[f].test.size(), kfold_sizes(23, 10)[f]);
}

TEST(KFold, NEqualsK) {
  const Dataset ds = make_toy_corpus({7, 1});
  for (const auto& f : kfold_split(ds, 7, 2)) EXPECT_EQ(f.test.size(), 1u);
}

TEST(KFold, BadK) {
  const Dataset ds = make_toy_corpus({5, 1});
  EXPECT_THROW(kfold_split(ds, 1, 0), DataError);
  EXPECT_THROW(kfold_split(ds, 6, 0), DataError);
}

TEST(KFold, DisjointCoveringAndDeterministic) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.uniform_below(40);
    const std::size_t k = 2 + rng.uniform_below(n - 1);
    const Dataset ds = make_toy_corpus({n, rng.next()});
    const std::uint64_t seed = rng.next();
    const auto folds = kfold_split(ds, k, seed);
    std::vector<std::size_t> all;
    for (const auto& f : folds) {
      EXPECT_EQ(f.train.size() + f.test.size(), n);
      all.insert(all.end(), f.test_indices.begin(), f.test_indices.end());
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(n);
    std::iota(expect.begin(), expect.end(), 0);
    EXPECT_EQ(all, expect);
    const auto again = kfold_split(ds, k, seed);
    for (std::size_t f = 0; f < k; ++f) EXPECT_EQ(again[f].test_indices, folds[f].test_indices);
  }
}

TEST(Holdout, LargestRemainder) {
  EXPECT_EQ(holdout_sizes(10, {0.7, 0.1, 0.2}), (std::vector<std::size_t>{7, 1, 2}));
  EXPECT_THROW(holdout_sizes(10, {1.0, 0.0, 0.0}), DataError);
  const Dataset ds = make_toy_corpus({10, 1});
  const auto a = holdout_split(ds, {0.7, 0.1, 0.2}, 3);
  const auto b = holdout_split(ds, {0.7, 0.1, 0.2}, 3);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size() + a.dev.size() + a.test.size(), 10u);
}

TEST(Tokenizer, Example) {
  const auto t = tokenize("Ako si Juan.");
  std::vector<std::string> words;
  for (const auto& tok : t.tokens) words.push_back(tok.text);
  EXPECT_EQ(words, (std::vector<std::string>{"Ako", "si", "Juan", "."}));
  EXPECT_TRUE(tokenize("").tokens.empty());
}

TEST(Tokenizer, RandomRoundTrip) {
  const std::string alphabet = "ab .,!?-'\n\t\"()Ññé";
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const std::size_t len = rng.uniform_below(30);
    for (std::size_t i = 0; i < len; ++i) {
      // Multi-byte characters are kept whole.
      const std::size_t j = rng.uniform_below(alphabet.size());
      if (static_cast<unsigned char>(alphabet[j]) >= 0x80) {
        s += "ñ";
      } else {
        s += alphabet[j];
      }
    }
    ASSERT_EQ(detokenize(tokenize(s)), s) << "input: '" << s << "'";
  }
}

TEST(Tokenizer, SentenceStarts) {
  const auto t = tokenize("Kumain ako. Umuwi si Ana!");
  EXPECT_EQ(sentence_starts(t.tokens), (std::vector<std::size_t>{0, 3}));
}
