#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "tala/error.hpp"
#include "tala/floret.hpp"
#include "tala/hash.hpp"
#include "tala/pretrain.hpp"
#include "tala/random.hpp"
#include "tala/tok2vec.hpp"

using namespace tala;

namespace {

Tok2VecConfig tiny() {
  Tok2VecConfig c;
  c.width = 8;
  c.embed_width = 8;
  c.depth = 1;
  c.rows = {50, 20, 30, 10};
  return c;
}

std::vector<std::vector<std::string>> small_corpus() {
  return {{"Kumain", "si", "Juan", "ng", "adobo", "."},
          {"Pumunta", "si", "Maria", "sa", "Cebu", "."},
          {"Umuwi", "si", "Ana", "sa", "Davao", "kahapon", "."}};
}

}  // namespace

TEST(Hash32, ReferenceVectors) {
  EXPECT_EQ(hash32("", 0), 0u);
  EXPECT_EQ(hash32("", 1), 1364076727u);
  EXPECT_EQ(hash32("Hello, world!", 1234), 4210478515u);
  EXPECT_EQ(hash32("The quick brown fox jumps over the lazy dog", 0), 776992547u);
  EXPECT_EQ(hash32(std::string_view("\0\0\0\0", 4), 0), 593689054u);
  EXPECT_EQ(hash32("aso", 1), 4006277061u);
  EXPECT_EQ(hash32("aso", 2), 2851976061u);
  EXPECT_EQ(hash32("aso", 1), hash32("aso", 1));
}

TEST(Attributes, Fields) {
  const AttributeSet a = token_attributes("Maynila");
  EXPECT_EQ(a.norm, "maynila");
  EXPECT_EQ(a.prefix, "M");
  EXPECT_EQ(a.suffix, "ila");
  EXPECT_EQ(a.shape, "Xxxxx");
  EXPECT_EQ(word_shape("2024-ABC"), "dddd-XXX");
  EXPECT_EQ(token_attributes("Ñu").prefix, "Ñ");
}

TEST(MultiHash, OneRowTableSumsKCopies) {
  Tok2VecConfig c = tiny();
  c.rows = {1, 1, 1, 1};
  c.depth = 0;
  ParamStore store;
  Rng rng(1);
  const Tok2Vec t2v(c, store, rng);
  std::vector<std::size_t> rows;
  t2v.table(0).row_indices("anything", rows);
  EXPECT_EQ(rows, std::vector<std::size_t>(c.num_hashes, 0));
}

TEST(Tok2Vec, ZeroTablesGiveZeroEmbedding) {
  ParamStore store;
  Rng rng(1);
  const Tok2Vec t2v(tiny(), store, rng);
  for (auto& p : store.params()) {
    if (p.name.find(".embed.") != std::string::npos) p.value.fill(0);
  }
  const Tensor e = t2v.embed_attributes(store, {token_attributes("aso")}, {"aso"});
  for (Real v : e.data) EXPECT_EQ(v, 0);
}

TEST(Tok2Vec, IdenticalTokensIdenticalVectorsAndShape) {
  ParamStore store;
  Rng rng(2);
  const Tok2Vec t2v(tiny(), store, rng);
  const Tensor e = t2v.embed_tokens(store, {"aso", "pusa", "aso"});
  for (std::size_t j = 0; j < e.cols(); ++j) EXPECT_EQ(e(0, j), e(2, j));
  const Tensor y = t2v.forward(store, {"Ako", "si", "Juan"});
  EXPECT_EQ(y.rows(), 3u);
  EXPECT_EQ(y.cols(), 8u);
}

TEST(Tok2Vec, DepthZeroIsIdentityOnMixedVectors) {
  Tok2VecConfig c = tiny();
  c.depth = 0;
  ParamStore store;
  Rng rng(3);
  const Tok2Vec t2v(c, store, rng);
  Tensor v = Tensor::matrix(2, c.width, 0.25f);
  EXPECT_EQ(t2v.encode_context(store, v).data, v.data);
}

TEST(Tok2Vec, SingleTokenFinite) {
  ParamStore store;
  Rng rng(4);
  const Tok2Vec t2v(tiny(), store, rng);
  EXPECT_TRUE(t2v.forward(store, {"Oo"}).all_finite());
}

TEST(Tok2Vec, WindowConcatPadsWithZeros) {
  Tensor x = Tensor::matrix(2, 1);
  x.data = {1, 2};
  const Tensor w = window_concat(x, 1);
  EXPECT_EQ(w.data, (std::vector<Real>{0, 1, 2, 1, 2, 0}));
}

TEST(Cloze, Targets) {
  EXPECT_EQ(cloze_targets("bahay", 2), (std::vector<std::uint8_t>{0x62, 0x61, 0x61, 0x79}));
  const auto si = cloze_targets("si", 4);
  EXPECT_EQ(std::vector<std::uint8_t>(si.begin(), si.begin() + 4), (std::vector<std::uint8_t>{0x73, 0x69, 0, 0}));
}

TEST(Cloze, PerfectPredictorZeroLoss) {
  ParamStore store;
  Rng rng(1);
  const ClozeHead head(store, 1, 1, rng);
  // One input unit carrying a huge weight on each target byte.
  Tensor& W = store.value(0);
  W.fill(0);
  const auto targets = cloze_targets("a", 1);
  for (std::size_t g = 0; g < targets.size(); ++g) W(0, g * 256 + targets[g]) = 1e4f;
  Tensor x = Tensor::matrix(1, 1, 1.0f);
  EXPECT_NEAR(head.loss(store, x, {"a"}), 0.0, 1e-9);
}

TEST(Pretrain, LossDecreasesAndDeterministic) {
  std::vector<std::vector<std::string>> corpus;
  for (int r = 0; r < 6; ++r) {
    for (const auto& s : small_corpus()) corpus.push_back(s);
  }
  PretrainConfig pc;
  pc.epochs = 2;
  pc.adam.lr = 0.01;
  const auto a = pretrain(corpus, tiny(), pc);
  ASSERT_EQ(a.epoch_losses.size(), 2u);
  EXPECT_LT(a.epoch_losses[1], a.epoch_losses[0]);
  const auto b = pretrain(corpus, tiny(), pc);
  EXPECT_EQ(weights_fingerprint(a.store), weights_fingerprint(b.store));
  pc.epochs = 0;
  const auto init = pretrain(corpus, tiny(), pc);
  const ParamStore fresh = init_tok2vec_store(tiny(), pc.seed);
  EXPECT_EQ(init.store.find("tok2vec.mix.W")->value, fresh.find("tok2vec.mix.W")->value);
  EXPECT_THROW(pretrain({}, tiny(), pc), DataError);
}

TEST(Floret, NgramKeys) {
  const auto keys = floret_keys("aso", 3, 5);
  const std::set<std::string> got(keys.begin(), keys.end());
  const std::set<std::string> expect{"<as", "aso", "so>", "<aso", "aso>", "<aso>"};
  for (const auto& k : expect) EXPECT_TRUE(got.count(k)) << k;
}

TEST(Floret, TrainLookupDeterministic) {
  FloretConfig fc;
  fc.buckets = 500;
  fc.dim = 8;
  fc.epochs = 2;
  const auto corpus = small_corpus();
  const FloretTable a = train_floret(corpus, fc);
  const FloretTable b = train_floret(corpus, fc);
  EXPECT_EQ(a.weights, b.weights);
  const auto v1 = floret_lookup("kinain", a);
  const auto v2 = floret_lookup("kinain", a);
  EXPECT_EQ(v1.size(), 8u);
  EXPECT_EQ(v1, v2);
  for (Real x : v1) EXPECT_TRUE(std::isfinite(x));
  EXPECT_THROW(train_floret({}, fc), DataError);
}

TEST(Floret, DegenerateAndZero) {
  FloretConfig fc;
  fc.buckets = 50;
  fc.dim = 4;
  fc.epochs = 1;
  const FloretTable t = train_floret({{"aso", "aso", "aso"}}, fc);
  for (Real x : floret_lookup("aso", t)) EXPECT_TRUE(std::isfinite(x));
  FloretTable zero = make_floret_table(fc);
  zero.weights.fill(0);
  for (Real x : floret_lookup("bago", zero)) EXPECT_EQ(x, 0);
}
