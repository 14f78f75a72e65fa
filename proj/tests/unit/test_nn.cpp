#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "tala/error.hpp"
#include "tala/nn.hpp"
#include "tala/random.hpp"

using namespace tala;

namespace {

Tensor mat(std::size_t r, std::size_t c, std::vector<Real> values) {
  Tensor t = Tensor::matrix(r, c);
  t.data = std::move(values);
  return t;
}

}  // namespace

TEST(Linear, Identity) {
  const Tensor I = mat(2, 2, {1, 0, 0, 1});
  EXPECT_EQ(linear(I, I, Tensor::vector(2)).data, I.data);
}

TEST(Linear, HandProduct) {
  const Tensor y = linear(mat(1, 2, {1, 2}), mat(2, 1, {1, 1}), Tensor::vector(1));
  EXPECT_EQ(y.dims, (std::vector<std::size_t>{1, 1}));
  EXPECT_FLOAT_EQ(y.data[0], 3.0f);
}

TEST(Linear, ShapeMismatchNamesShapes) {
  try {
    linear(Tensor::matrix(2, 3), Tensor::matrix(2, 2), Tensor::vector(2));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("2x3"), std::string::npos) << what;
    EXPECT_NE(what.find("2x2"), std::string::npos) << what;
  }
}

TEST(SoftmaxXent, ClosedForms) {
  const std::vector<std::size_t> gold{0};
  EXPECT_NEAR(softmax_xent(mat(1, 2, {0, 0}), gold).loss, std::log(2.0), 1e-6);
  const auto big = softmax_xent(mat(1, 2, {1000, 0}), gold);
  EXPECT_TRUE(std::isfinite(big.loss));
  EXPECT_NEAR(big.loss, 0.0, 1e-6);
  EXPECT_TRUE(big.dlogits.all_finite());
  for (std::size_t c : {3u, 7u, 50u}) {
    EXPECT_NEAR(softmax_xent(Tensor::matrix(1, c, 0.25f), gold).loss, std::log(double(c)), 1e-5);
  }
  const std::vector<std::size_t> bad{2};
  EXPECT_THROW(softmax_xent(mat(1, 2, {0, 0}), bad), Error);
}

TEST(Softmax, RowsSumToOne) {
  Rng rng(3);
  Tensor x = Tensor::matrix(20, 9);
  for (Real& v : x.data) v = static_cast<Real>(rng.uniform(-30, 30));
  const Tensor p = softmax(x);
  for (std::size_t i = 0; i < 20; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 9; ++j) s += p(i, j);
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(MaskedArgmax, RespectsMask) {
  const std::vector<Real> s{5, 1, 3};
  const std::vector<std::uint8_t> mask{0, 1, 1};
  EXPECT_EQ(masked_argmax(s.data(), 3, mask), 2u);
  EXPECT_EQ(argmax(s.data(), 3), 0u);
}

TEST(Adam, FirstStep) {
  ParamStore store;
  store.add("x", Tensor::vector(1, 0.5f));
  store.grad(0).data[0] = 1;
  AdamConfig cfg;
  cfg.grad_clip = 0;
  adam_step(store, cfg);
  EXPECT_NEAR(store.value(0).data[0], 0.5 - 0.001, 1e-6);
}

TEST(Adam, ZeroGradientKeepsParamsAndDecaysMoments) {
  ParamStore store;
  store.add("x", Tensor::vector(1, 0.5f));
  store.grad(0).data[0] = 1;
  adam_step(store, {});
  const Real after_first = store.value(0).data[0];
  const Real m1 = store[0].m.data[0];
  const Real v1 = store[0].v.data[0];
  store.zero_grad();
  ParamStore copy = store;
  copy[0].m.fill(0);
  copy[0].v.fill(0);
  adam_step(copy, {});
  EXPECT_EQ(copy.value(0).data[0], after_first);
  adam_step(store, {});
  EXPECT_LT(std::abs(store[0].m.data[0]), std::abs(m1));
  EXPECT_LT(store[0].v.data[0], v1);
}

TEST(Adam, NonFiniteGradientFails) {
  ParamStore store;
  store.add("x", Tensor::vector(1, 0.5f));
  store.grad(0).data[0] = std::numeric_limits<Real>::quiet_NaN();
  EXPECT_THROW(adam_step(store, {}), TrainingError);
}

TEST(Adam, Deterministic) {
  const auto run = [] {
    Rng rng(9);
    ParamStore store;
    Tensor w = Tensor::matrix(4, 4);
    init_he_uniform(w, 4, rng);
    store.add("w", w);
    for (int step = 0; step < 10; ++step) {
      for (std::size_t i = 0; i < 16; ++i) store.grad(0).data[i] = static_cast<Real>(rng.uniform(-1, 1));
      adam_step(store, {});
    }
    return store.value(0);
  };
  EXPECT_EQ(run(), run());
}

TEST(GradCheck, Square) {
  ParamStore store;
  store.add("x", Tensor::vector(1, 3.0f));
  const auto loss = [&](bool grads) {
    const double x = store.value(0).data[0];
    if (grads) store.grad(0).data[0] += static_cast<Real>(2 * x);
    return x * x;
  };
  GradCheckOptions opt;
  opt.step = 1e-2;  // exact for a quadratic, and representable in float
  const auto r = grad_check(loss, store, opt);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(Weights, RoundTripAndErrors) {
  Rng rng(1);
  ParamStore store;
  Tensor w = Tensor::matrix(3, 2);
  init_uniform(w, 1.0, rng);
  store.add("a.W", w);
  store.add("a.b", Tensor::vector(2, 0.5f));
  std::stringstream buf;
  write_weights(buf, store);
  ParamStore other;
  other.add("a.W", Tensor::matrix(3, 2));
  other.add("a.b", Tensor::vector(2));
  load_weights(other, read_weights(buf));
  EXPECT_EQ(other.value(0), store.value(0));
  EXPECT_EQ(weights_fingerprint(other), weights_fingerprint(store));

  ParamStore wrong;
  wrong.add("a.W", Tensor::matrix(2, 3));
  wrong.add("a.b", Tensor::vector(2));
  std::stringstream buf2;
  write_weights(buf2, store);
  EXPECT_THROW(load_weights(wrong, read_weights(buf2)), Error);

  std::stringstream junk("not a weight file");
  EXPECT_THROW(read_weights(junk), Error);
}
