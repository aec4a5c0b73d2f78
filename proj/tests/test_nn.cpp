#include <doctest.h>

#include <cmath>
#include <random>

#include "gesturekit/nn/gradcheck.hpp"
#include "gesturekit/nn/model.hpp"
#include "gesturekit/nn/train.hpp"

using namespace gk::nn;

namespace {

int pick(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

TEST_CASE("finite differences validate every layer over 20 random shapes") {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  auto run = [&](Layer<double>& l, std::vector<int> shape, int probes = 8,
                 bool train = true) {
    const auto r = check_layer_gradients(l, shape, rng, probes, train);
    CHECK(r.max_rel_err < 1e-5);
    worst = std::max(worst, r.max_rel_err);
  };

  for (int i = 0; i < 20; ++i) {
    const int n = pick(rng, 1, 3), c = pick(rng, 1, 4), oc = pick(rng, 1, 4);
    const int h = pick(rng, 3, 7), w = pick(rng, 3, 7);
    {
      Conv2d<double> l(c, oc, pick(rng, 0, 1) ? 1 : 3, pick(rng, 1, 2));
      run(l, {n, h, w, c});
    }
    {
      Conv2d<double> l(c, oc, 3, 1, Padding::Valid);
      run(l, {n, h, w, c});
    }
    {
      MaxPool2d<double> l;
      run(l, {n, h, w, c});
    }
    {
      BatchNorm<double> l(c);
      run(l, {pick(rng, 2, 4), h, w, c});
    }
    {
      BatchNorm<double> l(c);
      run(l, {n, h, w, c}, /*probes*/ 8, /*train*/ false);
    }
    {
      Relu<double> l;
      run(l, {n, h, w, c});
    }
    {
      Dense<double> l(h * w, pick(rng, 1, 6));
      run(l, {n, h * w});
    }
    {
      Flatten<double> l;
      run(l, {n, h, w, c});
    }
    {
      GlobalAvgPool<double> l;
      run(l, {n, h, w, c});
    }
    {
      Softmax<double> l;
      run(l, {n, pick(rng, 2, 6)});
    }
    {
      ResidualBlock<double> l(c, oc, pick(rng, 1, 2));
      run(l, {pick(rng, 2, 4), h, w, c});
    }
  }
  MESSAGE("max relative error ", worst);
}

TEST_CASE("convolution reproduces hand-computed outputs") {
  // delta kernel at the center copies the input
  Conv2d<double> id(1, 1, 3);
  id.weights().v.assign(9, 0.0);
  id.weights().v[4] = 1.0;  // center tap of the 3x3 kernel
  Tensor<double> x({1, 4, 4, 1});
  for (std::size_t i = 0; i < x.size(); ++i) x.v[i] = static_cast<double>(i);
  auto y = id.forward(x, false);
  REQUIRE(y.shape == x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.v[i] == x.v[i]);

  // all-ones kernel on all-ones input counts the valid neighborhood
  Conv2d<double> sum(1, 1, 3);
  sum.weights().v.assign(9, 1.0);
  Tensor<double> ones({1, 4, 4, 1});
  ones.v.assign(16, 1.0);
  auto s = sum.forward(ones, false);
  CHECK(s.v[0] == 4.0);                // corner: 2x2 neighborhood
  CHECK(s.v[1 * 4 + 1] == 9.0);        // interior
  CHECK(s.v[0 * 4 + 1] == 6.0);        // edge

  // bias is added per output channel
  sum.bias().v[0] = 0.5;
  CHECK(sum.forward(ones, false).v[5] == 9.5);
}

TEST_CASE("conv stride and padding modes give the documented shapes") {
  Conv2d<double> same(3, 8, 3, 2);
  Tensor<double> x({2, 9, 9, 3});
  CHECK(same.forward(x, false).shape == std::vector<int>{2, 5, 5, 8});
  Conv2d<double> valid(3, 8, 3, 1, Padding::Valid);
  CHECK(valid.forward(x, false).shape == std::vector<int>{2, 7, 7, 8});
  CHECK_THROWS_AS(Conv2d<double>(1, 1, 2), std::invalid_argument);
  Conv2d<double> wrong(4, 1, 3);
  CHECK_THROWS_AS(wrong.forward(x, false), std::invalid_argument);
}

TEST_CASE("maxpool picks window maxima with replicate edge handling") {
  MaxPool2d<double> pool;
  Tensor<double> x({1, 3, 3, 1});
  x.v = {1, 5, 2,
         4, 3, 6,
         9, 7, 8};
  auto y = pool.forward(x, false);
  REQUIRE(y.shape == std::vector<int>{1, 2, 2, 1});
  CHECK(y.v[0] == 5.0);
  CHECK(y.v[1] == 6.0);  // last column replicated
  CHECK(y.v[2] == 9.0);
  CHECK(y.v[3] == 8.0);

  // gradient routes to the (first) winner only
  Tensor<double> dy({1, 2, 2, 1});
  dy.v = {1, 1, 1, 1};
  auto dx = pool.backward(dy);
  CHECK(dx.v[1] == 1.0);
  CHECK(dx.v[5] == 1.0);
  CHECK(dx.v[6] == 1.0);
  CHECK(dx.v[8] == 1.0);
  CHECK(dx.v[0] == 0.0);
}

TEST_CASE("batchnorm standardizes with batch stats and tracks running stats") {
  BatchNorm<double> bn(2);
  Tensor<double> x({4, 1, 1, 2});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(2.0, 3.0);
  for (auto& v : x.v) v = gauss(rng);
  auto y = bn.forward(x, true);
  for (int c = 0; c < 2; ++c) {
    double mean = 0.0, var = 0.0;
    for (int n = 0; n < 4; ++n) mean += y.v[n * 2 + c];
    mean /= 4.0;
    for (int n = 0; n < 4; ++n) var += std::pow(y.v[n * 2 + c] - mean, 2);
    var /= 4.0;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps-regularized
  }
  // running stats move toward the batch stats with momentum 0.1
  double batch_mean0 = 0.0;
  for (int n = 0; n < 4; ++n) batch_mean0 += x.v[n * 2];
  batch_mean0 /= 4.0;
  CHECK(bn.running_mean().v[0] == doctest::Approx(0.1 * batch_mean0));

  CHECK_THROWS_AS(
      [&] {
        Tensor<double> single({1, 1, 1, 2});
        bn.forward(single, true);
      }(),
      std::invalid_argument);

  // inference uses the stored statistics, independent of the batch
  Tensor<double> a({2, 1, 1, 2}), b({2, 1, 1, 2});
  a.v = {1.0, 2.0, 3.0, 4.0};
  b.v = {1.0, 2.0, -50.0, 60.0};
  auto ya = bn.forward(a, false);
  auto yb = bn.forward(b, false);
  CHECK(ya.v[0] == doctest::Approx(yb.v[0]));
  CHECK(ya.v[1] == doctest::Approx(yb.v[1]));
}

TEST_CASE("softmax cross-entropy: uniform logits cost ln K") {
  Tensor<float> logits({3, 4});
  std::vector<int> labels = {0, 2, 3};
  Tensor<float> dlogits;
  const float loss = softmax_crossentropy(logits, labels, &dlogits);
  CHECK(loss == doctest::Approx(std::log(4.0)));
  // gradient rows sum to zero and point away from the true class
  auto dm = dlogits.mat(3, 4);
  for (int n = 0; n < 3; ++n) {
    CHECK(dm.row(n).sum() == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(dm(n, labels[n]) < 0.0);
  }
  std::vector<int> bad = {0, 9, 1};
  CHECK_THROWS_AS(softmax_crossentropy<float>(logits, bad, nullptr),
                  std::invalid_argument);
}

TEST_CASE("softmax cross-entropy gradient matches finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  Tensor<double> logits({4, 5});
  for (auto& v : logits.v) v = uni(rng);
  std::vector<int> labels = {1, 0, 4, 2};
  Tensor<double> d;
  softmax_crossentropy(logits, labels, &d);
  const double h = 1e-6;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double saved = logits.v[i];
    logits.v[i] = saved + h;
    const double lp = softmax_crossentropy<double>(logits, labels, nullptr);
    logits.v[i] = saved - h;
    const double lm = softmax_crossentropy<double>(logits, labels, nullptr);
    logits.v[i] = saved;
    CHECK(d.v[i] == doctest::Approx((lp - lm) / (2.0 * h)).epsilon(1e-6));
  }
}

TEST_CASE("softmax is numerically stable for large logits") {
  Tensor<float> logits({1, 3});
  logits.v = {1000.0f, 999.0f, 998.0f};
  auto p = softmax_rows(logits);
  CHECK(std::isfinite(p.v[0]));
  CHECK(p.v[0] + p.v[1] + p.v[2] == doctest::Approx(1.0f));
  CHECK(p.v[0] > p.v[1]);
}

TEST_CASE("adam: first step and zero-gradient behavior") {
  Tensor<double> p({1});
  p.v[0] = 1.0;
  p.ensure_grad();
  p.g[0] = 0.5;
  AdamState<double> state;
  adam_step<double>({&p}, state, 0.1);
  // bias-corrected first step moves by ~lr in the gradient direction
  CHECK(p.v[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-6));

  p.g[0] = 0.0;
  const double before = p.v[0];
  adam_step<double>({&p}, state, 0.1);
  // first moment decays but the parameter still moves until it drains
  CHECK(std::abs(p.v[0] - before) < 0.1);

  Tensor<double> q({1});  // no gradient buffer: untouched
  q.v[0] = 7.0;
  AdamState<double> s2;
  adam_step<double>({&q}, s2, 0.1);
  CHECK(q.v[0] == 7.0);
}

TEST_CASE("adam minimizes a quadratic") {
  Tensor<double> p({2});
  p.v = {3.0, -2.0};
  p.ensure_grad();
  AdamState<double> state;
  for (int i = 0; i < 800; ++i) {
    p.g[0] = 2.0 * p.v[0];
    p.g[1] = 2.0 * p.v[1];
    adam_step<double>({&p}, state, 0.05);
  }
  CHECK(std::abs(p.v[0]) < 1e-2);
  CHECK(std::abs(p.v[1]) < 1e-2);
}

TEST_CASE("a small model learns a separable toy problem deterministically") {
  // class = which half of the image carries the energy
  const int h = 8, w = 8, c = 1;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> uni(0.5f, 1.0f);
  std::vector<std::vector<float>> images;
  std::vector<int> labels;
  for (int i = 0; i < 64; ++i) {
    const int y = i % 2;
    std::vector<float> img(h * w * c, 0.0f);
    for (int r = 0; r < h; ++r)
      for (int col = 0; col < w; ++col)
        if ((col < w / 2) == (y == 0)) img[r * w + col] = uni(rng);
    images.push_back(std::move(img));
    labels.push_back(y);
  }
  DataView train_set, val_set;
  train_set.h = val_set.h = h;
  train_set.w = val_set.w = w;
  train_set.c = val_set.c = c;
  for (int i = 0; i < 48; ++i) {
    train_set.x.push_back(images[i].data());
    train_set.y.push_back(labels[i]);
  }
  for (int i = 48; i < 64; ++i) {
    val_set.x.push_back(images[i].data());
    val_set.y.push_back(labels[i]);
  }

  auto build = [&] {
    Model<float> m;
    m.add<Conv2d<float>>(1, 4, 3, 2);
    m.add<Relu<float>>();
    m.add<Flatten<float>>();
    m.add<Dense<float>>(4 * 4 * 4, 2);
    m.init_params(11);
    return m;
  };

  TrainSchedule schedule;
  schedule.lr = 0.01;
  schedule.batch_size = 16;
  schedule.max_epochs = 40;
  schedule.seed = 13;
  auto m1 = build();
  auto r1 = train(m1, train_set, val_set, schedule);
  CHECK(r1.best_val_acc == 1.0);
  CHECK(evaluate_accuracy(m1, val_set) == 1.0);
  CHECK(r1.history.size() <= 40);
  CHECK(r1.best_epoch >= 1);

  // byte-identical rerun
  auto m2 = build();
  auto r2 = train(m2, train_set, val_set, schedule);
  REQUIRE(r1.history.size() == r2.history.size());
  for (std::size_t i = 0; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
    CHECK(r1.history[i].val_loss == r2.history[i].val_loss);
  }
  auto p1 = m1.parameters(), p2 = m2.parameters();
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i]->v == p2[i]->v);
}

TEST_CASE("train validates its inputs") {
  Model<float> m;
  m.add<Dense<float>>(4, 2);
  DataView empty;
  TrainSchedule s;
  CHECK_THROWS_AS(train(m, empty, empty, s), std::invalid_argument);
  s.lr = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.batch_size = 1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.lr_factor = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("residual block with zeroed branch is a relu of its shortcut") {
  ResidualBlock<float> block(4, 4, 1);
  for (auto* p : block.parameters()) std::fill(p->v.begin(), p->v.end(), 0.0f);
  // gamma of both branch BNs is zero now, so the branch contributes nothing
  Tensor<float> x({2, 5, 5, 4});
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<float> uni(-1.0f, 1.0f);
  for (auto& v : x.v) v = uni(rng);
  auto y = block.forward(x, false);
  REQUIRE(y.shape == x.shape);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(y.v[i] == std::max(0.0f, x.v[i]));
  CHECK_FALSE(block.has_projection());
  CHECK(ResidualBlock<float>(4, 8, 2).has_projection());
}
