#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "egotopo/nn.hpp"
#include "egotopo/rng.hpp"

using namespace egotopo;
using nn::Mat;
using nn::Vec;

TEST_CASE("mlp gradients match central finite differences") {
  Rng rng(11);
  nn::Mlp mlp({7, 16, 16, 3});
  mlp.init_params(rng);

  Mat x(5, 7), y(5, 3);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 7; ++j) x(i, j) = rng.gaussian();
    for (int j = 0; j < 3; ++j) y(i, j) = rng.uniform() < 0.5 ? 0.0 : 1.0;
  }

  auto loss_fn = [&](const Vec& theta) {
    nn::Mlp m({7, 16, 16, 3});
    m.params() = theta;
    return nn::bce_with_logits(m.forward(x), y, nullptr);
  };

  for (int trial = 0; trial < 10; ++trial) {
    mlp.init_params(rng);
    nn::Mlp::Cache cache;
    Mat logits = mlp.forward(x, cache);
    Mat dlogits;
    nn::bce_with_logits(logits, y, &dlogits);
    Vec grad = Vec::Zero(mlp.param_count());
    mlp.backward(cache, dlogits, grad);
    double rel = nn::gradient_check(loss_fn, mlp.params(), grad);
    CHECK(rel <= 1e-4);
  }
}

TEST_CASE("masked bce ignores masked entries exactly") {
  Mat logits(2, 3);
  logits << 0.4, -1.2, 2.0, -0.3, 0.9, -2.5;
  Mat y(2, 3);
  y << 1, 0, 1, 0, 1, 0;

  SUBCASE("all-zero mask contributes zero loss and zero gradient") {
    Mat mask = Mat::Zero(2, 3);
    mask.row(1).setOnes();
    Mat dlogits;
    double with_masked = nn::masked_bce_with_logits(logits, y, mask, &dlogits);
    CHECK(dlogits.row(0).cwiseAbs().maxCoeff() == 0.0);

    // Row 0 fully masked: loss equals the single-row computation scaled by
    // the batch mean.
    Mat single = logits.row(1);
    Mat ysingle = y.row(1), msingle = mask.row(1);
    double alone = nn::masked_bce_with_logits(single, ysingle, msingle, nullptr);
    CHECK(with_masked == doctest::Approx(alone / 2.0).epsilon(1e-12));
  }

  SUBCASE("single-class mask equals the bce of that class alone") {
    Mat mask = Mat::Zero(1, 3);
    mask(0, 2) = 1.0;
    Mat l = logits.topRows(1), t = y.topRows(1);
    double masked = nn::masked_bce_with_logits(l, t, mask, nullptr);
    double z = l(0, 2), yy = t(0, 2);
    double direct = std::max(z, 0.0) - z * yy + std::log1p(std::exp(-std::abs(z)));
    CHECK(masked == doctest::Approx(direct).epsilon(1e-12));
  }

  SUBCASE("masked gradient entries are exactly zero") {
    Rng rng(3);
    nn::Mlp mlp({4, 8, 3});
    mlp.init_params(rng);
    Mat x(2, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 4; ++j) x(i, j) = rng.gaussian();
    Mat mask = Mat::Zero(2, 3);
    mask(0, 1) = 1.0;  // only one supervised entry
    nn::Mlp::Cache cache;
    Mat l = mlp.forward(x, cache);
    Mat dlogits;
    nn::masked_bce_with_logits(l, Mat::Zero(2, 3), mask, &dlogits);
    CHECK(dlogits(0, 0) == 0.0);
    CHECK(dlogits(1, 2) == 0.0);
    CHECK(dlogits(0, 1) != 0.0);
  }
}

TEST_CASE("adam minimizes a quadratic deterministically") {
  auto run = [] {
    Vec theta = Vec::Constant(4, 5.0);
    nn::AdamConfig cfg;
    cfg.lr = 0.1;
    nn::Adam opt(4, cfg);
    for (int i = 0; i < 500; ++i) {
      Vec grad = 2.0 * theta;
      opt.step(theta, grad);
    }
    return theta;
  };
  Vec a = run(), b = run();
  CHECK(a.cwiseAbs().maxCoeff() < 1e-3);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mlp output bounded after sigmoid for extreme inputs") {
  Rng rng(5);
  nn::Mlp mlp({3, 8, 1});
  mlp.init_params(rng);
  Mat x(1, 3);
  x << 1e6, -1e6, 1e6;
  double p = nn::sigmoid(mlp.forward(x)(0, 0));
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);
}
