#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "molpool/kernels.hpp"
#include "molpool/ops.hpp"
#include "molpool/optim.hpp"
#include "molpool/tensor.hpp"
#include "testutil.hpp"

using namespace molpool;
using molpool::testutil::check_gradient;

TEST_CASE("elementwise forward basics") {
  Tensor r = relu(Tensor::from({-1, 0, 2}, {3}));
  CHECK(r.values() == std::vector<double>{0, 0, 2});

  Tensor t = tanh(Tensor::from({0}, {1}));
  CHECK(t.values()[0] == 0.0);

  Tensor s = add(Tensor::from({1, 2}, {2}), Tensor::from({3, 4}, {2}));
  CHECK(s.values() == std::vector<double>{4, 6});

  CHECK_THROWS_WITH_AS(add(Tensor::zeros({2, 3}), Tensor::zeros({3, 2})),
                       doctest::Contains("[2, 3]"), std::invalid_argument);
}

TEST_CASE("matmul forward basics") {
  Tensor a = Tensor::from({1, 2, 3, 4}, {2, 2});
  Tensor eye = Tensor::from({1, 0, 0, 1}, {2, 2});
  CHECK(matmul(a, eye).values() == a.values());

  Tensor row = Tensor::from({1, 0}, {1, 2});
  Tensor col = Tensor::from({2, 5}, {2, 1});
  CHECK(matmul(row, col).values() == std::vector<double>{2});

  CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})),
                  std::invalid_argument);
}

TEST_CASE("matmul gradient: d sum(A.B) / dA is row-broadcast of B column sums") {
  std::mt19937_64 rng(5);
  Tensor a = Tensor::uniform({3, 4}, -1, 1, rng).set_param();
  Tensor b = Tensor::uniform({4, 2}, -1, 1, rng);
  backward(reduce_sum(matmul(a, b)));
  // each row of dA equals the vector of column sums of B
  for (long i = 0; i < 3; ++i)
    for (long p = 0; p < 4; ++p) {
      double colsum = 0.0;
      for (long j = 0; j < 2; ++j) colsum += b.values()[p * 2 + j];
      CHECK(a.grad()[i * 4 + p] == doctest::Approx(colsum).epsilon(1e-12));
    }

  auto loss = [&] { return reduce_sum(matmul(a, b)); };
  CHECK(check_gradient(loss, a) < 1e-4);
}

TEST_CASE("concat forward and backward") {
  Tensor a = Tensor::from({1}, {1, 1});
  Tensor b = Tensor::from({2}, {1, 1});
  CHECK(concat({a, b}, 1).values() == std::vector<double>{1, 2});

  Tensor one = Tensor::from({3, 4}, {1, 2});
  CHECK(concat({one}, 0).values() == one.values());

  CHECK_THROWS_AS(concat({a, b}, 2), std::invalid_argument);
  CHECK_THROWS_AS(concat({Tensor::zeros({1, 2}), Tensor::zeros({2, 2})}, 1),
                  std::invalid_argument);

  // all-ones gradient splits into all-ones pieces
  Tensor x = Tensor::zeros({2, 2}).set_param();
  Tensor y = Tensor::zeros({2, 3}).set_param();
  backward(reduce_sum(concat({x, y}, 1)));
  CHECK(x.grad() == std::vector<double>(4, 1.0));
  CHECK(y.grad() == std::vector<double>(6, 1.0));
}

TEST_CASE("segment_reduce forward matches spec examples") {
  Tensor v = Tensor::from({1, 2, 3}, {3, 1});
  Tensor s = segment_reduce(v, {0, 0, 1}, SegmentMode::Sum, 2);
  CHECK(s.values() == std::vector<double>{3, 3});

  Tensor m = segment_reduce(Tensor::from({1, 5, 3}, {3, 1}), {0, 0, 0},
                            SegmentMode::Max, 1);
  CHECK(m.values() == std::vector<double>{5});

  // empty segment yields zero row under both modes
  Tensor e = segment_reduce(Tensor::from({1, 1}, {2, 1}), {1, 1},
                            SegmentMode::Sum, 2);
  CHECK(e.values()[0] == 0.0);
  Tensor em = segment_reduce(Tensor::from({-1, -2}, {2, 1}), {1, 1},
                             SegmentMode::Max, 2);
  CHECK(em.values()[0] == 0.0);
  CHECK(em.values()[1] == -1.0);

  CHECK_THROWS_AS(segment_reduce(v, {0, 0, 2}, SegmentMode::Sum, 2),
                  std::invalid_argument);
}

TEST_CASE("segment_reduce equals scalar loop oracle on random input") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> seg(0, 5);
  for (int rep = 0; rep < 20; ++rep) {
    const long n = 1 + static_cast<long>(rng() % 40), c = 3, S = 6;
    Tensor x = Tensor::uniform({n, c}, -2, 2, rng);
    std::vector<int> ids(n);
    for (int& i : ids) i = seg(rng);

    std::vector<double> sum_oracle(S * c, 0.0);
    std::vector<double> max_oracle(S * c, 0.0);
    std::vector<bool> touched(S * c, false);
    for (long i = 0; i < n; ++i)
      for (long ch = 0; ch < c; ++ch) {
        const double val = x.values()[i * c + ch];
        sum_oracle[ids[i] * c + ch] += val;
        auto idx = ids[i] * c + ch;
        if (!touched[idx] || val > max_oracle[idx]) {
          max_oracle[idx] = val;
          touched[idx] = true;
        }
      }

    CHECK(segment_reduce(x, ids, SegmentMode::Sum, S).values() == sum_oracle);
    CHECK(segment_reduce(x, ids, SegmentMode::Max, S).values() == max_oracle);
  }
}

TEST_CASE("segment max backward routes ties to the lowest row") {
  Tensor x = Tensor::from({2, 2, 1}, {3, 1}).set_param();
  backward(reduce_sum(segment_reduce(x, {0, 0, 0}, SegmentMode::Max, 1)));
  CHECK(x.grad() == std::vector<double>{1, 0, 0});
}

TEST_CASE("row_gather and mul_rowwise gradients") {
  std::mt19937_64 rng(23);
  Tensor x = Tensor::uniform({4, 3}, -1, 1, rng).set_param();
  Tensor s = Tensor::uniform({4, 1}, -1, 1, rng).set_param();

  auto loss1 = [&] { return reduce_sum(row_gather(x, {2, 0, 2})); };
  CHECK(check_gradient(loss1, x) < 1e-4);

  auto loss2 = [&] { return reduce_sum(mul(mul_rowwise(x, s), mul_rowwise(x, s))); };
  CHECK(check_gradient(loss2, x) < 1e-4);
  CHECK(check_gradient(loss2, s) < 1e-4);
}

TEST_CASE("backward basics") {
  Tensor x = Tensor::from({3}, {1}).set_param();
  backward(mul(x, x));
  CHECK(x.grad() == std::vector<double>{6});

  Tensor y = Tensor::from({-1, 2}, {2}).set_param();
  backward(reduce_sum(relu(y)));
  CHECK(y.grad() == std::vector<double>{0, 1});

  CHECK_THROWS_AS(backward(Tensor::zeros({2})), std::invalid_argument);
}

TEST_CASE("backward determinism and accumulation") {
  std::mt19937_64 rng(29);
  Tensor w = Tensor::uniform({3, 3}, -1, 1, rng).set_param();
  Tensor x = Tensor::uniform({2, 3}, -1, 1, rng);
  auto loss = [&] { return reduce_sum(tanh(matmul(x, w))); };

  backward(loss());
  auto g1 = w.grad();
  w.zero_grad();
  backward(loss());
  CHECK(w.grad() == g1);  // identical after zeroing: determinism

  backward(loss());
  for (std::size_t i = 0; i < g1.size(); ++i)
    CHECK(w.grad()[i] == doctest::Approx(2 * g1[i]).epsilon(1e-12));
}

TEST_CASE("elementwise gradients match finite differences") {
  std::mt19937_64 rng(31);
  Tensor a = Tensor::uniform({2, 5}, 0.2, 1.5, rng).set_param();
  Tensor b = Tensor::uniform({2, 5}, 0.2, 1.5, rng).set_param();

  auto mk = [&](auto fn) {
    return [&, fn] { return reduce_sum(fn()); };
  };
  auto cases = {
      std::function<Tensor()>([&] { return mul(a, b); }),
      std::function<Tensor()>([&] { return sub(mul(a, b), add(a, b)); }),
      std::function<Tensor()>([&] { return tanh(a); }),
      std::function<Tensor()>([&] { return sigmoid(mul(a, b)); }),
      std::function<Tensor()>([&] { return relu(sub(a, b)); }),
      std::function<Tensor()>([&] { return scale(a, -0.7); }),
  };
  for (const auto& fn : cases) {
    CHECK(check_gradient(mk(fn), a) < 1e-4);
    CHECK(check_gradient(mk(fn), b) < 1e-4);
  }
}

TEST_CASE("batchnorm forward: spec examples") {
  BatchNormState st(1);
  Tensor x = Tensor::from({5, 5, 5}, {3, 1});
  Tensor y = batchnorm(x, st);
  for (double v : y.values()) CHECK(v == doctest::Approx(0.0));

  BatchNormState st2(1);
  st2.eps = 1e-12;
  Tensor x2 = Tensor::from({-1, 1}, {2, 1});
  Tensor y2 = batchnorm(x2, st2);
  CHECK(y2.values()[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(y2.values()[1] == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(batchnorm(Tensor::zeros({0, 1}), st), std::invalid_argument);
}

TEST_CASE("batchnorm training output is standardized pre-affine") {
  std::mt19937_64 rng(37);
  BatchNormState st(4);
  Tensor x = Tensor::uniform({64, 4}, -3, 5, rng);
  Tensor y = batchnorm(x, st);
  for (long ch = 0; ch < 4; ++ch) {
    double mean = 0, var = 0;
    for (long i = 0; i < 64; ++i) mean += y.values()[i * 4 + ch];
    mean /= 64;
    for (long i = 0; i < 64; ++i) {
      const double d = y.values()[i * 4 + ch] - mean;
      var += d * d;
    }
    var /= 64;
    CHECK(std::abs(mean) < 1e-5);
    CHECK(std::abs(var - 1.0) < 1e-4);
  }
}

TEST_CASE("batchnorm running statistics feed inference mode") {
  std::mt19937_64 rng(41);
  BatchNormState st(2);
  st.momentum = 1.0;  // adopt the batch statistics wholesale
  Tensor x = Tensor::uniform({32, 2}, -1, 3, rng);
  Tensor train_out = batchnorm(x, st);
  st.training = false;
  Tensor infer_out = batchnorm(x, st);
  for (std::size_t i = 0; i < train_out.values().size(); ++i)
    CHECK(infer_out.values()[i] ==
          doctest::Approx(train_out.values()[i]).epsilon(1e-9));
}

TEST_CASE("batchnorm gradient matches finite differences (both modes)") {
  std::mt19937_64 rng(43);
  Tensor x = Tensor::uniform({6, 3}, -1, 1, rng).set_param();
  BatchNormState st(3);
  std::mt19937_64 rng2(44);
  st.gamma.values() = testutil::random_values(3, rng2, 0.5, 1.5);
  st.beta.values() = testutil::random_values(3, rng2, -0.5, 0.5);

  auto train_loss = [&] { return reduce_sum(mul(batchnorm(x, st), batchnorm(x, st))); };
  CHECK(check_gradient(train_loss, x) < 1e-4);
  CHECK(check_gradient(train_loss, st.gamma) < 1e-4);
  CHECK(check_gradient(train_loss, st.beta) < 1e-4);

  st.training = false;
  st.running_mean = {0.1, -0.2, 0.3};
  st.running_var = {1.2, 0.8, 2.0};
  auto infer_loss = [&] { return reduce_sum(tanh(batchnorm(x, st))); };
  CHECK(check_gradient(infer_loss, x) < 1e-4);
  CHECK(check_gradient(infer_loss, st.gamma) < 1e-4);
}

TEST_CASE("loss ops: closed-form cases and gradients") {
  Tensor p = Tensor::from({1, 2}, {2, 1});
  Tensor t = Tensor::from({1, 2}, {2, 1});
  Tensor m = Tensor::full({2, 1}, 1.0);
  CHECK(masked_mse(p, t, m).item() == 0.0);

  Tensor p2 = Tensor::from({0}, {1, 1});
  Tensor t2 = Tensor::from({1}, {1, 1});
  Tensor m2 = Tensor::full({1, 1}, 1.0);
  CHECK(masked_mse(p2, t2, m2).item() == doctest::Approx(1.0));
  CHECK(bce_with_logits(p2, t2, m2).item() == doctest::Approx(std::log(2.0)));

  CHECK_THROWS_AS(masked_mse(p, t, Tensor::zeros({2, 1})),
                  std::invalid_argument);

  std::mt19937_64 rng(47);
  Tensor pr = Tensor::uniform({4, 2}, -1, 1, rng).set_param();
  Tensor ta = Tensor::uniform({4, 2}, -1, 1, rng);
  Tensor ma = Tensor::from({1, 0, 1, 1, 0, 1, 1, 1}, {4, 2});
  auto l1 = [&] { return masked_mse(pr, ta, ma); };
  CHECK(check_gradient(l1, pr) < 1e-4);

  Tensor lab = Tensor::from({1, 0, 1, 0, 1, 0, 0, 1}, {4, 2});
  auto l2 = [&] { return bce_with_logits(pr, lab, ma); };
  CHECK(check_gradient(l2, pr) < 1e-4);

  // masked loss with all-ones mask equals the unmasked mean
  double manual = 0;
  for (int i = 0; i < 8; ++i) {
    const double d = pr.values()[i] - ta.values()[i];
    manual += d * d;
  }
  CHECK(masked_mse(pr, ta, Tensor::full({4, 2}, 1.0)).item() ==
        doctest::Approx(manual / 8));
}

TEST_CASE("adam: hand-checked first step and contracts") {
  // grad = 1 at t=1: mhat = 1, vhat = 1, step = lr/(1+eps) ~ lr
  Tensor p = Tensor::from({0.5}, {1}).set_param();
  p.grad()[0] = 1.0;
  Adam opt({p}, 1e-4);
  opt.step();
  CHECK(p.values()[0] == doctest::Approx(0.5 - 1e-4).epsilon(1e-7));

  // zero gradient leaves the parameter unchanged
  Tensor q = Tensor::from({2.0}, {1}).set_param();
  q.grad();
  Adam opt2({q}, 1e-2);
  opt2.step();
  CHECK(q.values()[0] == 2.0);

  // identical params and grads receive identical updates
  Tensor a = Tensor::from({1.0, -1.0}, {2}).set_param();
  Tensor b = Tensor::from({1.0, -1.0}, {2}).set_param();
  a.grad() = {0.3, -0.7};
  b.grad() = {0.3, -0.7};
  Adam opt3({a, b}, 1e-3);
  opt3.step();
  CHECK(a.values() == b.values());

  Tensor no_grad = Tensor::from({1.0}, {1}).set_param();
  Adam opt4({no_grad});
  CHECK_THROWS_AS(opt4.step(), std::runtime_error);
}

TEST_CASE("deep composite gradient vs finite differences") {
  std::mt19937_64 rng(53);
  Tensor w1 = Tensor::uniform({4, 6}, -0.5, 0.5, rng).set_param();
  Tensor b1 = Tensor::uniform({6}, -0.5, 0.5, rng).set_param();
  Tensor w2 = Tensor::uniform({6, 2}, -0.5, 0.5, rng).set_param();
  Tensor b2 = Tensor::uniform({2}, -0.5, 0.5, rng).set_param();
  Tensor x = Tensor::uniform({5, 4}, -1, 1, rng);
  std::vector<int> ids{0, 1, 0, 2, 1};

  auto loss = [&] {
    Tensor h = relu(affine(x, w1, b1));
    Tensor pooled = segment_reduce(h, ids, SegmentMode::Sum, 3);
    Tensor mx = segment_reduce(h, ids, SegmentMode::Max, 3);
    Tensor out = tanh(affine(concat({pooled, mx}, 1).reshape({3, 12}),
                             concat({w2, w2}, 0), b2));
    return reduce_sum(mul(out, out));
  };
  CHECK(check_gradient(loss, w1) < 1e-4);
  CHECK(check_gradient(loss, b1) < 1e-4);
  CHECK(check_gradient(loss, w2) < 1e-4);
  CHECK(check_gradient(loss, b2) < 1e-4);
}

TEST_CASE("no-grad guard suppresses graph construction") {
  Tensor x = Tensor::from({2}, {1}).set_param();
  NoGradGuard guard;
  Tensor y = mul(x, x);
  CHECK_FALSE(y.tracked());
}
