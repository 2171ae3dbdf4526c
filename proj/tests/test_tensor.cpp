#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "gawno/ops.hpp"
#include "gawno/param_store.hpp"
#include "gawno/rng.hpp"
#include "gawno/tensor.hpp"
#include "oracles.hpp"

using namespace gawno;
using oracles::grad_check;
using oracles::max_abs_diff;
using oracles::random_tensor;

TEST_SUITE_BEGIN("tensor");

TEST_CASE("tensor construction and invariants") {
  Tensor t(Shape{2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(t.rank() == 3);
  CHECK(t.all_finite());
  CHECK_FALSE(t.requires_grad());
  CHECK_THROWS_AS(Tensor(Shape{2, 0, 4}), ShapeError);
  CHECK_THROWS_AS(Tensor(Shape{-1}), ShapeError);
  CHECK_THROWS_AS(Tensor::from(Shape{3}, {1.0, 2.0}), ShapeError);

  Tensor s = Tensor::scalar(7.5);
  CHECK(s.item() == 7.5);
  CHECK_THROWS_AS(t.item(), ShapeError);

  Tensor c = t.clone();
  c.at(0) = 99.0;
  CHECK(t.at(0) == 0.0);  // clone is independent storage
}

TEST_CASE("linear: identity weight reproduces the input") {
  Rng rng(1);
  Tensor x = random_tensor(Shape{2, 3, 5}, rng);
  Tensor w(Shape{3, 3});
  for (int i = 0; i < 3; ++i) w.at(i * 3 + i) = 1.0;
  Tensor b(Shape{3});
  Tensor y = linear(x, w, b);
  CHECK(max_abs_diff(y.data(), x.data()) == 0.0);
}

TEST_CASE("linear: zero weight with unit bias gives all ones") {
  Rng rng(2);
  Tensor x = random_tensor(Shape{2, 3, 4}, rng);
  Tensor w(Shape{4, 3});
  Tensor b = Tensor::full(Shape{4}, 1.0);
  Tensor y = linear(x, w, b);
  for (std::int64_t i = 0; i < y.size(); ++i) CHECK(y.at(i) == 1.0);
}

TEST_CASE("linear: random instance matches the triple-loop oracle") {
  Rng rng(3);
  Tensor x = random_tensor(Shape{2, 3, 4}, rng);
  Tensor w = random_tensor(Shape{5, 3}, rng);
  Tensor b = random_tensor(Shape{5}, rng);
  Tensor y = linear(x, w, b);
  Tensor ref = oracles::naive_linear(x, w, b);
  CHECK(max_abs_diff(y.data(), ref.data()) <= 1e-12);
}

TEST_CASE("linear: shape mismatch names both operand shapes") {
  Tensor x(Shape{2, 3, 4});
  Tensor w(Shape{5, 4});  // expects F=3
  Tensor b(Shape{5});
  try {
    linear(x, w, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(2,3,4)") != std::string::npos);
    CHECK(msg.find("(5,4)") != std::string::npos);
  }
}

TEST_CASE("gelu: fixed points and erf oracle") {
  Tensor x = Tensor::from(Shape{3}, {0.0, -10.0, 1.0});
  Tensor y = gelu(x);
  CHECK(y.at(0) == 0.0);
  CHECK(std::abs(y.at(1)) < 1e-9);
  // x * Phi(x) at x = 1: Phi(1) = 0.8413447...
  const double phi1 = 0.5 * (1.0 + std::erf(1.0 / std::numbers::sqrt2));
  CHECK(y.at(2) == doctest::Approx(phi1).epsilon(1e-12));
  CHECK(doctest::Approx(phi1).epsilon(1e-6) == 0.8413447);
}

TEST_CASE("sigmoid: fixed points, saturation, and open range") {
  Tensor x = Tensor::from(Shape{5}, {0.0, 50.0, std::log(3.0), -745.0, 30.0});
  Tensor y = sigmoid(x);
  CHECK(y.at(0) == 0.5);
  CHECK(1.0 - y.at(1) < 1e-20);  // at +50 the double rounds to exactly 1
  CHECK(y.at(2) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(y.at(3) > 0.0);  // stable negative branch keeps the range open
  // +30 is deep in saturation yet 1 - sigmoid is still representable, so the
  // open range is observable on this side too.
  CHECK(y.at(4) < 1.0);
  CHECK(1.0 - y.at(4) < 1e-12);
}

TEST_CASE("bce_loss: hand-evaluated cases") {
  Tensor half = Tensor::full(Shape{4}, 0.5);
  Tensor ones = Tensor::full(Shape{4}, 1.0);
  CHECK(bce_loss(half, ones).item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Tensor sure = Tensor::full(Shape{2}, 1.0 - 1e-9);  // clamps to 1 - 1e-7
  CHECK(bce_loss(sure, Tensor::full(Shape{2}, 1.0)).item() ==
        doctest::Approx(0.0).epsilon(1e-6));

  Tensor p = Tensor::from(Shape{2}, {0.9, 0.2});
  Tensor t = Tensor::from(Shape{2}, {1.0, 0.0});
  const double expected = -(std::log(0.9) + std::log(0.8)) / 2.0;
  CHECK(bce_loss(p, t).item() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.164252).epsilon(1e-5));
}

TEST_CASE("bce_logits_loss agrees with bce(sigmoid) and stays finite when saturated") {
  Rng rng(4);
  Tensor logits = random_tensor(Shape{6}, rng, 2.0);
  Tensor targets(Shape{6});
  for (int i = 0; i < 6; ++i) targets.at(i) = i % 2;
  const double fused = bce_logits_loss(logits, targets).item();
  const double composed = bce_loss(sigmoid(logits), targets).item();
  CHECK(fused == doctest::Approx(composed).epsilon(1e-12));

  Tensor extreme = Tensor::from(Shape{2}, {50.0, -50.0});
  Tensor t = Tensor::from(Shape{2}, {0.0, 1.0});
  const double v = bce_logits_loss(extreme, t).item();
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(50.0).epsilon(1e-12));  // softplus(50) ~ 50 per entry

  // The fused gradient is (sigmoid(x) - t) / N even where the composed form
  // would have saturated to zero.
  Tensor x = Tensor::from(Shape{2}, {40.0, -40.0}, true);
  {
    Graph tape;
    tape.backward(bce_logits_loss(x, Tensor::from(Shape{2}, {0.0, 1.0})));
  }
  CHECK(x.grad()[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(x.grad()[1] == doctest::Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("concat_channels: duplication, slotwise layout, and errors") {
  Rng rng(5);
  Tensor a = random_tensor(Shape{2, 3, 8}, rng);
  Tensor dup = concat_channels(a, a);
  for (std::int64_t i = 0; i < 2; ++i) {
    for (std::int64_t c = 0; c < 3; ++c) {
      for (std::int64_t t = 0; t < 8; ++t) {
        CHECK(dup.at((i * 6 + c) * 8 + t) == dup.at((i * 6 + c + 3) * 8 + t));
      }
    }
  }

  Tensor b = random_tensor(Shape{2, 5, 8}, rng);
  Tensor y = concat_channels(a, b);
  REQUIRE(y.shape() == Shape{2, 8, 8});
  for (std::int64_t i = 0; i < 2; ++i) {
    for (std::int64_t c = 0; c < 8; ++c) {
      for (std::int64_t t = 0; t < 8; ++t) {
        const double want = c < 3 ? a.at((i * 3 + c) * 8 + t) : b.at((i * 5 + c - 3) * 8 + t);
        CHECK(y.at((i * 8 + c) * 8 + t) == want);
      }
    }
  }

  CHECK_THROWS_AS(concat_channels(a, random_tensor(Shape{2, 5, 9}, rng)), ShapeError);
  CHECK_THROWS_AS(concat_channels(a, random_tensor(Shape{3, 5, 8}, rng)), ShapeError);
}

TEST_CASE("backward: sum gives ones, half square norm gives x") {
  Rng rng(6);
  Tensor x = random_tensor(Shape{3, 5}, rng);
  x.set_requires_grad(true);
  {
    Graph tape;
    tape.backward(sum_all(x));
  }
  for (double g : x.grad()) CHECK(g == 1.0);
  x.zero_grad();
  {
    Graph tape;
    tape.backward(scale(sum_all(mul(x, x)), 0.5));
  }
  CHECK(max_abs_diff(x.grad(), x.data()) <= 1e-15);
}

TEST_CASE("backward: loss must be scalar; gradients accumulate over fan-out") {
  Tensor x = Tensor::from(Shape{2}, {1.0, 2.0}, true);
  {
    Graph tape;
    Tensor y = add(x, x);
    CHECK_THROWS_AS(tape.backward(y), ShapeError);
  }

  // Three consumers of the same leaf: d/dx [sum(x) + sum(2x) + sum(3x)] = 6.
  x.zero_grad();
  {
    Graph tape;
    Tensor loss = sum_all(add(add(scale(x, 1.0), scale(x, 2.0)), scale(x, 3.0)));
    tape.backward(loss);
  }
  CHECK(x.grad()[0] == 6.0);
  CHECK(x.grad()[1] == 6.0);
}

TEST_CASE("backward: composite of module ops matches central differences") {
  Rng rng(7);
  Tensor x = random_tensor(Shape{2, 3, 4}, rng);
  Tensor w = random_tensor(Shape{4, 3}, rng);
  Tensor b = random_tensor(Shape{4}, rng);
  Tensor g = random_tensor(Shape{2, 4, 4}, rng);  // fixed mixing weights
  x.set_requires_grad(true);
  w.set_requires_grad(true);
  b.set_requires_grad(true);
  auto loss = [&] {
    Tensor h = gelu(linear(x, w, b));
    Tensor s = sigmoid(mean_last(mul(h, g)));
    return add(sum_all(concat_channels(h, mul(h, g))), sum_all(s));
  };
  CHECK(grad_check(loss, x) <= 1e-5);
  CHECK(grad_check(loss, w) <= 1e-5);
  CHECK(grad_check(loss, b) <= 1e-5);
}

TEST_CASE("backward of linear is the transpose action (loop oracle)") {
  Rng rng(8);
  Tensor x = random_tensor(Shape{2, 3, 4}, rng);
  Tensor w = random_tensor(Shape{5, 3}, rng);
  Tensor b = random_tensor(Shape{5}, rng);
  Tensor g = random_tensor(Shape{2, 5, 4}, rng);  // upstream gradient
  x.set_requires_grad(true);
  w.set_requires_grad(true);
  b.set_requires_grad(true);
  {
    Graph tape;
    tape.backward(sum_all(mul(linear(x, w, b), g)));
  }
  // dL/dx[i,f,t] = sum_c w[c,f] g[i,c,t]; dL/dw[c,f] = sum_{i,t} g[i,c,t] x[i,f,t];
  // dL/db[c] = sum_{i,t} g[i,c,t].
  for (std::int64_t i = 0; i < 2; ++i) {
    for (std::int64_t f = 0; f < 3; ++f) {
      for (std::int64_t t = 0; t < 4; ++t) {
        double want = 0.0;
        for (std::int64_t c = 0; c < 5; ++c) want += w.at(c * 3 + f) * g.at((i * 5 + c) * 4 + t);
        CHECK(x.grad()[static_cast<size_t>((i * 3 + f) * 4 + t)] ==
              doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
  for (std::int64_t c = 0; c < 5; ++c) {
    double wantb = 0.0;
    for (std::int64_t f = 0; f < 3; ++f) {
      double want = 0.0;
      for (std::int64_t i = 0; i < 2; ++i) {
        for (std::int64_t t = 0; t < 4; ++t) {
          want += g.at((i * 5 + c) * 4 + t) * x.at((i * 3 + f) * 4 + t);
        }
      }
      CHECK(w.grad()[static_cast<size_t>(c * 3 + f)] == doctest::Approx(want).epsilon(1e-12));
    }
    for (std::int64_t i = 0; i < 2; ++i) {
      for (std::int64_t t = 0; t < 4; ++t) wantb += g.at((i * 5 + c) * 4 + t);
    }
    CHECK(b.grad()[static_cast<size_t>(c)] == doctest::Approx(wantb).epsilon(1e-12));
  }
}

TEST_CASE("gradient checks for the remaining differentiable ops") {
  Rng rng(9);
  Tensor x = random_tensor(Shape{2, 3, 4}, rng);
  Tensor y = random_tensor(Shape{2, 3, 4}, rng);
  x.set_requires_grad(true);
  y.set_requires_grad(true);
  Tensor mix = random_tensor(Shape{2, 3, 4}, rng);

  auto weighted = [&](const Tensor& t) { return sum_all(mul(t, mix)); };
  CHECK(grad_check([&] { return weighted(add(x, y)); }, x) <= 1e-5);
  CHECK(grad_check([&] { return weighted(sub(x, y)); }, y) <= 1e-5);
  CHECK(grad_check([&] { return weighted(mul(x, y)); }, x) <= 1e-5);
  CHECK(grad_check([&] { return weighted(scale(x, -2.5)); }, x) <= 1e-5);
  CHECK(grad_check([&] { return sum_all(mean_last(mul(x, x))); }, x) <= 1e-5);
  CHECK(grad_check([&] { return sum_all(mean_channels(gelu(x))); }, x) <= 1e-5);
  CHECK(grad_check([&] { return sum_all(mul(reshape(x, Shape{6, 4}), reshape(mix, Shape{6, 4}))); },
                   x) <= 1e-5);
  CHECK(grad_check([&] { return bce_loss(sigmoid(reshape(x, Shape{24})),
                                         Tensor::full(Shape{24}, 1.0)); }, x) <= 1e-5);
  CHECK(grad_check([&] { return bce_logits_loss(reshape(x, Shape{24}),
                                                Tensor::full(Shape{24}, 0.0)); }, x) <= 1e-5);
}

TEST_CASE("tape determinism: identical seeds give bit-identical loss and grads") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    Tensor x = random_tensor(Shape{2, 3, 8}, rng);
    Tensor w = random_tensor(Shape{3, 3}, rng);
    Tensor b = random_tensor(Shape{3}, rng);
    x.set_requires_grad(true);
    w.set_requires_grad(true);
    double loss;
    {
      Graph tape;
      Tensor l = sum_all(gelu(linear(x, w, b)));
      loss = l.item();
      tape.backward(l);
    }
    std::vector<double> out{loss};
    out.insert(out.end(), x.grad().begin(), x.grad().end());
    out.insert(out.end(), w.grad().begin(), w.grad().end());
    return out;
  };
  const auto a = run(42), b = run(42);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("adam_step: first step, zero gradient, and the scalar recurrence oracle") {
  const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;

  // First step with g = 1: bias correction gives m_hat = 1, v_hat = 1.
  {
    ParamStore store;
    Tensor t = store.add("theta", Tensor::scalar(0.25));
    t.grad_buffer()[0] = 1.0;
    adam_step(store, lr, b1, b2, eps, 0.0);
    CHECK(t.at(0) == doctest::Approx(0.25 - lr / (1.0 + eps)).epsilon(1e-12));
    CHECK(store.step_count() == 1);
    CHECK_FALSE(t.has_grad());  // grads cleared by the update
  }

  // Zero gradient with no weight decay leaves the value untouched.
  {
    ParamStore store;
    Tensor t = store.add("theta", Tensor::scalar(1.5));
    t.grad_buffer()[0] = 0.0;
    adam_step(store, lr, b1, b2, eps, 0.0);
    CHECK(t.at(0) == 1.5);
    CHECK(store.step_count() == 1);
  }

  // Three steps of a fixed gradient match the hand-rolled recurrence.
  {
    ParamStore store;
    Tensor t = store.add("theta", Tensor::scalar(0.7));
    const std::vector<double> grads{0.3, 0.3, 0.3};
    for (double g : grads) {
      t.grad_buffer()[0] = g;
      adam_step(store, lr, b1, b2, eps, 1e-5);
    }
    const double want = oracles::adam_scalar_oracle(0.7, grads, lr, b1, b2, eps, 1e-5);
    CHECK(t.at(0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(store.step_count() == 3);
  }

  // Missing gradient aborts and names the parameter.
  {
    ParamStore store;
    store.add("early", Tensor::scalar(0.0)).grad_buffer()[0] = 0.5;
    store.add("forgotten", Tensor::scalar(0.0));
    try {
      adam_step(store, lr, b1, b2, eps, 0.0);
      FAIL("expected StateError");
    } catch (const StateError& e) {
      CHECK(std::string(e.what()).find("forgotten") != std::string::npos);
    }
  }
}

TEST_CASE("param store: unique names, ordered iteration, counts") {
  ParamStore store;
  store.add("a", Tensor(Shape{2, 3}));
  store.add("b", Tensor(Shape{4}));
  CHECK_THROWS_AS(store.add("a", Tensor(Shape{1})), StateError);
  CHECK_THROWS_AS(store.at("missing"), StateError);
  CHECK(store.names() == std::vector<std::string>{"a", "b"});
  CHECK(store.parameter_count() == 10);
  CHECK(store.at("a").requires_grad());
}

TEST_SUITE_END();
