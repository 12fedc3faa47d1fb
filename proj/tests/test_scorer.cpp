#include <doctest.h>

#include <cmath>
#include <sstream>

#include "adpo/rng.hpp"
#include "adpo/scorer.hpp"
#include "oracles.hpp"

using namespace adpo;

TEST_CASE("zero-weight scorer maps any input to exactly zero") {
  Scorer s(ScorerConfig{16, 64, 2});
  std::vector<double> input(16, 0.37);
  CHECK(s.forward_one(input) == 0.0);
  RngStream rng(5);
  for (double& v : input) v = rng.uniform();
  CHECK(s.forward_one(input) == 0.0);
}

TEST_CASE("forward matches a hand-computed two-layer pass") {
  // input 2 -> hidden 2 (one hidden block) -> 1, parameters set by hand.
  ScorerConfig cfg{2, 2, 1};
  Scorer s(cfg);
  auto p = s.parameters();
  // W0 = [[0.5, -1.0], [2.0, 0.25]], b0 = [0.1, -0.2]
  p[0] = 0.5;  p[1] = -1.0;
  p[2] = 2.0;  p[3] = 0.25;
  p[4] = 0.1;  p[5] = -0.2;
  // W1 = [[1.0, -0.5], [0.75, 0.5]], b1 = [0.0, 0.3]
  p[6] = 1.0;  p[7] = -0.5;
  p[8] = 0.75; p[9] = 0.5;
  p[10] = 0.0; p[11] = 0.3;
  // w_out = [2.0, -1.0], b_out = 0.05
  p[12] = 2.0; p[13] = -1.0;
  p[14] = 0.05;

  const double x0 = 0.8, x1 = -0.4;
  // Layer 0
  const double h0 = std::max(0.0, 0.5 * x0 - 1.0 * x1 + 0.1);
  const double h1 = std::max(0.0, 2.0 * x0 + 0.25 * x1 - 0.2);
  // Layer 1
  const double g0 = std::max(0.0, 1.0 * h0 - 0.5 * h1 + 0.0);
  const double g1 = std::max(0.0, 0.75 * h0 + 0.5 * h1 + 0.3);
  const double expected = 2.0 * g0 - 1.0 * g1 + 0.05;

  const std::vector<double> input = {x0, x1};
  CHECK(s.forward_one(input) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("a batch of identical inputs yields identical scores") {
  const Scorer s = init_scorer(ScorerConfig{16, 64, 2}, 11);
  std::vector<double> inputs;
  RngStream rng(3);
  std::vector<double> row(16);
  for (double& v : row) v = rng.uniform();
  for (int b = 0; b < 3; ++b) inputs.insert(inputs.end(), row.begin(), row.end());
  const auto scores = s.forward(inputs, 3);
  CHECK(scores[0] == scores[1]);
  CHECK(scores[1] == scores[2]);
  CHECK(std::isfinite(scores[0]));
}

TEST_CASE("init_scorer is deterministic in (config, seed)") {
  const ScorerConfig cfg{16, 128, 3};
  const Scorer a = init_scorer(cfg, 42);
  const Scorer b = init_scorer(cfg, 42);
  const Scorer c = init_scorer(cfg, 43);
  CHECK(a == b);
  bool differs = false;
  for (std::size_t k = 0; k < a.parameters().size(); ++k) {
    if (a.parameters()[k] != c.parameters()[k]) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("parameter counts follow the dense-MLP formula") {
  // medium: 128*(16+1) + 3*128*129 + 129
  CHECK(ScorerConfig{16, 128, 3}.param_count() == 51841);
  // small lands in the ~8K order of magnitude reported for that scale
  const auto small = ScorerConfig::small().param_count();
  CHECK(small == 9473);
  CHECK(small > 3000);
  CHECK(small < 30000);
  CHECK(ScorerConfig::large().param_count() == 267777);
  CHECK(ScorerConfig{16, 128, 3}.standard_scale());
  CHECK_FALSE(ScorerConfig{16, 100, 3}.standard_scale());
}

TEST_CASE("backward: zero upstream gives zero gradient") {
  const Scorer s = init_scorer(ScorerConfig{4, 8, 2}, 7);
  RngStream rng(9);
  std::vector<double> inputs(3 * 4);
  for (double& v : inputs) v = rng.uniform();
  const std::vector<double> upstream(3, 0.0);
  const auto grad = s.backward(inputs, 3, upstream);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("backward is linear in the upstream gradient") {
  const Scorer s = init_scorer(ScorerConfig{4, 8, 2}, 17);
  RngStream rng(19);
  std::vector<double> inputs(5 * 4);
  for (double& v : inputs) v = rng.uniform();
  std::vector<double> upstream(5);
  for (double& v : upstream) v = rng.normal();
  const auto g1 = s.backward(inputs, 5, upstream);
  for (double& v : upstream) v *= 2.0;
  const auto g2 = s.backward(inputs, 5, upstream);
  for (std::size_t k = 0; k < g1.size(); ++k) {
    CHECK(g2[k] == doctest::Approx(2.0 * g1[k]).epsilon(1e-12));
  }
}

TEST_CASE("backward matches central finite differences on random networks") {
  RngStream rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const int in_dim = 2 + static_cast<int>(rng.uniform_int(4));
    const int hidden = 2 + static_cast<int>(rng.uniform_int(5));
    const int layers = 1 + static_cast<int>(rng.uniform_int(3));
    const ScorerConfig cfg{in_dim, hidden, layers};
    Scorer s = init_scorer(cfg, rng.next_u64());
    // Jitter every parameter (including the zero biases) so no ReLU input
    // sits exactly on its kink, where a central difference is undefined.
    for (double& v : s.parameters()) v += 0.05 * rng.normal();

    const std::size_t n = 1 + rng.uniform_int(4);
    std::vector<double> inputs(n * in_dim);
    for (double& v : inputs) v = 2.0 * rng.uniform() - 0.5;
    std::vector<double> upstream(n);
    for (double& v : upstream) v = rng.normal();

    const auto grad = s.backward(inputs, n, upstream);
    const auto fd = test_oracle::scorer_fd_grad(
        s, inputs, n, [&](std::span<const double> scores) {
          double loss = 0.0;
          for (std::size_t i = 0; i < scores.size(); ++i) {
            loss += upstream[i] * scores[i];
          }
          return loss;
        });

    double max_rel = 0.0;
    for (std::size_t k = 0; k < grad.size(); ++k) {
      const double denom = std::max(1.0, std::abs(fd[k]));
      max_rel = std::max(max_rel, std::abs(grad[k] - fd[k]) / denom);
    }
    CHECK(max_rel <= 1e-4);
  }
}

TEST_CASE("adamw: zero gradient with zero decay is a fixed point") {
  Scorer s = init_scorer(ScorerConfig{4, 8, 2}, 3);
  const std::vector<double> before(s.parameters().begin(), s.parameters().end());
  AdamWState st = AdamWState::make(s.config(), 5e-4, 0.0);
  const std::vector<double> zeros(s.parameters().size(), 0.0);
  adamw_step(s, st, zeros);
  adamw_step(s, st, zeros);
  for (std::size_t k = 0; k < before.size(); ++k) {
    CHECK(s.parameters()[k] == before[k]);
  }
  CHECK(st.step == 2);
}

TEST_CASE("adamw single-parameter step matches the hand-executed update") {
  // One weight (input 1, hidden 1, layers 1 gives 6 params); isolate p[0].
  ScorerConfig cfg{1, 1, 1};
  Scorer s(cfg);
  s.parameters()[0] = 1.0;
  AdamWState st = AdamWState::make(cfg);  // lr 5e-4, wd 1e-4
  std::vector<double> grad(cfg.param_count(), 0.0);
  grad[0] = 1.0;
  adamw_step(s, st, grad);

  // Hand: m = 0.1, v = 1e-3, mhat = 1, vhat = 1,
  // p = 1*(1 - 5e-4*1e-4) - 5e-4 * 1/(1 + 1e-8)
  const double expected = (1.0 - 5e-4 * 1e-4) - 5e-4 * (1.0 / (1.0 + 1e-8));
  CHECK(s.parameters()[0] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("adamw decoupled decay shrinks weights monotonically at zero grad") {
  ScorerConfig cfg{1, 1, 1};
  Scorer s(cfg);
  s.parameters()[0] = 1.0;
  AdamWState st = AdamWState::make(cfg, 5e-4, 0.5);
  const std::vector<double> zeros(cfg.param_count(), 0.0);
  double prev = 1.0;
  for (int it = 0; it < 2; ++it) {
    adamw_step(s, st, zeros);
    CHECK(std::abs(s.parameters()[0]) < std::abs(prev));
    prev = s.parameters()[0];
  }
}

TEST_CASE("adamw leaves biases out of weight decay") {
  ScorerConfig cfg{1, 1, 1};
  Scorer s(cfg);
  // p layout: W0(1), b0(1), W1(1), b1(1), w_out(1), b_out(1)
  for (auto& v : s.parameters()) v = 1.0;
  AdamWState st = AdamWState::make(cfg, 1e-2, 0.5);
  const std::vector<double> zeros(cfg.param_count(), 0.0);
  adamw_step(s, st, zeros);
  CHECK(s.parameters()[0] < 1.0);  // weight decayed
  CHECK(s.parameters()[1] == 1.0); // bias untouched
  CHECK(s.parameters()[5] == 1.0); // output bias untouched
}

TEST_CASE("error paths: dimension mismatch and non-finite inputs") {
  const Scorer s = init_scorer(ScorerConfig{4, 8, 2}, 3);
  std::vector<double> bad_inputs(3 * 5);
  CHECK_THROWS_AS((void)s.forward(bad_inputs, 3), std::invalid_argument);

  std::vector<double> inputs(3 * 4, 0.5);
  std::vector<double> upstream = {1.0, std::nan(""), 0.0};
  CHECK_THROWS_AS((void)s.backward(inputs, 3, upstream), std::domain_error);

  Scorer t = init_scorer(ScorerConfig{4, 8, 2}, 3);
  AdamWState st = AdamWState::make(t.config());
  std::vector<double> grad(t.parameters().size(), 0.0);
  grad[7] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(adamw_step(t, st, grad), std::domain_error);
  std::vector<double> short_grad(3, 0.0);
  CHECK_THROWS_AS(adamw_step(t, st, short_grad), std::invalid_argument);
}

TEST_CASE("parameter dump round-trips exactly") {
  const Scorer s = init_scorer(ScorerConfig{6, 16, 2}, 77);
  std::stringstream ss;
  s.save_parameters(ss);
  const Scorer back = load_scorer(ss);
  CHECK(back == s);
}
