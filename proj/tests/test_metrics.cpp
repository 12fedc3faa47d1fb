#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "adpo/math.hpp"
#include "adpo/metrics.hpp"
#include "oracles.hpp"

using namespace adpo;

namespace {

std::vector<Group> toy_groups(const std::vector<int>& best) {
  std::vector<Group> out;
  for (int b : best) {
    Group g;
    g.best_index = b;
    out.push_back(g);
  }
  return out;
}

}  // namespace

TEST_CASE("winmass of a zero scorer is exactly the random baseline") {
  WorldSpec w;
  w.world_seed = 4;
  const Scorer oracle = build_oracle(w);
  RngStream rng(1);
  std::vector<Group> groups;
  std::vector<double> inputs;
  for (int k = 0; k < 50; ++k) {
    Group g = sample_group(w, oracle, rng);
    const auto in = g.concat_inputs(w);
    inputs.insert(inputs.end(), in.begin(), in.end());
    groups.push_back(std::move(g));
  }
  const Scorer zero(ScorerConfig{16, 64, 2});
  CHECK(winmass(zero, nullptr, groups, inputs, 4, 1.0) ==
        doctest::Approx(0.25).epsilon(1e-12));

  // A random scorer sits near the baseline on random groups.
  const Scorer random_policy = init_scorer(ScorerConfig{16, 64, 2}, 123);
  const double wm = winmass(random_policy, nullptr, groups, inputs, 4, 1.0);
  CHECK(wm > 0.10);
  CHECK(wm < 0.45);
}

TEST_CASE("winmass saturates to one when all mass sits on the best item") {
  const auto groups = toy_groups({2, 0, 1});
  std::vector<double> scores = {0, 0, 500, 0,  500, 0, 0, 0,  0, 500, 0, 0};
  const double wm = winmass_from_scores(scores, {}, groups, 4, 1.0);
  CHECK(wm == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("winmass of a hand-built fixture matches direct arithmetic") {
  const auto groups = toy_groups({0, 3, 1});
  const std::vector<double> scores = {
      2.0, 1.0, 0.0, -1.0,   // softmax -> p[0]
      0.0, 0.0, 0.0, 1.0,    // p[3] = e/(e+3)
      1.0, 1.0, 0.0, 0.0,
  };
  const auto p0 = softmax(std::vector<double>{2.0, 1.0, 0.0, -1.0});
  const auto p1 = softmax(std::vector<double>{0.0, 0.0, 0.0, 1.0});
  const auto p2 = softmax(std::vector<double>{1.0, 1.0, 0.0, 0.0});
  const double expected = (p0[0] + p1[3] + p2[1]) / 3.0;
  CHECK(winmass_from_scores(scores, {}, groups, 4, 1.0) ==
        doctest::Approx(expected).epsilon(1e-14));

  // Anchored evaluation with reference scores subtracts per item.
  std::vector<double> ref(12, 0.0);
  ref[0] = 1.0;
  const auto a0 = softmax(std::vector<double>{1.0, 1.0, 0.0, -1.0});
  const double anchored = (a0[0] + p1[3] + p2[1]) / 3.0;
  CHECK(winmass_from_scores(scores, ref, groups, 4, 1.0) ==
        doctest::Approx(anchored).epsilon(1e-14));
}

TEST_CASE("winmass is invariant to per-group constant score shifts") {
  RngStream rng(9);
  const auto groups = toy_groups({0, 1, 2, 3, 1});
  std::vector<double> scores(20), ref(20);
  for (double& v : scores) v = rng.normal();
  for (double& v : ref) v = rng.normal();
  const double plain = winmass_from_scores(scores, {}, groups, 4, 1.0);
  const double anchored = winmass_from_scores(scores, ref, groups, 4, 1.0);
  auto shifted = scores;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double c = rng.normal() * 50.0;
    for (int i = 0; i < 4; ++i) shifted[g * 4 + i] += c;
  }
  CHECK(winmass_from_scores(shifted, {}, groups, 4, 1.0) ==
        doctest::Approx(plain).epsilon(1e-9));
  CHECK(winmass_from_scores(shifted, ref, groups, 4, 1.0) ==
        doctest::Approx(anchored).epsilon(1e-9));
}

TEST_CASE("group_kl: closed forms, non-negativity, infinity sentinel") {
  const std::vector<double> p = {0.5, 0.5};
  const std::vector<double> q = {1.0, 0.0};
  CHECK(group_kl(p, p) == 0.0);
  CHECK(group_kl(p, q) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const std::vector<double> p4 = {0.7, 0.1, 0.1, 0.1};
  const std::vector<double> u4 = {0.25, 0.25, 0.25, 0.25};
  double expected = 0.0;
  for (int i = 0; i < 4; ++i) expected += 0.25 * std::log(0.25 / p4[i]);
  CHECK(group_kl(p4, u4) == doctest::Approx(expected).epsilon(1e-12));

  const std::vector<double> zerop = {0.0, 1.0};
  CHECK(std::isinf(group_kl(zerop, q)));

  RngStream rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(4), b(4);
    for (double& v : a) v = rng.uniform() + 1e-3;
    for (double& v : b) v = rng.uniform() + 1e-3;
    double sa = 0.0, sb = 0.0;
    for (double v : a) sa += v;
    for (double v : b) sb += v;
    for (double& v : a) v /= sa;
    for (double& v : b) v /= sb;
    CHECK(group_kl(a, b) >= 0.0);
  }
}

TEST_CASE("bootstrap_ci: constant samples, mean coverage, oracle equality") {
  const std::vector<double> constant(10, 3.25);
  const auto [clo, chi] = bootstrap_ci(constant, 1000, 0.95, 7);
  CHECK(clo == 3.25);
  CHECK(chi == 3.25);

  RngStream rng(55);
  std::vector<double> samples(10);
  for (double& v : samples) v = rng.normal();
  const double mean =
      std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
  const auto [lo, hi] = bootstrap_ci(samples, 10000, 0.95, 9);
  CHECK(lo <= mean);
  CHECK(hi >= mean);

  // Independent re-implementation with the same substream and conventions.
  {
    RngStream mirror(9);
    std::vector<double> means;
    for (int b = 0; b < 10000; ++b) {
      double sum = 0.0;
      for (std::size_t k = 0; k < samples.size(); ++k) {
        sum += samples[mirror.uniform_int(samples.size())];
      }
      means.push_back(sum / samples.size());
    }
    std::sort(means.begin(), means.end());
    const auto idx = [&](double a) {
      return static_cast<std::size_t>(std::llround(a * (10000 - 1)));
    };
    CHECK(std::abs(lo - means[idx(0.025)]) <= 1e-12);
    CHECK(std::abs(hi - means[idx(0.975)]) <= 1e-12);
  }

  CHECK_THROWS_AS(bootstrap_ci(std::vector<double>{1.0}, 100, 0.95, 1),
                  std::invalid_argument);
}

TEST_CASE("bootstrap_ci width shrinks like the root sample size") {
  RngStream rng(77);
  double widths[3] = {0, 0, 0};
  const int sizes[3] = {10, 40, 160};
  for (int k = 0; k < 3; ++k) {
    std::vector<double> samples(sizes[k]);
    for (double& v : samples) v = rng.normal();
    const auto [lo, hi] = bootstrap_ci(samples, 10000, 0.95, 1000 + k);
    widths[k] = hi - lo;
  }
  // Quadrupling n should halve the width, within a factor-two tolerance.
  CHECK(widths[1] < widths[0]);
  CHECK(widths[2] < widths[1]);
  CHECK(widths[0] / widths[1] > 1.0);
  CHECK(widths[0] / widths[1] < 4.0);
  CHECK(widths[1] / widths[2] > 1.0);
  CHECK(widths[1] / widths[2] < 4.0);
}

TEST_CASE("wilcoxon: extreme statistic and degenerate sizes") {
  std::vector<double> x(10), y(10, 0.0);
  for (int i = 0; i < 10; ++i) x[i] = 1.0 + i;
  CHECK(wilcoxon_exact(x, y) == doctest::Approx(2.0 / 1024.0).epsilon(1e-12));
  CHECK(wilcoxon_exact_one_sided(x, y) ==
        doctest::Approx(1.0 / 1024.0).epsilon(1e-12));

  // Identical except one pair: zero-drop leaves n = 1, p capped at 1.
  std::vector<double> a = {1.0, 2.0, 3.0};
  std::vector<double> b = {1.0, 2.0, 2.5};
  CHECK(wilcoxon_exact(a, b) == 1.0);

  const std::vector<double> same = {1.0, 2.0};
  CHECK_THROWS_AS((void)wilcoxon_exact(same, same), std::invalid_argument);
}

TEST_CASE("wilcoxon handles tied magnitudes with average ranks") {
  // d = {+1, -1, +2}: ranks {1.5, 1.5, 3}, W+ = 4.5, p = 2 * 3/8.
  const std::vector<double> x = {1.0, 0.0, 2.0};
  const std::vector<double> y = {0.0, 1.0, 0.0};
  CHECK(wilcoxon_exact(x, y) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("wilcoxon matches brute-force enumeration on random fixtures") {
  RngStream rng(91);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(10), y(10);
    for (int i = 0; i < 10; ++i) {
      x[i] = rng.normal();
      // Occasionally force ties in |d| and zero differences.
      y[i] = rng.uniform() < 0.2 ? x[i] : std::round(4.0 * rng.normal()) / 4.0;
    }
    bool all_zero = true;
    for (int i = 0; i < 10; ++i) {
      if (x[i] != y[i]) all_zero = false;
    }
    if (all_zero) continue;
    const double expected = test_oracle::wilcoxon_brute_force(x, y);
    CHECK(wilcoxon_exact(x, y) == doctest::Approx(expected).epsilon(1e-12));
    // Two-sided symmetry in the arguments.
    CHECK(wilcoxon_exact(y, x) ==
          doctest::Approx(wilcoxon_exact(x, y)).epsilon(1e-12));
  }
}
