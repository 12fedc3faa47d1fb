#include "adpo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "adpo/math.hpp"
#include "adpo/rng.hpp"

namespace adpo {

double winmass_from_scores(std::span<const double> policy_scores,
                           std::span<const double> ref_scores,
                           const std::vector<Group>& groups, int group_size,
                           double tau) {
  if (groups.empty()) throw std::invalid_argument("winmass: no test groups");
  if (policy_scores.size() != groups.size() * static_cast<std::size_t>(group_size)) {
    throw std::invalid_argument("winmass: score count mismatch");
  }
  const bool anchored = !ref_scores.empty();
  if (anchored && ref_scores.size() != policy_scores.size()) {
    throw std::invalid_argument("winmass: reference score count mismatch");
  }
  std::vector<double> z(group_size);
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::size_t off = g * group_size;
    for (int i = 0; i < group_size; ++i) {
      const double ref = anchored ? ref_scores[off + i] : 0.0;
      z[i] = (policy_scores[off + i] - ref) / tau;
    }
    const auto probs = softmax(z);
    total += probs[groups[g].best_index];
  }
  return total / static_cast<double>(groups.size());
}

double winmass(const Scorer& policy, const AnchorState* anchor,
               const std::vector<Group>& groups,
               std::span<const double> inputs, int group_size, double tau) {
  const std::size_t n = groups.size() * static_cast<std::size_t>(group_size);
  const auto scores = policy.forward(inputs, n);
  std::vector<double> ref;
  if (anchor != nullptr && anchor->has_snapshot()) {
    ref = anchor->snapshot().forward(inputs, n);
  }
  return winmass_from_scores(scores, ref, groups, group_size, tau);
}

double group_kl(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("group_kl: size mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] == 0.0) continue;
    if (p[i] == 0.0) return std::numeric_limits<double>::infinity();
    kl += q[i] * std::log(q[i] / p[i]);
  }
  return std::max(kl, 0.0);
}

std::pair<double, double> bootstrap_ci(std::span<const double> samples,
                                       int resamples, double level,
                                       std::uint64_t seed) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("bootstrap_ci: need at least 2 samples");
  RngStream rng(seed);
  std::vector<double> means(resamples);
  for (int b = 0; b < resamples; ++b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sum += samples[rng.uniform_int(n)];
    }
    means[b] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  const auto idx = [&](double a) {
    return static_cast<std::size_t>(std::llround(a * (resamples - 1)));
  };
  return {means[idx(alpha)], means[idx(1.0 - alpha)]};
}

namespace {

struct RankedDiffs {
  std::vector<long> doubled_ranks;  // 2x average ranks (integers)
  long doubled_w_plus = 0;
};

RankedDiffs rank_differences(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("wilcoxon: size mismatch");
  std::vector<double> d;
  d.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    if (diff != 0.0) d.push_back(diff);
  }
  if (d.empty()) {
    throw std::invalid_argument("wilcoxon: all differences are zero, test undefined");
  }
  if (d.size() > 25) {
    throw std::invalid_argument("wilcoxon: exact enumeration supports n <= 25");
  }
  const int n = static_cast<int>(d.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(d[a]) < std::abs(d[b]);
  });
  RankedDiffs out;
  out.doubled_ranks.resize(n);
  int k = 0;
  while (k < n) {
    int m = k;
    while (m + 1 < n && std::abs(d[order[m + 1]]) == std::abs(d[order[k]])) ++m;
    // Average 1-based rank over the tie run [k, m], doubled to stay integral.
    const long doubled_avg = (k + 1) + (m + 1);
    for (int t = k; t <= m; ++t) out.doubled_ranks[order[t]] = doubled_avg;
    k = m + 1;
  }
  for (int i = 0; i < n; ++i) {
    if (d[i] > 0.0) out.doubled_w_plus += out.doubled_ranks[i];
  }
  return out;
}

// Exact counts of sign assignments by doubled W+ value.
std::vector<double> w_plus_counts(const std::vector<long>& doubled_ranks) {
  long total = 0;
  for (long r : doubled_ranks) total += r;
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  long reach = 0;
  for (long r : doubled_ranks) {
    reach += r;
    for (long s = reach; s >= r; --s) {
      count[s] += count[s - r];
    }
  }
  return count;
}

}  // namespace

double wilcoxon_exact(std::span<const double> x, std::span<const double> y) {
  const RankedDiffs rd = rank_differences(x, y);
  const auto count = w_plus_counts(rd.doubled_ranks);
  const double denom = std::pow(2.0, static_cast<double>(rd.doubled_ranks.size()));
  double le = 0.0, ge = 0.0;
  for (long s = 0; s < static_cast<long>(count.size()); ++s) {
    if (s <= rd.doubled_w_plus) le += count[s];
    if (s >= rd.doubled_w_plus) ge += count[s];
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / denom);
}

double wilcoxon_exact_one_sided(std::span<const double> x,
                                std::span<const double> y) {
  const RankedDiffs rd = rank_differences(x, y);
  const auto count = w_plus_counts(rd.doubled_ranks);
  const double denom = std::pow(2.0, static_cast<double>(rd.doubled_ranks.size()));
  double ge = 0.0;
  for (long s = rd.doubled_w_plus; s < static_cast<long>(count.size()); ++s) {
    ge += count[s];
  }
  return ge / denom;
}

}  // namespace adpo
