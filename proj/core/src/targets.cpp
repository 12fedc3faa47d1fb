#include "adpo/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "adpo/math.hpp"

namespace adpo {

PairwiseTarget hard_pair_label(int i, int j, double reward_i, double reward_j) {
  if (i == j) throw std::invalid_argument("pair label: i and j must differ");
  return {i, j, reward_i >= reward_j ? 1.0 : 0.0, LabelKind::hard};
}

PairwiseTarget soft_pair_label(int i, int j, double reward_i, double reward_j,
                               double beta_r) {
  if (i == j) throw std::invalid_argument("pair label: i and j must differ");
  if (beta_r <= 0.0) throw std::invalid_argument("pair label: beta_r must be positive");
  return {i, j, sigmoid(beta_r * (reward_i - reward_j)), LabelKind::soft};
}

std::vector<std::pair<int, int>> sample_pairs(int group_size, RngStream& rng) {
  if (group_size < 2) throw std::invalid_argument("sample_pairs: need P >= 2");
  std::vector<std::pair<int, int>> all;
  all.reserve(static_cast<std::size_t>(group_size) * (group_size - 1) / 2);
  for (int i = 0; i < group_size; ++i) {
    for (int j = i + 1; j < group_size; ++j) all.emplace_back(i, j);
  }
  const std::size_t take = std::min<std::size_t>(group_size, all.size());
  // Partial Fisher-Yates: first `take` entries are a uniform sample.
  for (std::size_t k = 0; k < take; ++k) {
    const std::size_t r = k + rng.uniform_int(all.size() - k);
    std::swap(all[k], all[r]);
  }
  all.resize(take);
  return all;
}

ListwiseTarget listwise_target(std::span<const double> rhat, double beta_r) {
  if (beta_r <= 0.0) throw std::invalid_argument("listwise_target: beta_r must be positive");
  std::vector<double> scaled(rhat.size());
  for (std::size_t i = 0; i < rhat.size(); ++i) {
    if (!std::isfinite(rhat[i])) {
      throw std::invalid_argument("listwise_target: non-finite transformed reward");
    }
    scaled[i] = rhat[i] / beta_r;
  }
  return {softmax(scaled)};
}

std::vector<double> transform_raw(std::span<const double> rewards) {
  return {rewards.begin(), rewards.end()};
}

std::vector<double> transform_rank_gauss(std::span<const double> rewards) {
  const int p = static_cast<int>(rewards.size());
  if (p < 2) throw std::invalid_argument("rank_gauss: need P >= 2");
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return rewards[a] < rewards[b]; });
  // Ascending ranks in {0,...,P-1}, average rank across tied values.
  std::vector<double> rank(p);
  int k = 0;
  while (k < p) {
    int m = k;
    while (m + 1 < p && rewards[order[m + 1]] == rewards[order[k]]) ++m;
    const double avg = 0.5 * (k + m);
    for (int t = k; t <= m; ++t) rank[order[t]] = avg;
    k = m + 1;
  }
  std::vector<double> out(p);
  for (int i = 0; i < p; ++i) {
    out[i] = normal_quantile((rank[i] + 0.5) / p);
  }
  return out;
}

std::vector<double> transform_kde_cdf_logit(std::span<const double> rewards) {
  const int p = static_cast<int>(rewards.size());
  if (p < 2) throw std::invalid_argument("kde_cdf_logit: need P >= 2");
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / p;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / p);
  if (sd < 1e-12) return std::vector<double>(p, 0.0);  // uniform target fallback

  const double h = std::pow(static_cast<double>(p), -0.2) * sd;  // Scott's rule
  std::vector<double> out(p);
  for (int i = 0; i < p; ++i) {
    double cdf = 0.0;
    for (int j = 0; j < p; ++j) cdf += normal_cdf((rewards[i] - rewards[j]) / h);
    cdf /= p;
    cdf = std::clamp(cdf, 1e-6, 1.0 - 1e-6);
    out[i] = logit(cdf);
  }
  return out;
}

ListwiseTarget kde_rank_target(std::span<const double> rewards, double beta_r) {
  const auto ranked = transform_rank_gauss(rewards);
  const auto shaped = transform_kde_cdf_logit(ranked);
  return listwise_target(shaped, beta_r);
}

ListwiseTarget make_listwise_target(std::span<const double> rewards,
                                    TransformKind transform, double beta_r) {
  switch (transform) {
    case TransformKind::raw:
      return listwise_target(transform_raw(rewards), beta_r);
    case TransformKind::rank_gauss:
      return listwise_target(transform_rank_gauss(rewards), beta_r);
    case TransformKind::kde_cdf_logit:
      return listwise_target(transform_kde_cdf_logit(rewards), beta_r);
  }
  throw std::logic_error("unreachable");
}

}  // namespace adpo
