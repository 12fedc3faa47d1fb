#pragma once

#include <span>
#include <utility>
#include <vector>

#include "adpo/rng.hpp"

namespace adpo {

enum class LabelKind { hard, soft };
enum class TransformKind { raw, rank_gauss, kde_cdf_logit };

struct PairwiseTarget {
  int i = 0;
  int j = 0;
  double q_ij = 0.0;  // probability that i is preferred over j
  LabelKind kind = LabelKind::hard;
};

// Plackett-Luce style distribution over a group; entries sum to 1.
struct ListwiseTarget {
  std::vector<double> q;
};

// Hard winner label; ties go to the lower index (q = 1).
PairwiseTarget hard_pair_label(int i, int j, double reward_i, double reward_j);

// Bradley-Terry soft label sigmoid(beta_r * (R_i - R_j)).
PairwiseTarget soft_pair_label(int i, int j, double reward_i, double reward_j,
                               double beta_r);

// min(P, P(P-1)/2) distinct unordered pairs, uniform without replacement.
std::vector<std::pair<int, int>> sample_pairs(int group_size, RngStream& rng);

// softmax(rhat / beta_r) with max subtraction.
ListwiseTarget listwise_target(std::span<const double> rhat, double beta_r);

std::vector<double> transform_raw(std::span<const double> rewards);

// rhat_i = Phi^-1((rank_i + 0.5) / P), ascending ranks, average ranks on ties.
std::vector<double> transform_rank_gauss(std::span<const double> rewards);

// Gaussian-KDE CDF with Scott bandwidth h = P^{-1/5} * sigma_hat, then logit
// with [1e-6, 1-1e-6] clipping. Degenerate spread returns an all-zero vector.
std::vector<double> transform_kde_cdf_logit(std::span<const double> rewards);

// KDE-Rank variant: rank-Gaussian scores fed through the KDE-CDF-logit map.
ListwiseTarget kde_rank_target(std::span<const double> rewards, double beta_r);

ListwiseTarget make_listwise_target(std::span<const double> rewards,
                                    TransformKind transform, double beta_r);

}  // namespace adpo
