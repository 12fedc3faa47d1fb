#pragma once

#include <span>
#include <vector>

#include "adpo/targets.hpp"

namespace adpo {

// Anchored pairwise state: score gap, reference gap, student temperature.
struct ScorePair {
  double delta_theta = 0.0;  // s_i - s_j
  double delta_ref = 0.0;    // s_i_ref - s_j_ref
  double beta = 1.0;
};

// Policy and reference scores over one group, with listwise temperature.
struct AnchoredGroupScores {
  std::span<const double> s;
  std::span<const double> s_ref;
  double tau = 1.0;
};

// log(1 + exp(beta*(dt - dr))) - q * beta*(dt - dr), via stable softplus.
double pairwise_loss(const ScorePair& pair, double q_ij);

// d(pairwise_loss)/d(delta_theta) = beta * (sigmoid(beta*(dt - dr)) - q).
// Per-score gradients are +g for item i and -g for item j.
double pairwise_grad(const ScorePair& pair, double q_ij);

// Same functional form applied to a pre-anchored difference
// (s_i - s_i_ref) - (s_j - s_j_ref); with hard q this is -log sigma(+-beta*d).
double standard_dpo_loss(double delta_anchored, double q_ij, double beta);
double standard_dpo_grad(double delta_anchored, double q_ij, double beta);

// softmax((s - s_ref) / tau); sums to 1.
std::vector<double> listwise_probs(const AnchoredGroupScores& g);

// Anchored cross-entropy -sum_i q_i log p_i, computed through the stable
// log-sum-exp expansion.
double listwise_loss(const AnchoredGroupScores& g, const ListwiseTarget& q);

// dLoss/ds_i = (p_i - q_i) / tau.
std::vector<double> listwise_grad(const AnchoredGroupScores& g,
                                  const ListwiseTarget& q);

// Ablation form with zero reference.
double unanchored_listwise_loss(std::span<const double> s, const ListwiseTarget& q,
                                double tau);

}  // namespace adpo
