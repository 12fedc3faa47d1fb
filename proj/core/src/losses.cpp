#include "adpo/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "adpo/math.hpp"

namespace adpo {

namespace {

void check_pair(const ScorePair& pair, double q_ij) {
  if (pair.beta <= 0.0) throw std::invalid_argument("pairwise: beta must be positive");
  if (q_ij < 0.0 || q_ij > 1.0) {
    throw std::invalid_argument("pairwise: q_ij must lie in [0, 1]");
  }
}

void check_group(const AnchoredGroupScores& g) {
  if (g.tau <= 0.0) throw std::invalid_argument("listwise: tau must be positive");
  if (g.s.size() != g.s_ref.size()) {
    throw std::invalid_argument("listwise: s and s_ref sizes differ");
  }
}

void check_target(const AnchoredGroupScores& g, const ListwiseTarget& q) {
  if (q.q.size() != g.s.size()) {
    throw std::invalid_argument("listwise: target size mismatch");
  }
  double sum = 0.0;
  for (double v : q.q) sum += v;
  if (std::abs(sum - 1.0) > 1e-8) {
    throw std::invalid_argument("listwise: target does not sum to 1");
  }
}

}  // namespace

double pairwise_loss(const ScorePair& pair, double q_ij) {
  check_pair(pair, q_ij);
  const double z = pair.beta * (pair.delta_theta - pair.delta_ref);
  return softplus(z) - q_ij * z;
}

double pairwise_grad(const ScorePair& pair, double q_ij) {
  check_pair(pair, q_ij);
  const double z = pair.beta * (pair.delta_theta - pair.delta_ref);
  return pair.beta * (sigmoid(z) - q_ij);
}

double standard_dpo_loss(double delta_anchored, double q_ij, double beta) {
  return pairwise_loss({delta_anchored, 0.0, beta}, q_ij);
}

double standard_dpo_grad(double delta_anchored, double q_ij, double beta) {
  return pairwise_grad({delta_anchored, 0.0, beta}, q_ij);
}

std::vector<double> listwise_probs(const AnchoredGroupScores& g) {
  check_group(g);
  std::vector<double> z(g.s.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (g.s[i] - g.s_ref[i]) / g.tau;
  return softmax(z);
}

double listwise_loss(const AnchoredGroupScores& g, const ListwiseTarget& q) {
  check_group(g);
  check_target(g, q);
  std::vector<double> z(g.s.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (g.s[i] - g.s_ref[i]) / g.tau;
  const double lse = logsumexp(z);
  double loss = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (q.q[i] != 0.0) loss -= q.q[i] * (z[i] - lse);
  }
  return loss;
}

std::vector<double> listwise_grad(const AnchoredGroupScores& g,
                                  const ListwiseTarget& q) {
  check_target(g, q);
  std::vector<double> grad = listwise_probs(g);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = (grad[i] - q.q[i]) / g.tau;
  }
  return grad;
}

double unanchored_listwise_loss(std::span<const double> s, const ListwiseTarget& q,
                                double tau) {
  const std::vector<double> zeros(s.size(), 0.0);
  return listwise_loss({s, zeros, tau}, q);
}

}  // namespace adpo
