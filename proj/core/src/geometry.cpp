#include "adpo/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "adpo/math.hpp"
#include "adpo/metrics.hpp"
#include "adpo/rng.hpp"

namespace adpo {

double fisher_quadratic_form(std::span<const double> q,
                             std::span<const double> delta) {
  if (q.size() != delta.size()) {
    throw std::invalid_argument("fisher form: size mismatch");
  }
  double mean = 0.0, second = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    mean += q[i] * delta[i];
    second += q[i] * delta[i] * delta[i];
  }
  return 0.5 * (second - mean * mean);
}

std::vector<double> q_center(std::span<const double> q,
                             std::span<const double> delta) {
  double mean = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) mean += q[i] * delta[i];
  std::vector<double> out(delta.begin(), delta.end());
  for (double& v : out) v -= mean;
  return out;
}

double kl_vs_quadratic_ratio(std::span<const double> q,
                             std::span<const double> delta, double t) {
  if (t <= 0.0) throw std::invalid_argument("kl ratio: scale must be positive");
  std::vector<double> u(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) throw std::domain_error("kl ratio: q must be interior");
    u[i] = std::log(q[i]) + t * delta[i];
  }
  const auto p = softmax(u);
  std::vector<double> scaled(delta.begin(), delta.end());
  for (double& v : scaled) v *= t;
  const double quad = fisher_quadratic_form(q, scaled);
  return group_kl(p, q) / quad;
}

std::pair<double, double> trust_region_variance_identity(
    std::span<const double> s, std::span<const double> s_ref, double tau,
    std::span<const double> q) {
  const AnchoredGroupScores g{s, s_ref, tau};
  const auto p = listwise_probs(g);
  const double lhs = group_kl(p, q);
  // Deviation of the anchored gap from the matched point tau*log q; its
  // q-variance is the quadratic side of the expansion (additive constants
  // drop out of the variance, so any matched representative works).
  std::vector<double> dev(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (q[i] <= 0.0) {
      throw std::domain_error("trust region identity: q must be interior");
    }
    dev[i] = (s[i] - s_ref[i]) - tau * std::log(q[i]);
  }
  const double rhs = fisher_quadratic_form(q, dev) / (tau * tau);
  return {lhs, rhs};
}

std::pair<double, double> shift_invariance_probe(const AnchoredGroupScores& g,
                                                 const ListwiseTarget& q,
                                                 double c) {
  const double base = listwise_loss(g, q);
  std::vector<double> s(g.s.begin(), g.s.end());
  std::vector<double> s_ref(g.s_ref.begin(), g.s_ref.end());
  for (double& v : s) v += c;
  for (double& v : s_ref) v += c;
  const double shifted = listwise_loss({s, s_ref, g.tau}, q);
  return {base, shifted};
}

std::vector<GeometryProbeRow> run_fisher_probes(
    std::span<const int> group_sizes, int probes_per_size,
    std::span<const double> scales, std::uint64_t seed) {
  std::vector<GeometryProbeRow> rows;
  RngStream rng(seed);
  for (int p : group_sizes) {
    for (int k = 0; k < probes_per_size; ++k) {
      // Interior distribution: softmax of moderate logits, floored away from 0.
      std::vector<double> logits(p);
      for (double& v : logits) v = 2.0 * (rng.uniform() - 0.5);
      auto q = softmax(logits);
      for (double& v : q) v = std::max(v, 1e-6);
      double sum = 0.0;
      for (double v : q) sum += v;
      for (double& v : q) v /= sum;

      std::vector<double> dir(p);
      for (double& v : dir) v = 2.0 * (rng.uniform() - 0.5);
      const auto delta = q_center(q, dir);

      for (double t : scales) {
        rows.push_back({p, k, t, kl_vs_quadratic_ratio(q, delta, t)});
      }
    }
  }
  return rows;
}

}  // namespace adpo
