#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "adpo/anchors.hpp"
#include "adpo/datagen.hpp"

namespace adpo {

// Mean probability mass the policy's evaluation softmax places on the true
// best item. Anchored methods use softmax((s - s_ref)/tau); pass scores of
// equal value (or an empty anchor) for the plain softmax(s/tau) form.
double winmass_from_scores(std::span<const double> policy_scores,
                           std::span<const double> ref_scores,
                           const std::vector<Group>& groups, int group_size,
                           double tau);

double winmass(const Scorer& policy, const AnchorState* anchor,
               const std::vector<Group>& groups,
               std::span<const double> inputs, int group_size, double tau);

// KL(q || p) = sum_i q_i log(q_i / p_i), 0 log 0 = 0; +inf where p_i = 0
// under q_i > 0.
double group_kl(std::span<const double> p, std::span<const double> q);

// Percentile bootstrap interval of the mean; `resamples` means are sorted and
// the (1 +- level)/2 quantiles are read at nearest-rank positions
// round((B-1)*alpha). Deterministic given seed.
std::pair<double, double> bootstrap_ci(std::span<const double> samples,
                                       int resamples = 10000, double level = 0.95,
                                       std::uint64_t seed = 0);

// Exact paired Wilcoxon signed-rank test, two-sided. Zero differences are
// dropped; tied magnitudes take average ranks; the null distribution of W+ is
// enumerated exactly over all 2^n sign assignments.
double wilcoxon_exact(std::span<const double> x, std::span<const double> y);

// One-sided tail P(W+ >= w) for the alternative "x tends to exceed y".
double wilcoxon_exact_one_sided(std::span<const double> x,
                                std::span<const double> y);

}  // namespace adpo
