#pragma once

#include <span>
#include <utility>
#include <vector>

#include "adpo/losses.hpp"

namespace adpo {

// 1/2 * delta^T (Diag(q) - q q^T) delta = 1/2 * Var_q[delta], the softmax
// Fisher quadratic form at q.
double fisher_quadratic_form(std::span<const double> q,
                             std::span<const double> delta);

// Subtracts the q-weighted mean so that <q, delta> = 0.
std::vector<double> q_center(std::span<const double> q,
                             std::span<const double> delta);

// Ratio KL(q || softmax(log q + t*delta)) / fisher_quadratic_form(q, t*delta).
// Tends to 1 as t -> 0 for interior q and q-centered delta.
double kl_vs_quadratic_ratio(std::span<const double> q,
                             std::span<const double> delta, double t);

// (KL(q || softmax((s - s_ref)/tau)), Var_q[s - s_ref] / (2 tau^2)); the two
// agree to second order near the matched point softmax((s-s_ref)/tau) = q.
std::pair<double, double> trust_region_variance_identity(
    std::span<const double> s, std::span<const double> s_ref, double tau,
    std::span<const double> q);

// Anchored listwise loss before/after adding c to every s and s_ref entry.
std::pair<double, double> shift_invariance_probe(const AnchoredGroupScores& g,
                                                 const ListwiseTarget& q,
                                                 double c);

struct GeometryProbeRow {
  int group_size = 0;
  int probe = 0;
  double scale = 0.0;
  double ratio = 0.0;
};

// The Fisher-ratio convergence table: random interior (q, delta) probes over
// group sizes and scales; used by the verify-geometry experiment and tests.
std::vector<GeometryProbeRow> run_fisher_probes(
    std::span<const int> group_sizes, int probes_per_size,
    std::span<const double> scales, std::uint64_t seed);

}  // namespace adpo
