#include "adpo/anchors.hpp"

#include <cstring>
#include <stdexcept>

#include "adpo/losses.hpp"
#include "adpo/rng.hpp"

namespace adpo {

std::string to_string(AnchorKind k) {
  switch (k) {
    case AnchorKind::fixed: return "fixed";
    case AnchorKind::dynamic: return "dynamic";
    case AnchorKind::none: return "none";
    case AnchorKind::random: return "random";
    case AnchorKind::teacher: return "teacher";
  }
  return "?";
}

std::vector<double> AnchorState::scores(std::span<const double> inputs,
                                        std::size_t n) const {
  if (!snapshot_) return std::vector<double>(n, 0.0);
  return snapshot_->forward(inputs, n);
}

void maybe_update(AnchorState& state, const AnchorStrategy& strategy,
                  const Scorer& policy, int epoch) {
  if (epoch < 0) throw std::invalid_argument("maybe_update: epoch must be >= 0");
  if (strategy.kind != AnchorKind::dynamic) return;
  if (epoch > 0 && epoch % strategy.update_period == 0) {
    state.snapshot_ = policy;
    state.last_update_epoch_ = epoch;
  }
}

Scorer pretrain_reference(const ScorerConfig& config,
                          const std::vector<Group>& clean_groups,
                          const WorldSpec& spec, int steps, std::uint64_t seed,
                          double beta_r, double tau, double lr,
                          double weight_decay) {
  if (steps < 0) throw std::invalid_argument("pretrain_reference: steps must be >= 0");
  Scorer ref = init_scorer(config, seed);
  if (steps == 0 || clean_groups.empty()) return ref;

  constexpr int kBatch = 32;
  const int p = spec.group_size;
  AdamWState opt = AdamWState::make(config, lr, weight_decay);
  ScorerWorkspace ws;
  std::vector<double> inputs;
  std::vector<double> scores;
  std::vector<double> upstream;
  std::vector<double> grad(config.param_count());

  std::size_t cursor = 0;
  for (int step = 0; step < steps; ++step) {
    inputs.clear();
    std::vector<const Group*> batch;
    for (int b = 0; b < kBatch; ++b) {
      const Group& g = clean_groups[cursor];
      cursor = (cursor + 1) % clean_groups.size();
      batch.push_back(&g);
      const auto in = g.concat_inputs(spec);
      inputs.insert(inputs.end(), in.begin(), in.end());
    }
    const std::size_t n = batch.size() * static_cast<std::size_t>(p);
    scores.resize(n);
    ref.forward(inputs, n, scores, ws);

    upstream.assign(n, 0.0);
    const std::vector<double> zeros(p, 0.0);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto target =
          make_listwise_target(batch[b]->true_rewards, TransformKind::raw, beta_r);
      const AnchoredGroupScores gs{
          {scores.data() + b * p, static_cast<std::size_t>(p)}, zeros, tau};
      const auto g = listwise_grad(gs, target);
      for (int i = 0; i < p; ++i) {
        upstream[b * p + i] = g[i] / static_cast<double>(batch.size());
      }
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    ref.backward(upstream, grad, ws);
    adamw_step(ref, opt, grad);
  }
  return ref;
}

Scorer make_teacher_anchor(const ScorerConfig& config_large,
                           const std::vector<Group>& clean_groups,
                           const WorldSpec& spec, std::uint64_t seed) {
  constexpr int kTeacherSteps = 500;  // fixed convergence budget
  return pretrain_reference(config_large, clean_groups, spec, kTeacherSteps, seed);
}

std::uint64_t parameter_hash(const Scorer& scorer) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : scorer.parameters()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xffULL;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace adpo
