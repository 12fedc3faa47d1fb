#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adpo/datagen.hpp"
#include "adpo/scorer.hpp"

namespace adpo {

enum class AnchorKind { fixed, dynamic, none, random, teacher };

std::string to_string(AnchorKind k);

// Default reference budget: ~one pass over the clean training data. A
// reference that has not yet learned a usable ranking gives anchoring
// nothing to transfer, so the budget is sized to reach one.
inline constexpr int kDefaultPretrainSteps = 300;

struct AnchorStrategy {
  AnchorKind kind = AnchorKind::fixed;
  int pretrain_steps = kDefaultPretrainSteps;  // N, on clean data
  int update_period = 5;                       // K epochs, dynamic kind only

  bool operator==(const AnchorStrategy&) const = default;
};

// Frozen (or periodically refreshed) scorer snapshot providing s_ref.
// kind == none carries no snapshot and yields zero reference scores.
class AnchorState {
 public:
  AnchorState() = default;
  explicit AnchorState(Scorer snapshot) : snapshot_(std::move(snapshot)) {}

  bool has_snapshot() const { return snapshot_.has_value(); }
  const Scorer& snapshot() const { return *snapshot_; }
  int last_update_epoch() const { return last_update_epoch_; }

  // s_ref for a group's inputs: zeros without a snapshot, otherwise a
  // forward pass of the frozen snapshot.
  std::vector<double> scores(std::span<const double> inputs, std::size_t n) const;

  friend void maybe_update(AnchorState& state, const AnchorStrategy& strategy,
                           const Scorer& policy, int epoch);

 private:
  std::optional<Scorer> snapshot_;
  int last_update_epoch_ = 0;
};

// Hard update snapshot <- policy at epochs K, 2K, ... for the dynamic kind;
// every other kind leaves the state untouched.
void maybe_update(AnchorState& state, const AnchorStrategy& strategy,
                  const Scorer& policy, int epoch);

// N mini-batch AdamW steps (batch 32) of unanchored listwise cross-entropy
// against clean raw Plackett-Luce targets. N = 0 returns the seeded init.
Scorer pretrain_reference(const ScorerConfig& config,
                          const std::vector<Group>& clean_groups,
                          const WorldSpec& spec, int steps, std::uint64_t seed,
                          double beta_r = 1.0, double tau = 1.0,
                          double lr = 5e-4, double weight_decay = 1e-4);

// A large-scale scorer trained for a fixed 500-step budget on clean data;
// serves as both ranking teacher and anchor in the distillation experiment.
Scorer make_teacher_anchor(const ScorerConfig& config_large,
                           const std::vector<Group>& clean_groups,
                           const WorldSpec& spec, std::uint64_t seed);

std::uint64_t parameter_hash(const Scorer& scorer);

}  // namespace adpo
