#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adpo/rng.hpp"
#include "adpo/scorer.hpp"

namespace adpo {

// Synthetic contextual-bandit world: uniform contexts/items, frozen MLP
// reward oracle, P candidates per group.
struct WorldSpec {
  int context_dim = 8;
  int item_dim = 8;
  int group_size = 4;
  int oracle_hidden = 64;
  int oracle_layers = 2;
  // Oracle rewards are rescaled so the within-group reward std over probe
  // groups hits this value; it fixes the sharpness of exp(R/beta_r) teacher
  // targets and the ranking difficulty, which a raw random init would leave
  // arbitrary and world-dependent. 0 disables rescaling.
  double reward_std = 3.0;
  std::uint64_t world_seed = 0;

  int input_dim() const { return context_dim + item_dim; }
  bool operator==(const WorldSpec&) const = default;
};

// One prompt: shared context, P candidate items, true and observed rewards.
struct Group {
  std::vector<double> context;       // context_dim
  std::vector<double> items;         // group_size x item_dim, row-major
  std::vector<double> true_rewards;  // group_size
  std::vector<double> noisy_rewards; // group_size
  int best_index = 0;                // argmax of true_rewards, lowest-index ties

  std::vector<double> concat_inputs(const WorldSpec& spec) const;
};

enum class NoiseFamily { clean, heavy_noise, dist_shift, adversarial, heavy_tailed };
enum class Severity { light, medium, heavy };

std::string to_string(NoiseFamily f);
std::string to_string(Severity s);

struct ScenarioSpec {
  NoiseFamily family = NoiseFamily::clean;
  Severity severity = Severity::light;

  // Resolved parameters for the (family, severity) pair.
  double snr = 0.0;     // heavy_noise: Var[R*]/sigma^2 target
  double p_out = 0.0;   // heavy_noise: outlier probability
  double alpha = 1.0;   // dist_shift: context scale
  double delta = 0.0;   // dist_shift: context shift
  double p_flip = 0.0;  // adversarial: label flip probability
  double gamma = 0.0;   // heavy_tailed: Cauchy scale

  static ScenarioSpec make(NoiseFamily family, Severity severity);
  static ScenarioSpec parse(const std::string& id);
  std::string id() const;  // e.g. "heavy_noise_medium", "clean"

  bool operator==(const ScenarioSpec&) const = default;
};

// The 12-scenario grid: 4 noise families x 3 severities.
std::vector<ScenarioSpec> all_scenarios();

// Frozen reward oracle seeded by world_seed.
Scorer build_oracle(const WorldSpec& spec);

// Clean group: context and items i.i.d. uniform on [0,1], rewards from the
// oracle, noisy_rewards equal to true_rewards.
Group sample_group(const WorldSpec& spec, const Scorer& oracle, RngStream& rng);

// Population variance of oracle rewards over n uniform probe inputs.
double estimate_reward_variance(const WorldSpec& spec, const Scorer& oracle,
                                int n = 10000);

// Mean within-group variance of true rewards over probe groups; the signal
// term of the SNR calibration (10000 probe rewards = 2500 groups of 4).
double estimate_within_group_variance(const WorldSpec& spec, const Scorer& oracle,
                                      int n_groups = 2500);

// One Gaussian-with-outliers noise draw (observable mixture component).
struct HeavyNoiseDraw {
  double eps = 0.0;
  bool outlier = false;
};
HeavyNoiseDraw draw_heavy_noise(double sigma, double p_out, RngStream& rng);

void corrupt_heavy_noise(Group& group, double sigma, double p_out, RngStream& rng);
void corrupt_heavy_tailed(Group& group, double gamma, RngStream& rng);

// Test-time context shift (alpha*c + delta*1); rewards and the best index are
// recomputed from the oracle on the shifted context.
void corrupt_dist_shift(Group& group, double alpha, double delta,
                        const WorldSpec& spec, const Scorer& oracle);

// Adversarial label flip, applied when pairwise targets are formed.
double flip_soft_label(double q, double p_flip, RngStream& rng);

// Adversarial corruption for listwise targets: a single adjacent-swap pass
// over the reward ordering (each adjacent comparison flipped with p_flip),
// then the sorted reward values are reassigned along the perturbed order.
std::vector<double> adversarial_reward_reassign(const std::vector<double>& rewards,
                                                double p_flip, RngStream& rng);

struct Dataset {
  WorldSpec spec;
  ScenarioSpec scenario;
  double sigma = 0.0;  // resolved heavy-noise sigma (0 otherwise)
  std::vector<Group> train;
  std::vector<Group> test;
  std::vector<double> train_inputs;  // n_train*P x input_dim, row-major
  std::vector<double> test_inputs;   // n_test*P x input_dim
};

// Groups carry clean observations; scenario corruption is drawn from a
// dedicated stream each time supervision is formed (the trainer's visit
// stream), mirroring how adversarial flips corrupt labels rather than data.
// Test groups keep clean observations (with shifted contexts for
// dist_shift). Identical (world dims, scenario, seed) always produce
// identical datasets.
Dataset make_dataset(const WorldSpec& spec, const ScenarioSpec& scenario,
                     int n_train, int n_test, std::uint64_t seed);

// Columnar plain-text dump/load for debugging (one group per record:
// context, items, true rewards, noisy rewards, best index).
void dump_dataset(const Dataset& ds, std::ostream& os);
std::vector<Group> load_groups(std::istream& is, const WorldSpec& spec,
                               std::size_t count);

}  // namespace adpo
