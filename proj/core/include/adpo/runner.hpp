#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adpo/anchors.hpp"
#include "adpo/datagen.hpp"
#include "adpo/targets.hpp"

namespace adpo {

enum class MethodId {
  std_soft,
  std_hard,
  adpo_pair_soft,
  adpo_pair_hard,
  adpo_list_raw,
  adpo_list_kde,
  adpo_list_kde_rank,
  adpo_list_noanchor,
};

std::string to_string(MethodId id);
MethodId parse_method(const std::string& id);
std::vector<MethodId> all_methods();

// A training method: loss family, label/transform choice, anchor strategy,
// temperatures. std_* methods train and evaluate without any reference;
// adpo_* methods anchor per score (pairwise) or per group (listwise).
struct MethodSpec {
  MethodId id = MethodId::adpo_list_raw;
  AnchorStrategy anchor;
  double beta = 1.0;
  double beta_r = 1.0;
  double tau = 1.0;  // listwise only; pairwise evaluation is pinned to tau = 1

  static MethodSpec make(MethodId id);

  bool pairwise() const;
  bool listwise() const { return !pairwise(); }
  bool anchored() const { return anchor.kind != AnchorKind::none; }
  LabelKind label() const;          // pairwise methods
  TransformKind transform() const;  // listwise methods

  bool operator==(const MethodSpec&) const = default;
};

enum class ModelScale { small, medium, large };
std::string to_string(ModelScale s);
ModelScale parse_scale(const std::string& s);

struct TrainConfig {
  int epochs = 80;
  int batch_size = 32;
  ModelScale scale = ModelScale::medium;
  double lr = 5e-4;
  double weight_decay = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  int n_train = 10000;
  int n_test = 1000;
  WorldSpec world;

  ScorerConfig scorer_config() const;
  ScorerConfig scorer_config(ModelScale s) const;

  bool operator==(const TrainConfig&) const = default;
};

// Per-seed, per-method, per-scenario outcome: epoch trajectories and finals.
struct RunResult {
  std::string method;
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<double> winmass;       // per epoch, on test groups
  std::vector<double> loss;          // per epoch, mean training loss
  std::vector<double> kl_to_anchor;  // per epoch, mean KL(anchor || policy)
  double final_winmass = 0.0;
  std::uint64_t policy_init_hash = 0;
  std::uint64_t anchor_init_hash = 0;
  std::uint64_t anchor_final_hash = 0;
  int anchor_updates = 0;
  double wall_ms = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

RunResult train_one(const MethodSpec& method, const ScenarioSpec& scenario,
                    const TrainConfig& config, std::uint64_t seed);

using ProgressFn = std::function<void(std::size_t done, std::size_t total,
                                      const RunResult& cell)>;

struct GridSpec {
  std::vector<ScenarioSpec> scenarios;
  std::vector<MethodSpec> methods;
  std::vector<std::uint64_t> seeds;
};

struct GridResult {
  GridSpec spec;
  std::vector<RunResult> cells;  // scenario-major, then method, then seed
};

// Independent cells run on `workers` threads; results land in a fixed order
// so downstream aggregation is identical regardless of scheduling.
GridResult run_grid(const GridSpec& grid, const TrainConfig& config, int workers,
                    const ProgressFn& progress = nullptr);

struct AggregateRow {
  std::string scenario;
  std::string method;
  int n_seeds = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample std over seeds
  double ci_lo = 0.0;
  double ci_hi = 0.0;               // 95% percentile bootstrap of the mean
  std::optional<double> p_vs_std;   // two-sided Wilcoxon vs better std baseline
  std::vector<double> finals;       // per-seed final WinMass, seed order
};

std::vector<AggregateRow> aggregate_grid(const GridResult& grid);

// --- Focused experiments -------------------------------------------------

struct ScaleRow {
  ModelScale scale;
  std::string method;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> finals;
};
std::vector<ScaleRow> run_scale_ablation(const TrainConfig& config,
                                         const std::vector<std::uint64_t>& seeds,
                                         int workers,
                                         const ProgressFn& progress = nullptr);

struct TemperatureRow {
  std::string method;
  double beta_r = 1.0;
  double tau = 1.0;
  double mean = 0.0;
  std::vector<double> finals;
};
std::vector<TemperatureRow> run_temperature_grid(
    const TrainConfig& config, const std::vector<MethodId>& methods,
    const std::vector<std::uint64_t>& seeds, int workers,
    const ProgressFn& progress = nullptr);

struct AnchorComparisonRow {
  std::string scenario;
  double fixed_mean = 0.0;
  double moving_mean = 0.0;
  double noanchor_mean = 0.0;
};
std::vector<AnchorComparisonRow> run_anchor_comparison(
    const TrainConfig& config, const std::vector<std::uint64_t>& seeds,
    int workers, const ProgressFn& progress = nullptr);

struct DistillRow {
  std::string method;  // kd | adpo_self_anchor | adpo_teacher_anchor
  double winmass_mean = 0.0;
  double winmass_std = 0.0;
  double kl_mean = 0.0;  // mean KL(teacher || student) over test groups
  double kl_std = 0.0;
  std::vector<double> winmass_per_seed;
  std::vector<double> kl_per_seed;
};
std::vector<DistillRow> run_distill_synthetic(
    const TrainConfig& config, const std::vector<std::uint64_t>& seeds,
    int workers, const ProgressFn& progress = nullptr);

}  // namespace adpo
