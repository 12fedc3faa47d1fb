#include "adpo/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "adpo/losses.hpp"
#include "adpo/math.hpp"
#include "adpo/metrics.hpp"

namespace adpo {

std::string to_string(MethodId id) {
  switch (id) {
    case MethodId::std_soft: return "std_soft";
    case MethodId::std_hard: return "std_hard";
    case MethodId::adpo_pair_soft: return "adpo_pair_soft";
    case MethodId::adpo_pair_hard: return "adpo_pair_hard";
    case MethodId::adpo_list_raw: return "adpo_list_raw";
    case MethodId::adpo_list_kde: return "adpo_list_kde";
    case MethodId::adpo_list_kde_rank: return "adpo_list_kde_rank";
    case MethodId::adpo_list_noanchor: return "adpo_list_noanchor";
  }
  return "?";
}

MethodId parse_method(const std::string& id) {
  for (MethodId m : all_methods()) {
    if (to_string(m) == id) return m;
  }
  throw std::invalid_argument("unknown method id: " + id);
}

std::vector<MethodId> all_methods() {
  return {MethodId::std_soft,           MethodId::std_hard,
          MethodId::adpo_pair_soft,     MethodId::adpo_pair_hard,
          MethodId::adpo_list_raw,      MethodId::adpo_list_kde,
          MethodId::adpo_list_kde_rank, MethodId::adpo_list_noanchor};
}

MethodSpec MethodSpec::make(MethodId id) {
  MethodSpec m;
  m.id = id;
  switch (id) {
    case MethodId::std_soft:
    case MethodId::std_hard:
    case MethodId::adpo_list_noanchor:
      m.anchor.kind = AnchorKind::none;
      break;
    default:
      m.anchor.kind = AnchorKind::fixed;
      break;
  }
  return m;
}

bool MethodSpec::pairwise() const {
  return id == MethodId::std_soft || id == MethodId::std_hard ||
         id == MethodId::adpo_pair_soft || id == MethodId::adpo_pair_hard;
}

LabelKind MethodSpec::label() const {
  return (id == MethodId::std_hard || id == MethodId::adpo_pair_hard)
             ? LabelKind::hard
             : LabelKind::soft;
}

TransformKind MethodSpec::transform() const {
  switch (id) {
    case MethodId::adpo_list_kde: return TransformKind::kde_cdf_logit;
    case MethodId::adpo_list_kde_rank:  // composed with rank_gauss in training
    case MethodId::adpo_list_raw:
    case MethodId::adpo_list_noanchor:
    default:
      return TransformKind::raw;
  }
}

std::string to_string(ModelScale s) {
  switch (s) {
    case ModelScale::small: return "small";
    case ModelScale::medium: return "medium";
    case ModelScale::large: return "large";
  }
  return "?";
}

ModelScale parse_scale(const std::string& s) {
  if (s == "small") return ModelScale::small;
  if (s == "medium") return ModelScale::medium;
  if (s == "large") return ModelScale::large;
  throw std::invalid_argument("unknown model scale: " + s);
}

ScorerConfig TrainConfig::scorer_config(ModelScale s) const {
  switch (s) {
    case ModelScale::small: return ScorerConfig::small(world.input_dim());
    case ModelScale::medium: return ScorerConfig::medium(world.input_dim());
    case ModelScale::large: return ScorerConfig::large(world.input_dim());
  }
  throw std::logic_error("unreachable");
}

ScorerConfig TrainConfig::scorer_config() const { return scorer_config(scale); }

namespace {

// Plain per-group softmax(scores/tau) rows for a whole score vector.
std::vector<double> plain_group_probs(std::span<const double> scores, int p,
                                      double tau) {
  std::vector<double> probs(scores.size());
  std::vector<double> z(p);
  for (std::size_t g = 0; g * p < scores.size(); ++g) {
    for (int i = 0; i < p; ++i) z[i] = scores[g * p + i] / tau;
    const auto row = softmax(z);
    std::copy(row.begin(), row.end(), probs.begin() + static_cast<long>(g) * p);
  }
  return probs;
}

ListwiseTarget build_listwise_target(const MethodSpec& method,
                                     const std::vector<double>& rewards) {
  if (method.id == MethodId::adpo_list_kde_rank) {
    return kde_rank_target(rewards, method.beta_r);
  }
  return make_listwise_target(rewards, method.transform(), method.beta_r);
}

struct RunAbort {
  std::string reason;
};

void parallel_jobs(std::size_t total, int workers,
                   const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || total <= 1) {
    for (std::size_t i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int count = std::min<std::size_t>(workers, total);
  pool.reserve(count);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= total) break;
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

RunResult train_one(const MethodSpec& method, const ScenarioSpec& scenario,
                    const TrainConfig& config, std::uint64_t seed) {
  const auto t_start = std::chrono::steady_clock::now();

  RunResult result;
  result.method = to_string(method.id);
  result.scenario = scenario.id();
  result.seed = seed;

  const Dataset ds =
      make_dataset(config.world, scenario, config.n_train, config.n_test, seed);
  const int p = ds.spec.group_size;
  const int in_dim = ds.spec.input_dim();
  const ScorerConfig cfg = config.scorer_config();

  const std::uint64_t policy_seed = derive_seed(seed, "policy");
  Scorer policy = init_scorer(cfg, policy_seed);
  result.policy_init_hash = parameter_hash(policy);

  // Reference: same initialization as the policy, pre-trained N steps on the
  // clean side of the training data. kind == none carries no snapshot.
  AnchorState anchor;
  if (method.anchored()) {
    const int steps = method.anchor.kind == AnchorKind::random
                          ? 0
                          : method.anchor.pretrain_steps;
    anchor = AnchorState(pretrain_reference(cfg, ds.train, ds.spec, steps,
                                            policy_seed, 1.0, 1.0, config.lr,
                                            config.weight_decay));
    result.anchor_init_hash = parameter_hash(anchor.snapshot());
  }

  const std::size_t n_train_rows = ds.train.size() * static_cast<std::size_t>(p);
  const std::size_t n_test_rows = ds.test.size() * static_cast<std::size_t>(p);

  std::vector<double> train_ref;
  std::vector<double> test_ref;
  std::vector<double> anchor_test_probs;  // plain softmax rows for KL logging
  const auto refresh_anchor_caches = [&] {
    if (anchor.has_snapshot()) {
      train_ref = anchor.snapshot().forward(ds.train_inputs, n_train_rows);
      test_ref = anchor.snapshot().forward(ds.test_inputs, n_test_rows);
      anchor_test_probs = plain_group_probs(test_ref, p, method.tau);
    } else {
      anchor_test_probs.assign(n_test_rows, 1.0 / p);
    }
  };
  refresh_anchor_caches();

  // Observation corruption is drawn fresh whenever supervision is formed,
  // like the adversarial label flips; clean and dist_shift supervision is a
  // per-group constant and is precomputed.
  const bool visit_corruption = scenario.family == NoiseFamily::heavy_noise ||
                                scenario.family == NoiseFamily::heavy_tailed ||
                                scenario.family == NoiseFamily::adversarial;
  std::vector<ListwiseTarget> fixed_targets;
  if (method.listwise() && !visit_corruption) {
    fixed_targets.reserve(ds.train.size());
    for (const Group& g : ds.train) {
      fixed_targets.push_back(build_listwise_target(method, g.noisy_rewards));
    }
  }

  AdamWState opt = AdamWState::make(cfg, config.lr, config.weight_decay,
                                    config.adam_beta1, config.adam_beta2);
  RngStream visit = stream(seed, "visit", fnv1a(scenario.id()),
                           fnv1a(to_string(method.id)));

  ScorerWorkspace ws;
  std::vector<double> batch_inputs;
  std::vector<double> scores;
  std::vector<double> upstream;
  std::vector<double> grad(cfg.param_count());
  std::vector<std::size_t> order(ds.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::vector<double> zero_ref(p, 0.0);
  std::vector<double> observed(p);

  // Draws this visit's noisy observations into `observed`.
  const auto observe = [&](const Group& group) {
    observed = group.noisy_rewards;
    switch (scenario.family) {
      case NoiseFamily::heavy_noise:
        for (double& r : observed) {
          r += draw_heavy_noise(ds.sigma, scenario.p_out, visit).eps;
        }
        break;
      case NoiseFamily::heavy_tailed:
        for (double& r : observed) r += visit.cauchy(scenario.gamma);
        break;
      default:
        break;
    }
  };

  result.winmass.reserve(config.epochs);
  result.loss.reserve(config.epochs);
  result.kl_to_anchor.reserve(config.epochs);

  try {
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      maybe_update(anchor, method.anchor, policy, epoch);
      if (anchor.last_update_epoch() == epoch && epoch > 0 &&
          method.anchor.kind == AnchorKind::dynamic) {
        ++result.anchor_updates;
        refresh_anchor_caches();
      }

      RngStream shuffle_rng = stream(seed, "shuffle", epoch);
      shuffle_rng.shuffle(order);

      double epoch_loss = 0.0;
      std::size_t epoch_units = 0;

      for (std::size_t start = 0; start < order.size();
           start += config.batch_size) {
        const std::size_t bsize =
            std::min<std::size_t>(config.batch_size, order.size() - start);
        const std::size_t rows = bsize * p;

        batch_inputs.resize(rows * in_dim);
        for (std::size_t b = 0; b < bsize; ++b) {
          const std::size_t g = order[start + b];
          std::copy_n(ds.train_inputs.data() + g * p * in_dim,
                      static_cast<std::size_t>(p) * in_dim,
                      batch_inputs.data() + b * p * in_dim);
        }
        scores.resize(rows);
        policy.forward(batch_inputs, rows, scores, ws);
        upstream.assign(rows, 0.0);

        double batch_loss = 0.0;
        std::size_t units = 0;

        if (method.pairwise()) {
          for (std::size_t b = 0; b < bsize; ++b) {
            const std::size_t g = order[start + b];
            observe(ds.train[g]);
            const double* s = scores.data() + b * p;
            const double* sref =
                train_ref.empty() ? nullptr : train_ref.data() + g * p;
            const auto pairs = sample_pairs(p, visit);
            for (auto [i, j] : pairs) {
              double q = method.label() == LabelKind::hard
                             ? hard_pair_label(i, j, observed[i], observed[j]).q_ij
                             : soft_pair_label(i, j, observed[i], observed[j],
                                               method.beta_r)
                                   .q_ij;
              if (scenario.family == NoiseFamily::adversarial) {
                q = flip_soft_label(q, scenario.p_flip, visit);
              }
              const ScorePair sp{
                  s[i] - s[j], sref ? sref[i] - sref[j] : 0.0, method.beta};
              batch_loss += pairwise_loss(sp, q);
              const double gg = pairwise_grad(sp, q);
              upstream[b * p + i] += gg;
              upstream[b * p + j] -= gg;
              ++units;
            }
          }
        } else {
          for (std::size_t b = 0; b < bsize; ++b) {
            const std::size_t g = order[start + b];
            ListwiseTarget visit_target;
            const ListwiseTarget* target;
            if (visit_corruption) {
              observe(ds.train[g]);
              if (scenario.family == NoiseFamily::adversarial) {
                observed = adversarial_reward_reassign(observed, scenario.p_flip,
                                                       visit);
              }
              visit_target = build_listwise_target(method, observed);
              target = &visit_target;
            } else {
              target = &fixed_targets[g];
            }
            const AnchoredGroupScores gs{
                {scores.data() + b * p, static_cast<std::size_t>(p)},
                train_ref.empty()
                    ? std::span<const double>(zero_ref)
                    : std::span<const double>(train_ref.data() + g * p,
                                              static_cast<std::size_t>(p)),
                method.tau};
            batch_loss += listwise_loss(gs, *target);
            const auto gl = listwise_grad(gs, *target);
            for (int i = 0; i < p; ++i) upstream[b * p + i] = gl[i];
            ++units;
          }
        }

        if (units == 0) continue;
        const double inv = 1.0 / static_cast<double>(units);
        for (double& u : upstream) u *= inv;
        batch_loss *= inv;
        if (!std::isfinite(batch_loss)) {
          throw RunAbort{"non-finite loss in scenario " + scenario.id() +
                         " at epoch " + std::to_string(epoch) + ", batch " +
                         std::to_string(start / config.batch_size)};
        }
        epoch_loss += batch_loss;
        ++epoch_units;

        std::fill(grad.begin(), grad.end(), 0.0);
        policy.backward(upstream, grad, ws);
        adamw_step(policy, opt, grad);
      }

      // Per-epoch evaluation on the test groups. All methods are compared by
      // the plain softmax over their scores: anchored training bakes the
      // reference into the policy (its stationary point is s = s_ref + fit),
      // and subtracting s_ref at evaluation time would cancel exactly the
      // structure the anchor contributes.
      const auto test_scores = policy.forward(ds.test_inputs, n_test_rows);
      const double wm = winmass_from_scores(test_scores, {}, ds.test, p, method.tau);
      const auto policy_probs = plain_group_probs(test_scores, p, method.tau);
      double kl = 0.0;
      for (std::size_t g = 0; g < ds.test.size(); ++g) {
        kl += group_kl(
            {policy_probs.data() + g * p, static_cast<std::size_t>(p)},
            {anchor_test_probs.data() + g * p, static_cast<std::size_t>(p)});
      }
      kl /= static_cast<double>(ds.test.size());

      result.winmass.push_back(wm);
      result.loss.push_back(epoch_loss / std::max<std::size_t>(1, epoch_units));
      result.kl_to_anchor.push_back(kl);
    }
  } catch (const RunAbort& abort) {
    result.aborted = true;
    result.abort_reason = abort.reason;
  } catch (const std::exception& e) {
    result.aborted = true;
    result.abort_reason = e.what();
  }

  if (anchor.has_snapshot()) {
    result.anchor_final_hash = parameter_hash(anchor.snapshot());
  }
  result.final_winmass = result.winmass.empty() ? 0.0 : result.winmass.back();
  result.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t_start)
                       .count();
  return result;
}

GridResult run_grid(const GridSpec& grid, const TrainConfig& config, int workers,
                    const ProgressFn& progress) {
  GridResult out;
  out.spec = grid;
  const std::size_t total =
      grid.scenarios.size() * grid.methods.size() * grid.seeds.size();
  out.cells.resize(total);

  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_jobs(total, workers, [&](std::size_t idx) {
    const std::size_t per_scenario = grid.methods.size() * grid.seeds.size();
    const std::size_t si = idx / per_scenario;
    const std::size_t mi = (idx % per_scenario) / grid.seeds.size();
    const std::size_t ki = idx % grid.seeds.size();
    out.cells[idx] = train_one(grid.methods[mi], grid.scenarios[si], config,
                               grid.seeds[ki]);
    const std::size_t d = done.fetch_add(1) + 1;
    if (progress) {
      std::scoped_lock lock(progress_mutex);
      progress(d, total, out.cells[idx]);
    }
  });
  return out;
}

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0
                   : std::accumulate(v.begin(), v.end(), 0.0) /
                         static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<AggregateRow> aggregate_grid(const GridResult& grid) {
  const auto& spec = grid.spec;
  const std::size_t per_scenario = spec.methods.size() * spec.seeds.size();

  std::vector<AggregateRow> rows;
  for (std::size_t si = 0; si < spec.scenarios.size(); ++si) {
    // Per-method finals keyed by seed index; aborted cells are excluded.
    std::vector<std::vector<std::optional<double>>> finals(
        spec.methods.size(),
        std::vector<std::optional<double>>(spec.seeds.size()));
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      for (std::size_t ki = 0; ki < spec.seeds.size(); ++ki) {
        const RunResult& cell =
            grid.cells[si * per_scenario + mi * spec.seeds.size() + ki];
        if (!cell.aborted) finals[mi][ki] = cell.final_winmass;
      }
    }

    // Baseline for significance: the better of std_soft / std_hard by mean.
    int baseline = -1;
    double baseline_mean = -1.0;
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      const MethodId id = spec.methods[mi].id;
      if (id != MethodId::std_soft && id != MethodId::std_hard) continue;
      std::vector<double> vals;
      for (const auto& f : finals[mi]) {
        if (f) vals.push_back(*f);
      }
      const double m = mean_of(vals);
      if (!vals.empty() && m > baseline_mean) {
        baseline_mean = m;
        baseline = static_cast<int>(mi);
      }
    }

    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      AggregateRow row;
      row.scenario = spec.scenarios[si].id();
      row.method = to_string(spec.methods[mi].id);
      for (const auto& f : finals[mi]) {
        if (f) row.finals.push_back(*f);
      }
      row.n_seeds = static_cast<int>(row.finals.size());
      row.mean = mean_of(row.finals);
      row.stddev = sample_std(row.finals);
      if (row.finals.size() >= 2) {
        std::tie(row.ci_lo, row.ci_hi) = bootstrap_ci(
            row.finals, 10000, 0.95,
            derive_seed(0, "bootstrap", fnv1a(row.scenario), fnv1a(row.method)));
      } else {
        row.ci_lo = row.ci_hi = row.mean;
      }
      const MethodId id = spec.methods[mi].id;
      const bool is_adpo =
          id != MethodId::std_soft && id != MethodId::std_hard;
      if (is_adpo && baseline >= 0) {
        std::vector<double> x, y;
        for (std::size_t ki = 0; ki < spec.seeds.size(); ++ki) {
          if (finals[mi][ki] && finals[baseline][ki]) {
            x.push_back(*finals[mi][ki]);
            y.push_back(*finals[baseline][ki]);
          }
        }
        if (x.size() >= 2) {
          bool all_zero = true;
          for (std::size_t k = 0; k < x.size(); ++k) {
            if (x[k] != y[k]) all_zero = false;
          }
          if (!all_zero) row.p_vs_std = wilcoxon_exact(x, y);
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ScaleRow> run_scale_ablation(const TrainConfig& config,
                                         const std::vector<std::uint64_t>& seeds,
                                         int workers, const ProgressFn& progress) {
  const ScenarioSpec scenario =
      ScenarioSpec::make(NoiseFamily::heavy_noise, Severity::medium);
  const std::vector<ModelScale> scales = {ModelScale::small, ModelScale::medium,
                                          ModelScale::large};
  const std::vector<MethodId> methods = {MethodId::std_soft,
                                         MethodId::adpo_pair_soft};

  const std::size_t total = scales.size() * methods.size() * seeds.size();
  std::vector<RunResult> cells(total);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_jobs(total, workers, [&](std::size_t idx) {
    const std::size_t sc = idx / (methods.size() * seeds.size());
    const std::size_t mi = (idx / seeds.size()) % methods.size();
    const std::size_t ki = idx % seeds.size();
    TrainConfig c = config;
    c.scale = scales[sc];
    cells[idx] =
        train_one(MethodSpec::make(methods[mi]), scenario, c, seeds[ki]);
    const std::size_t d = done.fetch_add(1) + 1;
    if (progress) {
      std::scoped_lock lock(progress_mutex);
      progress(d, total, cells[idx]);
    }
  });

  std::vector<ScaleRow> rows;
  for (std::size_t sc = 0; sc < scales.size(); ++sc) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      ScaleRow row;
      row.scale = scales[sc];
      row.method = to_string(methods[mi]);
      for (std::size_t ki = 0; ki < seeds.size(); ++ki) {
        const RunResult& cell =
            cells[sc * methods.size() * seeds.size() + mi * seeds.size() + ki];
        if (!cell.aborted) row.finals.push_back(cell.final_winmass);
      }
      row.mean = mean_of(row.finals);
      row.stddev = sample_std(row.finals);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<TemperatureRow> run_temperature_grid(
    const TrainConfig& config, const std::vector<MethodId>& methods,
    const std::vector<std::uint64_t>& seeds, int workers,
    const ProgressFn& progress) {
  const ScenarioSpec scenario =
      ScenarioSpec::make(NoiseFamily::heavy_noise, Severity::medium);
  const std::vector<double> values = {0.5, 1.0, 2.0, 4.0};

  // Pairwise methods pin tau = 1, so their tau axis is degenerate by
  // construction; duplicate cells are computed once and reused.
  struct Job {
    MethodId method;
    double beta_r;
    double tau_effective;
  };
  std::vector<Job> jobs;
  std::vector<std::vector<std::size_t>> cell_to_job;  // [method*16] -> job idx
  for (MethodId id : methods) {
    const bool pairwise = MethodSpec::make(id).pairwise();
    std::vector<std::size_t> map;
    for (double br : values) {
      std::size_t pinned_job = static_cast<std::size_t>(-1);
      for (double tau : values) {
        const double eff = pairwise ? 1.0 : tau;
        if (pairwise && pinned_job != static_cast<std::size_t>(-1)) {
          map.push_back(pinned_job);
          continue;
        }
        jobs.push_back({id, br, eff});
        map.push_back(jobs.size() - 1);
        if (pairwise) pinned_job = jobs.size() - 1;
      }
    }
    cell_to_job.push_back(std::move(map));
  }

  const std::size_t total = jobs.size() * seeds.size();
  std::vector<RunResult> cells(total);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_jobs(total, workers, [&](std::size_t idx) {
    const Job& job = jobs[idx / seeds.size()];
    MethodSpec m = MethodSpec::make(job.method);
    m.beta_r = job.beta_r;
    if (!m.pairwise()) m.tau = job.tau_effective;
    cells[idx] = train_one(m, scenario, config, seeds[idx % seeds.size()]);
    const std::size_t d = done.fetch_add(1) + 1;
    if (progress) {
      std::scoped_lock lock(progress_mutex);
      progress(d, total, cells[idx]);
    }
  });

  std::vector<TemperatureRow> rows;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    std::size_t cell = 0;
    for (double br : values) {
      for (double tau : values) {
        const std::size_t job = cell_to_job[mi][cell++];
        TemperatureRow row;
        row.method = to_string(methods[mi]);
        row.beta_r = br;
        row.tau = tau;
        for (std::size_t ki = 0; ki < seeds.size(); ++ki) {
          const RunResult& r = cells[job * seeds.size() + ki];
          if (!r.aborted) row.finals.push_back(r.final_winmass);
        }
        row.mean = mean_of(row.finals);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<AnchorComparisonRow> run_anchor_comparison(
    const TrainConfig& config, const std::vector<std::uint64_t>& seeds,
    int workers, const ProgressFn& progress) {
  const std::vector<ScenarioSpec> scenarios = {
      ScenarioSpec::make(NoiseFamily::heavy_noise, Severity::heavy),
      ScenarioSpec::make(NoiseFamily::dist_shift, Severity::heavy),
      ScenarioSpec::make(NoiseFamily::adversarial, Severity::heavy),
      ScenarioSpec::make(NoiseFamily::heavy_tailed, Severity::heavy),
  };
  MethodSpec fixed = MethodSpec::make(MethodId::adpo_list_raw);
  MethodSpec moving = fixed;
  moving.anchor.kind = AnchorKind::dynamic;
  const MethodSpec noanchor = MethodSpec::make(MethodId::adpo_list_noanchor);
  const std::vector<MethodSpec> variants = {fixed, moving, noanchor};

  const std::size_t total = scenarios.size() * variants.size() * seeds.size();
  std::vector<RunResult> cells(total);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_jobs(total, workers, [&](std::size_t idx) {
    const std::size_t si = idx / (variants.size() * seeds.size());
    const std::size_t vi = (idx / seeds.size()) % variants.size();
    const std::size_t ki = idx % seeds.size();
    cells[idx] = train_one(variants[vi], scenarios[si], config, seeds[ki]);
    const std::size_t d = done.fetch_add(1) + 1;
    if (progress) {
      std::scoped_lock lock(progress_mutex);
      progress(d, total, cells[idx]);
    }
  });

  std::vector<AnchorComparisonRow> rows;
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    AnchorComparisonRow row;
    row.scenario = scenarios[si].id();
    double* const means[] = {&row.fixed_mean, &row.moving_mean,
                             &row.noanchor_mean};
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
      std::vector<double> finals;
      for (std::size_t ki = 0; ki < seeds.size(); ++ki) {
        const RunResult& r =
            cells[si * variants.size() * seeds.size() + vi * seeds.size() + ki];
        if (!r.aborted) finals.push_back(r.final_winmass);
      }
      *means[vi] = mean_of(finals);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

// Listwise training against fixed per-group targets (teacher distillation).
Scorer train_with_fixed_targets(Scorer policy, const AnchorState& anchor,
                                const Dataset& ds,
                                const std::vector<ListwiseTarget>& targets,
                                const TrainConfig& config, double tau,
                                std::uint64_t seed) {
  const int p = ds.spec.group_size;
  const int in_dim = ds.spec.input_dim();
  const std::size_t n_rows = ds.train.size() * static_cast<std::size_t>(p);
  std::vector<double> train_ref;
  if (anchor.has_snapshot()) {
    train_ref = anchor.snapshot().forward(ds.train_inputs, n_rows);
  }
  AdamWState opt = AdamWState::make(policy.config(), config.lr,
                                    config.weight_decay, config.adam_beta1,
                                    config.adam_beta2);
  ScorerWorkspace ws;
  std::vector<double> batch_inputs, scores, upstream;
  std::vector<double> grad(policy.config().param_count());
  const std::vector<double> zero_ref(p, 0.0);
  std::vector<std::size_t> order(ds.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    RngStream shuffle_rng = stream(seed, "shuffle", epoch);
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t bsize =
          std::min<std::size_t>(config.batch_size, order.size() - start);
      const std::size_t rows = bsize * p;
      batch_inputs.resize(rows * in_dim);
      for (std::size_t b = 0; b < bsize; ++b) {
        std::copy_n(ds.train_inputs.data() + order[start + b] * p * in_dim,
                    static_cast<std::size_t>(p) * in_dim,
                    batch_inputs.data() + b * p * in_dim);
      }
      scores.resize(rows);
      policy.forward(batch_inputs, rows, scores, ws);
      upstream.assign(rows, 0.0);
      for (std::size_t b = 0; b < bsize; ++b) {
        const std::size_t g = order[start + b];
        const AnchoredGroupScores gs{
            {scores.data() + b * p, static_cast<std::size_t>(p)},
            train_ref.empty()
                ? std::span<const double>(zero_ref)
                : std::span<const double>(train_ref.data() + g * p,
                                          static_cast<std::size_t>(p)),
            tau};
        const auto gl = listwise_grad(gs, targets[g]);
        for (int i = 0; i < p; ++i) {
          upstream[b * p + i] = gl[i] / static_cast<double>(bsize);
        }
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      policy.backward(upstream, grad, ws);
      adamw_step(policy, opt, grad);
    }
  }
  return policy;
}

}  // namespace

std::vector<DistillRow> run_distill_synthetic(
    const TrainConfig& config, const std::vector<std::uint64_t>& seeds,
    int workers, const ProgressFn& progress) {
  enum Variant { kKD = 0, kSelf = 1, kTeacher = 2 };
  const char* names[] = {"kd", "adpo_self_anchor", "adpo_teacher_anchor"};

  struct SeedOutcome {
    double winmass[3] = {0, 0, 0};
    double kl[3] = {0, 0, 0};
  };
  std::vector<SeedOutcome> outcomes(seeds.size());

  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_jobs(seeds.size(), workers, [&](std::size_t ki) {
    const std::uint64_t seed = seeds[ki];
    const ScenarioSpec clean = ScenarioSpec::make(NoiseFamily::clean, Severity::light);
    const Dataset ds =
        make_dataset(config.world, clean, config.n_train, config.n_test, seed);
    const int p = ds.spec.group_size;
    const std::size_t train_rows = ds.train.size() * static_cast<std::size_t>(p);
    const std::size_t test_rows = ds.test.size() * static_cast<std::size_t>(p);

    const Scorer teacher =
        make_teacher_anchor(config.scorer_config(ModelScale::large), ds.train,
                            ds.spec, derive_seed(seed, "teacher"));
    const auto teacher_train = teacher.forward(ds.train_inputs, train_rows);
    const auto teacher_test = teacher.forward(ds.test_inputs, test_rows);

    // Ranking teacher: per-group soft target from teacher scores.
    std::vector<ListwiseTarget> targets;
    targets.reserve(ds.train.size());
    for (std::size_t g = 0; g < ds.train.size(); ++g) {
      std::vector<double> s(teacher_train.begin() + static_cast<long>(g) * p,
                            teacher_train.begin() + static_cast<long>(g + 1) * p);
      targets.push_back(listwise_target(s, 1.0));
    }
    const auto teacher_probs = plain_group_probs(teacher_test, p, 1.0);

    const ScorerConfig student_cfg = config.scorer_config(ModelScale::small);
    const Scorer student_init =
        init_scorer(student_cfg, derive_seed(seed, "policy"));

    SeedOutcome& out = outcomes[ki];
    for (int v = 0; v < 3; ++v) {
      AnchorState anchor;
      if (v == kSelf) anchor = AnchorState(student_init);
      if (v == kTeacher) anchor = AnchorState(teacher);
      const Scorer trained = train_with_fixed_targets(
          student_init, anchor, ds, targets, config, 1.0, seed);
      const auto student_test = trained.forward(ds.test_inputs, test_rows);
      std::vector<double> ref;
      if (anchor.has_snapshot()) {
        ref = anchor.snapshot().forward(ds.test_inputs, test_rows);
      }
      out.winmass[v] = winmass_from_scores(
          student_test,
          ref.empty() ? std::span<const double>() : std::span<const double>(ref),
          ds.test, p, 1.0);

      // Evaluation distribution: anchored softmax when anchored, plain overall.
      std::vector<double> eval_scores(test_rows);
      for (std::size_t r = 0; r < test_rows; ++r) {
        eval_scores[r] = student_test[r] - (ref.empty() ? 0.0 : ref[r]);
      }
      const auto student_probs = plain_group_probs(eval_scores, p, 1.0);
      double kl = 0.0;
      for (std::size_t g = 0; g < ds.test.size(); ++g) {
        kl += group_kl(
            {student_probs.data() + g * p, static_cast<std::size_t>(p)},
            {teacher_probs.data() + g * p, static_cast<std::size_t>(p)});
      }
      out.kl[v] = kl / static_cast<double>(ds.test.size());
    }
    const std::size_t d = done.fetch_add(1) + 1;
    if (progress) {
      std::scoped_lock lock(progress_mutex);
      RunResult marker;
      marker.method = "distill";
      marker.scenario = "clean";
      marker.seed = seed;
      progress(d, seeds.size(), marker);
    }
  });

  std::vector<DistillRow> rows;
  for (int v = 0; v < 3; ++v) {
    DistillRow row;
    row.method = names[v];
    for (const SeedOutcome& o : outcomes) {
      row.winmass_per_seed.push_back(o.winmass[v]);
      row.kl_per_seed.push_back(o.kl[v]);
    }
    row.winmass_mean = mean_of(row.winmass_per_seed);
    row.winmass_std = sample_std(row.winmass_per_seed);
    row.kl_mean = mean_of(row.kl_per_seed);
    row.kl_std = sample_std(row.kl_per_seed);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace adpo
