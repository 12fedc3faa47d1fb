#include "adpo/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace adpo {

namespace {

int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::clean: return "clean";
    case NoiseFamily::heavy_noise: return "heavy_noise";
    case NoiseFamily::dist_shift: return "dist_shift";
    case NoiseFamily::adversarial: return "adversarial";
    case NoiseFamily::heavy_tailed: return "heavy_tailed";
  }
  return "?";
}

std::string to_string(Severity s) {
  switch (s) {
    case Severity::light: return "light";
    case Severity::medium: return "medium";
    case Severity::heavy: return "heavy";
  }
  return "?";
}

ScenarioSpec ScenarioSpec::make(NoiseFamily family, Severity severity) {
  ScenarioSpec s;
  s.family = family;
  s.severity = severity;
  const int k = static_cast<int>(severity);
  switch (family) {
    case NoiseFamily::clean:
      break;
    case NoiseFamily::heavy_noise: {
      constexpr double snr[] = {1.0, 0.5, 0.2};
      constexpr double pout[] = {0.05, 0.10, 0.20};
      s.snr = snr[k];
      s.p_out = pout[k];
      break;
    }
    case NoiseFamily::dist_shift: {
      constexpr double alpha[] = {1.2, 1.5, 2.0};
      constexpr double delta[] = {0.3, 0.5, 1.0};
      s.alpha = alpha[k];
      s.delta = delta[k];
      break;
    }
    case NoiseFamily::adversarial: {
      constexpr double pflip[] = {0.05, 0.10, 0.20};
      s.p_flip = pflip[k];
      break;
    }
    case NoiseFamily::heavy_tailed: {
      constexpr double gamma[] = {0.3, 0.5, 1.0};
      s.gamma = gamma[k];
      break;
    }
  }
  return s;
}

std::string ScenarioSpec::id() const {
  if (family == NoiseFamily::clean) return "clean";
  return to_string(family) + "_" + to_string(severity);
}

ScenarioSpec ScenarioSpec::parse(const std::string& id) {
  if (id == "clean") return make(NoiseFamily::clean, Severity::light);
  for (NoiseFamily f : {NoiseFamily::heavy_noise, NoiseFamily::dist_shift,
                        NoiseFamily::adversarial, NoiseFamily::heavy_tailed}) {
    for (Severity s : {Severity::light, Severity::medium, Severity::heavy}) {
      ScenarioSpec spec = make(f, s);
      if (spec.id() == id) return spec;
    }
  }
  throw std::invalid_argument("unknown scenario id: " + id);
}

std::vector<ScenarioSpec> all_scenarios() {
  std::vector<ScenarioSpec> out;
  for (NoiseFamily f : {NoiseFamily::heavy_noise, NoiseFamily::dist_shift,
                        NoiseFamily::adversarial, NoiseFamily::heavy_tailed}) {
    for (Severity s : {Severity::light, Severity::medium, Severity::heavy}) {
      out.push_back(ScenarioSpec::make(f, s));
    }
  }
  return out;
}

std::vector<double> Group::concat_inputs(const WorldSpec& spec) const {
  const int p = spec.group_size;
  std::vector<double> inputs(static_cast<std::size_t>(p) * spec.input_dim());
  for (int i = 0; i < p; ++i) {
    double* row = inputs.data() + static_cast<std::size_t>(i) * spec.input_dim();
    std::copy(context.begin(), context.end(), row);
    std::copy(items.begin() + static_cast<std::size_t>(i) * spec.item_dim,
              items.begin() + static_cast<std::size_t>(i + 1) * spec.item_dim,
              row + spec.context_dim);
  }
  return inputs;
}

Scorer build_oracle(const WorldSpec& spec) {
  ScorerConfig cfg{spec.input_dim(), spec.oracle_hidden, spec.oracle_layers};
  Scorer oracle = init_scorer(cfg, derive_seed(spec.world_seed, "oracle"));
  if (spec.reward_std > 0.0) {
    // Rescale the output head so the within-group reward std over probe
    // groups equals reward_std. This pins the ranking-relevant signal scale
    // of every world; a raw random init would leave it arbitrary and
    // world-dependent.
    const double raw_sd =
        std::sqrt(estimate_within_group_variance(spec, oracle));
    if (raw_sd > 0.0) {
      const auto shapes = cfg.layer_shapes();
      std::size_t off = cfg.param_count();
      off -= static_cast<std::size_t>(shapes.back().first) * shapes.back().second +
             shapes.back().first;
      auto params = oracle.parameters();
      for (std::size_t k = off; k < params.size(); ++k) {
        params[k] *= spec.reward_std / raw_sd;
      }
    }
  }
  return oracle;
}

Group sample_group(const WorldSpec& spec, const Scorer& oracle, RngStream& rng) {
  Group g;
  g.context.resize(spec.context_dim);
  for (double& x : g.context) x = rng.uniform();
  g.items.resize(static_cast<std::size_t>(spec.group_size) * spec.item_dim);
  for (double& x : g.items) x = rng.uniform();

  const auto inputs = g.concat_inputs(spec);
  g.true_rewards = oracle.forward(inputs, spec.group_size);
  g.noisy_rewards = g.true_rewards;
  g.best_index = argmax_lowest(g.true_rewards);
  return g;
}

double estimate_reward_variance(const WorldSpec& spec, const Scorer& oracle, int n) {
  RngStream rng = stream(spec.world_seed, "probe");
  std::vector<double> inputs(static_cast<std::size_t>(n) * spec.input_dim());
  for (double& x : inputs) x = rng.uniform();
  const auto r = oracle.forward(inputs, n);
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
  double var = 0.0;
  for (double v : r) var += (v - mean) * (v - mean);
  return var / n;
}

HeavyNoiseDraw draw_heavy_noise(double sigma, double p_out, RngStream& rng) {
  HeavyNoiseDraw d;
  d.outlier = rng.bernoulli(p_out);
  const double scale = d.outlier ? 10.0 * sigma : sigma;  // sigma_out^2 = 100 sigma^2
  d.eps = scale * rng.normal();
  return d;
}

void corrupt_heavy_noise(Group& group, double sigma, double p_out, RngStream& rng) {
  for (std::size_t i = 0; i < group.noisy_rewards.size(); ++i) {
    group.noisy_rewards[i] = group.true_rewards[i] + draw_heavy_noise(sigma, p_out, rng).eps;
  }
}

void corrupt_heavy_tailed(Group& group, double gamma, RngStream& rng) {
  for (std::size_t i = 0; i < group.noisy_rewards.size(); ++i) {
    group.noisy_rewards[i] = group.true_rewards[i] + rng.cauchy(gamma);
  }
}

void corrupt_dist_shift(Group& group, double alpha, double delta,
                        const WorldSpec& spec, const Scorer& oracle) {
  if (alpha < 1.0) throw std::invalid_argument("dist_shift: alpha must be >= 1");
  for (double& c : group.context) c = alpha * c + delta;
  const auto inputs = group.concat_inputs(spec);
  group.true_rewards = oracle.forward(inputs, spec.group_size);
  group.noisy_rewards = group.true_rewards;
  group.best_index = argmax_lowest(group.true_rewards);
}

double flip_soft_label(double q, double p_flip, RngStream& rng) {
  return rng.bernoulli(p_flip) ? 1.0 - q : q;
}

std::vector<double> adversarial_reward_reassign(const std::vector<double>& rewards,
                                                double p_flip, RngStream& rng) {
  const int p = static_cast<int>(rewards.size());
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return rewards[a] < rewards[b]; });
  std::vector<double> sorted(p);
  for (int k = 0; k < p; ++k) sorted[k] = rewards[order[k]];
  for (int k = 0; k + 1 < p; ++k) {
    if (rng.bernoulli(p_flip)) std::swap(order[k], order[k + 1]);
  }
  std::vector<double> out(p);
  for (int k = 0; k < p; ++k) out[order[k]] = sorted[k];
  return out;
}

double estimate_within_group_variance(const WorldSpec& spec, const Scorer& oracle,
                                      int n_groups) {
  RngStream rng = stream(spec.world_seed, "probe_within");
  double acc = 0.0;
  for (int g = 0; g < n_groups; ++g) {
    const Group pg = sample_group(spec, oracle, rng);
    double m = 0.0, v2 = 0.0;
    for (double r : pg.true_rewards) m += r;
    m /= static_cast<double>(pg.true_rewards.size());
    for (double r : pg.true_rewards) v2 += (r - m) * (r - m);
    acc += v2 / static_cast<double>(pg.true_rewards.size());
  }
  return acc / n_groups;
}

Dataset make_dataset(const WorldSpec& base, const ScenarioSpec& scenario,
                     int n_train, int n_test, std::uint64_t seed) {
  Dataset ds;
  ds.spec = base;
  ds.spec.world_seed = seed;
  ds.scenario = scenario;
  const Scorer oracle = build_oracle(ds.spec);

  if (scenario.family == NoiseFamily::heavy_noise) {
    // SNR is calibrated against the ranking-relevant signal: the mean
    // within-group reward variance (context-level variance cancels in all
    // targets and labels by groupwise shift invariance).
    const double var = estimate_within_group_variance(ds.spec, oracle);
    ds.sigma = std::sqrt(var / scenario.snr);
  }

  RngStream train_rng = stream(seed, "train_groups");
  ds.train.reserve(n_train);
  for (int i = 0; i < n_train; ++i) {
    // Observation noise is drawn when supervision is formed (per visit), so
    // train groups carry clean observations here.
    ds.train.push_back(sample_group(ds.spec, oracle, train_rng));
  }

  RngStream test_rng = stream(seed, "test_groups");
  ds.test.reserve(n_test);
  for (int i = 0; i < n_test; ++i) {
    Group g = sample_group(ds.spec, oracle, test_rng);
    if (scenario.family == NoiseFamily::dist_shift) {
      corrupt_dist_shift(g, scenario.alpha, scenario.delta, ds.spec, oracle);
    }
    ds.test.push_back(std::move(g));
  }

  const auto cache = [&](const std::vector<Group>& groups, std::vector<double>& flat) {
    flat.resize(groups.size() * static_cast<std::size_t>(ds.spec.group_size) *
                ds.spec.input_dim());
    std::size_t off = 0;
    for (const Group& g : groups) {
      const auto in = g.concat_inputs(ds.spec);
      std::copy(in.begin(), in.end(), flat.begin() + static_cast<long>(off));
      off += in.size();
    }
  };
  cache(ds.train, ds.train_inputs);
  cache(ds.test, ds.test_inputs);
  return ds;
}

void dump_dataset(const Dataset& ds, std::ostream& os) {
  os.precision(17);
  const auto put = [&](const std::vector<Group>& groups) {
    for (const Group& g : groups) {
      for (double v : g.context) os << v << ' ';
      for (double v : g.items) os << v << ' ';
      for (double v : g.true_rewards) os << v << ' ';
      for (double v : g.noisy_rewards) os << v << ' ';
      os << g.best_index << '\n';
    }
  };
  os << ds.train.size() << ' ' << ds.test.size() << '\n';
  put(ds.train);
  put(ds.test);
}

std::vector<Group> load_groups(std::istream& is, const WorldSpec& spec,
                               std::size_t count) {
  std::vector<Group> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Group g;
    g.context.resize(spec.context_dim);
    g.items.resize(static_cast<std::size_t>(spec.group_size) * spec.item_dim);
    g.true_rewards.resize(spec.group_size);
    g.noisy_rewards.resize(spec.group_size);
    for (double& v : g.context) is >> v;
    for (double& v : g.items) is >> v;
    for (double& v : g.true_rewards) is >> v;
    for (double& v : g.noisy_rewards) is >> v;
    is >> g.best_index;
    if (!is) throw std::runtime_error("dataset dump truncated");
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace adpo
