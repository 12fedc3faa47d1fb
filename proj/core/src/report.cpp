#include "adpo/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace adpo {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string format_fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << text;
}

}  // namespace

fs::path cell_csv_path(const fs::path& results_dir, const std::string& scenario,
                       const std::string& method, std::uint64_t seed) {
  return results_dir / scenario / method / ("seed" + std::to_string(seed) + ".csv");
}

void write_cell_csv(const fs::path& path, const RunResult& result) {
  std::string text = "epoch,winmass,loss,kl_to_anchor\n";
  for (std::size_t e = 0; e < result.winmass.size(); ++e) {
    text += std::to_string(e + 1);
    text += ',';
    text += format_g17(result.winmass[e]);
    text += ',';
    text += format_g17(result.loss[e]);
    text += ',';
    text += format_g17(result.kl_to_anchor[e]);
    text += '\n';
  }
  write_text(path, text);
}

RunResult load_cell_csv(const fs::path& path, const std::string& scenario,
                        const std::string& method, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read cell csv: " + path.string());
  RunResult r;
  r.scenario = scenario;
  r.method = method;
  r.seed = seed;
  std::string line;
  if (!std::getline(in, line) || line != "epoch,winmass,loss,kl_to_anchor") {
    throw std::runtime_error("unexpected cell csv header in " + path.string());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');  // epoch
    std::getline(ss, field, ',');
    r.winmass.push_back(std::stod(field));
    std::getline(ss, field, ',');
    r.loss.push_back(std::stod(field));
    std::getline(ss, field, ',');
    r.kl_to_anchor.push_back(std::stod(field));
  }
  if (r.winmass.empty()) {
    throw std::runtime_error("empty cell csv: " + path.string());
  }
  r.final_winmass = r.winmass.back();
  return r;
}

void write_aggregate_csv(const fs::path& path,
                         const std::vector<AggregateRow>& rows) {
  std::string text =
      "scenario,method,n_seeds,mean_winmass,std_winmass,ci_lo,ci_hi,"
      "wilcoxon_p_vs_std\n";
  for (const AggregateRow& r : rows) {
    text += r.scenario + ',' + r.method + ',' + std::to_string(r.n_seeds) + ',';
    if (r.n_seeds == 0) {
      text += ",,,,\n";
      continue;
    }
    text += format_g17(r.mean) + ',' + format_g17(r.stddev) + ',' +
            format_g17(r.ci_lo) + ',' + format_g17(r.ci_hi) + ',';
    if (r.p_vs_std) text += format_g17(*r.p_vs_std);
    text += '\n';
  }
  write_text(path, text);
}

namespace {

struct ScenarioDisplay {
  std::string id;
  std::string family;
  std::string difficulty;
};

std::vector<ScenarioDisplay> canonical_order(const std::set<std::string>& present) {
  std::vector<ScenarioDisplay> out;
  if (present.count("clean")) out.push_back({"clean", "Clean", "—"});
  const std::map<NoiseFamily, std::string> family_names = {
      {NoiseFamily::heavy_noise, "Heavy Noise"},
      {NoiseFamily::dist_shift, "Dist. Shift"},
      {NoiseFamily::adversarial, "Adversarial"},
      {NoiseFamily::heavy_tailed, "Heavy-Tailed"},
  };
  const std::map<Severity, std::string> severity_names = {
      {Severity::light, "Light"},
      {Severity::medium, "Medium"},
      {Severity::heavy, "Heavy"},
  };
  for (const auto& s : all_scenarios()) {
    if (present.count(s.id())) {
      out.push_back({s.id(), family_names.at(s.family), severity_names.at(s.severity)});
    }
  }
  return out;
}

const AggregateRow* find_row(const std::vector<AggregateRow>& rows,
                             const std::string& scenario,
                             const std::string& method) {
  for (const auto& r : rows) {
    if (r.scenario == scenario && r.method == method && r.n_seeds > 0) return &r;
  }
  return nullptr;
}

}  // namespace

std::string summary_markdown(const std::vector<AggregateRow>& rows) {
  std::set<std::string> present;
  for (const auto& r : rows) present.insert(r.scenario);
  const auto order = canonical_order(present);

  std::string md;
  md += "# WinMass summary\n\n";
  md += "Mean test WinMass over seeds (random baseline = 1/P). Bold marks the "
        "best method in a row; underline marks the best pairwise method. The "
        "listwise column shows the best variant with its tag: R = raw, K = "
        "KDE, KR = KDE-Rank. The last column compares the best anchored "
        "method against the mean of the two standard baselines.\n\n";
  md += "| Scenario | Difficulty | Std-Soft | Std-Hard | ADPO-Soft | ADPO-Hard "
        "| Best Listwise | Best vs Std (%) |\n";
  md += "|---|---|---|---|---|---|---|---|\n";

  const std::vector<std::pair<std::string, std::string>> listwise_variants = {
      {"adpo_list_raw", "R"},
      {"adpo_list_kde", "K"},
      {"adpo_list_kde_rank", "KR"},
  };

  for (const auto& sc : order) {
    const AggregateRow* std_soft = find_row(rows, sc.id, "std_soft");
    const AggregateRow* std_hard = find_row(rows, sc.id, "std_hard");
    const AggregateRow* adpo_soft = find_row(rows, sc.id, "adpo_pair_soft");
    const AggregateRow* adpo_hard = find_row(rows, sc.id, "adpo_pair_hard");
    const AggregateRow* best_list = nullptr;
    std::string best_tag;
    for (const auto& [id, tag] : listwise_variants) {
      const AggregateRow* r = find_row(rows, sc.id, id);
      if (r && (!best_list || r->mean > best_list->mean)) {
        best_list = r;
        best_tag = tag;
      }
    }

    const std::vector<std::pair<const AggregateRow*, bool>> cols = {
        {std_soft, true},  {std_hard, true},  {adpo_soft, true},
        {adpo_hard, true}, {best_list, false}};
    double best_all = -1.0, best_pair = -1.0;
    for (const auto& [r, pairwise] : cols) {
      if (!r) continue;
      best_all = std::max(best_all, r->mean);
      if (pairwise) best_pair = std::max(best_pair, r->mean);
    }

    md += "| " + sc.family + " | " + sc.difficulty + " |";
    for (const auto& [r, pairwise] : cols) {
      md += ' ';
      if (!r) {
        md += "— |";
        continue;
      }
      std::string cell = format_fixed3(r->mean);
      if (r == best_list && !best_tag.empty()) cell += " (" + best_tag + ")";
      if (r->mean == best_all) {
        cell = "**" + cell + "**";
      } else if (pairwise && r->mean == best_pair) {
        cell = "<u>" + cell + "</u>";
      }
      md += cell + " |";
    }

    if (std_soft && std_hard) {
      const double base = 0.5 * (std_soft->mean + std_hard->mean);
      double best_adpo = -1.0;
      for (const AggregateRow* r : {adpo_soft, adpo_hard, best_list}) {
        if (r) best_adpo = std::max(best_adpo, r->mean);
      }
      if (best_adpo > 0.0 && base > 0.0) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%+.1f", 100.0 * (best_adpo - base) / base);
        md += std::string(" ") + buf + " |";
      } else {
        md += " — |";
      }
    } else {
      md += " — |";
    }
    md += '\n';
  }

  md += "\n## Per-method statistics\n\n";
  md += "| Scenario | Method | n | Mean | Std | 95% CI | Wilcoxon p vs std |\n";
  md += "|---|---|---|---|---|---|---|\n";
  for (const auto& sc : order) {
    for (const auto& r : rows) {
      if (r.scenario != sc.id) continue;
      md += "| " + r.scenario + " | " + r.method + " | " +
            std::to_string(r.n_seeds) + " | ";
      if (r.n_seeds == 0) {
        md += "— | — | — | — |\n";
        continue;
      }
      md += format_fixed3(r.mean) + " | " + format_fixed3(r.stddev) + " | [" +
            format_fixed3(r.ci_lo) + ", " + format_fixed3(r.ci_hi) + "] | ";
      if (r.p_vs_std) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4g", *r.p_vs_std);
        md += buf;
      } else {
        md += "—";
      }
      md += " |\n";
    }
  }
  return md;
}

std::string anchor_comparison_markdown(const std::vector<AnchorComparisonRow>& rows) {
  std::string md;
  md += "# Fixed vs moving anchor (online scenarios)\n\n";
  md += "Listwise training at heavy severity; the moving anchor hard-copies "
        "the policy every 5 epochs. The no-anchor column is the ablation "
        "without any reference.\n\n";
  md += "| Scenario | Fixed | Moving | Difference (%) | No anchor |\n";
  md += "|---|---|---|---|---|\n";
  int fixed_wins = 0, moving_wins = 0;
  for (const auto& r : rows) {
    const double diff = r.fixed_mean > 0.0
                            ? 100.0 * (r.moving_mean - r.fixed_mean) / r.fixed_mean
                            : 0.0;
    const bool moving_better = r.moving_mean > r.fixed_mean;
    (moving_better ? moving_wins : fixed_wins) += 1;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.1f", diff);
    md += "| " + r.scenario + " | " +
          (moving_better ? format_fixed3(r.fixed_mean)
                         : "**" + format_fixed3(r.fixed_mean) + "**") +
          " | " +
          (moving_better ? "**" + format_fixed3(r.moving_mean) + "**"
                         : format_fixed3(r.moving_mean)) +
          " | " + buf + " | " + format_fixed3(r.noanchor_mean) + " |\n";
  }
  md += "| **Winner** | " + std::to_string(fixed_wins) + "/" +
        std::to_string(rows.size()) + " | " + std::to_string(moving_wins) + "/" +
        std::to_string(rows.size()) + " | — | — |\n";
  return md;
}

std::string scale_markdown(const std::vector<ScaleRow>& rows) {
  std::string md;
  md += "# Model scale comparison (heavy_noise_medium)\n\n";
  md += "| Scale | Method | Mean | Std |\n|---|---|---|---|\n";
  for (const auto& r : rows) {
    md += "| " + to_string(r.scale) + " | " + r.method + " | " +
          format_fixed3(r.mean) + " | " + format_fixed3(r.stddev) + " |\n";
  }
  md += "\n| Scale | ADPO − Std gap |\n|---|---|\n";
  for (ModelScale s : {ModelScale::small, ModelScale::medium, ModelScale::large}) {
    const ScaleRow* std_row = nullptr;
    const ScaleRow* adpo_row = nullptr;
    for (const auto& r : rows) {
      if (r.scale != s) continue;
      if (r.method == "std_soft") std_row = &r;
      if (r.method == "adpo_pair_soft") adpo_row = &r;
    }
    if (std_row && adpo_row) {
      md += "| " + to_string(s) + " | " +
            format_fixed3(adpo_row->mean - std_row->mean) + " |\n";
    }
  }
  return md;
}

std::string temperature_markdown(const std::vector<TemperatureRow>& rows) {
  std::string md;
  md += "# Temperature sensitivity (heavy_noise_medium)\n\n";
  std::vector<std::string> methods;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
  }
  for (const auto& m : methods) {
    double lo = 1.0, hi = 0.0;
    md += "## " + m + "\n\n| beta_r \\ tau | 0.5 | 1 | 2 | 4 |\n|---|---|---|---|---|\n";
    for (double br : {0.5, 1.0, 2.0, 4.0}) {
      md += "| " + format_fixed3(br) + " |";
      for (double tau : {0.5, 1.0, 2.0, 4.0}) {
        for (const auto& r : rows) {
          if (r.method == m && r.beta_r == br && r.tau == tau) {
            md += " " + format_fixed3(r.mean) + " |";
            lo = std::min(lo, r.mean);
            hi = std::max(hi, r.mean);
          }
        }
      }
      md += '\n';
    }
    md += "\nmin " + format_fixed3(lo) + ", max " + format_fixed3(hi) +
          ", spread " + format_fixed3(hi - lo) + "\n\n";
  }
  return md;
}

std::string distill_markdown(const std::vector<DistillRow>& rows) {
  std::string md;
  md += "# Synthetic teacher distillation (clean bandit data)\n\n";
  md += "Students share initialization and teacher-derived targets; only the "
        "anchor differs. KL is the mean test-group divergence from the "
        "teacher's distribution to the student's evaluation distribution.\n\n";
  md += "| Method | WinMass | KL to teacher |\n|---|---|---|\n";
  for (const auto& r : rows) {
    md += "| " + r.method + " | " + format_fixed3(r.winmass_mean) + " ± " +
          format_fixed3(r.winmass_std) + " | " + format_fixed3(r.kl_mean) +
          " ± " + format_fixed3(r.kl_std) + " |\n";
  }
  return md;
}

void write_scale_csv(const fs::path& path, const std::vector<ScaleRow>& rows) {
  std::string text = "scale,method,n_seeds,mean_winmass,std_winmass\n";
  for (const auto& r : rows) {
    text += to_string(r.scale) + ',' + r.method + ',' +
            std::to_string(r.finals.size()) + ',' + format_g17(r.mean) + ',' +
            format_g17(r.stddev) + '\n';
  }
  write_text(path, text);
}

void write_temperature_csv(const fs::path& path,
                           const std::vector<TemperatureRow>& rows) {
  std::string text = "method,beta_r,tau,n_seeds,mean_winmass\n";
  for (const auto& r : rows) {
    text += r.method + ',' + format_g17(r.beta_r) + ',' + format_g17(r.tau) +
            ',' + std::to_string(r.finals.size()) + ',' + format_g17(r.mean) +
            '\n';
  }
  write_text(path, text);
}

void write_anchor_comparison_csv(const fs::path& path,
                                 const std::vector<AnchorComparisonRow>& rows) {
  std::string text = "scenario,fixed_mean,moving_mean,noanchor_mean\n";
  for (const auto& r : rows) {
    text += r.scenario + ',' + format_g17(r.fixed_mean) + ',' +
            format_g17(r.moving_mean) + ',' + format_g17(r.noanchor_mean) + '\n';
  }
  write_text(path, text);
}

void write_distill_csv(const fs::path& path, const std::vector<DistillRow>& rows) {
  std::string text = "method,n_seeds,winmass_mean,winmass_std,kl_mean,kl_std\n";
  for (const auto& r : rows) {
    text += r.method + ',' + std::to_string(r.winmass_per_seed.size()) + ',' +
            format_g17(r.winmass_mean) + ',' + format_g17(r.winmass_std) + ',' +
            format_g17(r.kl_mean) + ',' + format_g17(r.kl_std) + '\n';
  }
  write_text(path, text);
}

void write_geometry_csv(const fs::path& path,
                        const std::vector<GeometryProbeRow>& rows) {
  std::string text = "group_size,probe,scale,ratio\n";
  for (const auto& r : rows) {
    text += std::to_string(r.group_size) + ',' + std::to_string(r.probe) + ',' +
            format_g17(r.scale) + ',' + format_g17(r.ratio) + '\n';
  }
  write_text(path, text);
}

void write_manifest(const fs::path& path, const ExperimentConfig& config,
                    double wall_ms, std::size_t cells,
                    const std::vector<AbortedCell>& aborted) {
  json j;
  j["generated_by"] = std::string("adpo ") + kVersion;
  j["version"] = kVersion;
  j["config"] = json::parse(emit_config(config));
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  j["config_hash"] = hash;
  j["wall_ms"] = wall_ms;
  j["cells"] = cells;
  j["aborted"] = json::array();
  for (const auto& a : aborted) {
    j["aborted"].push_back({{"scenario", a.scenario},
                            {"method", a.method},
                            {"seed", a.seed},
                            {"reason", a.reason}});
  }
  write_text(path, j.dump(2) + "\n");
}

ReportResult report_from_cells(const fs::path& results_dir) {
  if (!fs::is_directory(results_dir)) {
    throw std::runtime_error("results directory not found: " + results_dir.string());
  }

  std::set<std::string> scenario_ids;
  std::set<std::string> method_ids;
  std::set<std::uint64_t> seed_set;
  for (const auto& sdir : fs::directory_iterator(results_dir)) {
    if (!sdir.is_directory()) continue;
    const std::string sid = sdir.path().filename().string();
    try {
      ScenarioSpec::parse(sid);
    } catch (const std::exception&) {
      continue;
    }
    for (const auto& mdir : fs::directory_iterator(sdir.path())) {
      if (!mdir.is_directory()) continue;
      const std::string mid = mdir.path().filename().string();
      try {
        parse_method(mid);
      } catch (const std::exception&) {
        continue;
      }
      for (const auto& file : fs::directory_iterator(mdir.path())) {
        const std::string name = file.path().filename().string();
        if (name.rfind("seed", 0) == 0 && name.size() > 8 &&
            name.substr(name.size() - 4) == ".csv") {
          scenario_ids.insert(sid);
          method_ids.insert(mid);
          seed_set.insert(std::stoull(name.substr(4, name.size() - 8)));
        }
      }
    }
  }
  if (scenario_ids.empty()) {
    throw std::runtime_error("no cell CSVs found under " + results_dir.string());
  }

  GridResult grid;
  if (scenario_ids.count("clean")) {
    grid.spec.scenarios.push_back(ScenarioSpec::parse("clean"));
  }
  for (const auto& s : all_scenarios()) {
    if (scenario_ids.count(s.id())) grid.spec.scenarios.push_back(s);
  }
  for (MethodId m : all_methods()) {
    if (method_ids.count(to_string(m))) {
      grid.spec.methods.push_back(MethodSpec::make(m));
    }
  }
  grid.spec.seeds.assign(seed_set.begin(), seed_set.end());

  ReportResult out;
  grid.cells.reserve(grid.spec.scenarios.size() * grid.spec.methods.size() *
                     grid.spec.seeds.size());
  for (const auto& sc : grid.spec.scenarios) {
    for (const auto& m : grid.spec.methods) {
      for (std::uint64_t seed : grid.spec.seeds) {
        const fs::path p =
            cell_csv_path(results_dir, sc.id(), to_string(m.id), seed);
        if (fs::exists(p)) {
          grid.cells.push_back(load_cell_csv(p, sc.id(), to_string(m.id), seed));
        } else {
          RunResult missing;
          missing.scenario = sc.id();
          missing.method = to_string(m.id);
          missing.seed = seed;
          missing.aborted = true;
          missing.abort_reason = "cell csv missing";
          grid.cells.push_back(std::move(missing));
          out.complete = false;
        }
      }
    }
  }
  out.rows = aggregate_grid(grid);
  return out;
}

}  // namespace adpo
