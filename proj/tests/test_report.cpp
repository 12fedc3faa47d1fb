#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "adpo/report.hpp"

using namespace adpo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("adpo_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

RunResult fake_cell(const std::string& scenario, const std::string& method,
                    std::uint64_t seed, double base) {
  RunResult r;
  r.scenario = scenario;
  r.method = method;
  r.seed = seed;
  for (int e = 0; e < 5; ++e) {
    r.winmass.push_back(base + 0.01 * e + 1e-9 / (seed + 1));
    r.loss.push_back(1.0 / (e + 1));
    r.kl_to_anchor.push_back(0.1 * e);
  }
  r.final_winmass = r.winmass.back();
  return r;
}

}  // namespace

TEST_CASE("cell CSVs round-trip at full precision") {
  TempDir tmp;
  const RunResult cell = fake_cell("heavy_noise_light", "adpo_list_raw", 3, 0.612345678901234);
  const fs::path p = cell_csv_path(tmp.path, cell.scenario, cell.method, cell.seed);
  write_cell_csv(p, cell);
  const RunResult back = load_cell_csv(p, cell.scenario, cell.method, cell.seed);
  CHECK(back.winmass == cell.winmass);
  CHECK(back.loss == cell.loss);
  CHECK(back.kl_to_anchor == cell.kl_to_anchor);
  CHECK(back.final_winmass == cell.final_winmass);

  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,winmass,loss,kl_to_anchor");
}

TEST_CASE("report recomputes aggregates from cells and flags gaps") {
  TempDir tmp;
  const std::vector<std::string> methods = {"std_soft", "std_hard",
                                            "adpo_pair_soft"};
  for (std::uint64_t seed : {0, 1, 2}) {
    double base = 0.4;
    for (const auto& m : methods) {
      const RunResult cell = fake_cell("adversarial_light", m, seed, base);
      write_cell_csv(cell_csv_path(tmp.path, cell.scenario, m, seed), cell);
      base += 0.1;
    }
  }
  const ReportResult full = report_from_cells(tmp.path);
  CHECK(full.complete);
  REQUIRE(full.rows.size() == 3);
  for (const auto& row : full.rows) {
    CHECK(row.n_seeds == 3);
    if (row.method == "adpo_pair_soft") {
      REQUIRE(row.p_vs_std.has_value());
      CHECK(*row.p_vs_std == doctest::Approx(0.25));  // all-positive, n = 3
    }
  }

  // Remove one cell: the report still runs and marks the directory partial.
  fs::remove(cell_csv_path(tmp.path, "adversarial_light", "std_hard", 1));
  const ReportResult partial = report_from_cells(tmp.path);
  CHECK_FALSE(partial.complete);
  for (const auto& row : partial.rows) {
    if (row.method == "std_hard") CHECK(row.n_seeds == 2);
  }

  // Aggregate CSV emission is byte-stable.
  write_aggregate_csv(tmp.path / "a.csv", full.rows);
  write_aggregate_csv(tmp.path / "b.csv", full.rows);
  std::ifstream a(tmp.path / "a.csv"), b(tmp.path / "b.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("scenario,method,", 0) == 0);
}

TEST_CASE("summary markdown marks winners and gaps") {
  std::vector<AggregateRow> rows;
  const auto add = [&](const std::string& m, double mean) {
    AggregateRow r;
    r.scenario = "heavy_noise_heavy";
    r.method = m;
    r.n_seeds = 10;
    r.mean = mean;
    r.stddev = 0.01;
    r.ci_lo = mean - 0.02;
    r.ci_hi = mean + 0.02;
    r.finals.assign(10, mean);
    rows.push_back(r);
  };
  add("std_soft", 0.43);
  add("std_hard", 0.431);
  add("adpo_pair_soft", 0.702);
  add("adpo_pair_hard", 0.770);
  add("adpo_list_kde_rank", 0.765);

  const std::string md = summary_markdown(rows);
  CHECK(md.find("**0.770**") != std::string::npos);       // best overall bold
  CHECK(md.find("0.765 (KR)") != std::string::npos);      // listwise tag
  CHECK(md.find("| Heavy Noise | Heavy |") != std::string::npos);
  CHECK(md.find("—") != std::string::npos);  // missing raw/kde variants gap

  // Missing std columns produce a gap marker in the improvement column.
  std::vector<AggregateRow> no_std(rows.begin() + 2, rows.end());
  const std::string md2 = summary_markdown(no_std);
  CHECK(md2.find("| — |") != std::string::npos);
}

TEST_CASE("manifest carries config hash, version, and aborted cells") {
  TempDir tmp;
  const ExperimentConfig cfg = parse_config_text(R"({"seeds": [0]})");
  write_manifest(tmp.path / "manifest.json", cfg, 1234.5, 96,
                 {{"clean", "std_soft", 0, "boom"}});
  std::ifstream in(tmp.path / "manifest.json");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  CHECK(text.find("config_hash") != std::string::npos);
  CHECK(text.find(kVersion) != std::string::npos);
  CHECK(text.find("boom") != std::string::npos);
  CHECK(text.find("\"cells\": 96") != std::string::npos);
}
