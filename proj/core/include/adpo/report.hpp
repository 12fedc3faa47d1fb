#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "adpo/config.hpp"
#include "adpo/geometry.hpp"
#include "adpo/runner.hpp"

namespace adpo {

inline constexpr const char* kVersion = "0.1.0";

// Per-cell trajectory file, one row per epoch:
//   epoch,winmass,loss,kl_to_anchor
// All floats are written with round-trip (%.17g) precision so downstream
// recomputation is exact.
void write_cell_csv(const std::filesystem::path& path, const RunResult& result);
RunResult load_cell_csv(const std::filesystem::path& path,
                        const std::string& scenario, const std::string& method,
                        std::uint64_t seed);

std::filesystem::path cell_csv_path(const std::filesystem::path& results_dir,
                                    const std::string& scenario,
                                    const std::string& method,
                                    std::uint64_t seed);

void write_aggregate_csv(const std::filesystem::path& path,
                         const std::vector<AggregateRow>& rows);

// Markdown summary mirroring the paper's main-results layout: one row per
// scenario, pairwise columns plus the best listwise variant, bold for the
// best method, underline for the best pairwise method.
std::string summary_markdown(const std::vector<AggregateRow>& rows);

std::string anchor_comparison_markdown(const std::vector<AnchorComparisonRow>& rows);
std::string scale_markdown(const std::vector<ScaleRow>& rows);
std::string temperature_markdown(const std::vector<TemperatureRow>& rows);
std::string distill_markdown(const std::vector<DistillRow>& rows);

void write_scale_csv(const std::filesystem::path& path,
                     const std::vector<ScaleRow>& rows);
void write_temperature_csv(const std::filesystem::path& path,
                           const std::vector<TemperatureRow>& rows);
void write_anchor_comparison_csv(const std::filesystem::path& path,
                                 const std::vector<AnchorComparisonRow>& rows);
void write_distill_csv(const std::filesystem::path& path,
                       const std::vector<DistillRow>& rows);
void write_geometry_csv(const std::filesystem::path& path,
                        const std::vector<GeometryProbeRow>& rows);

struct AbortedCell {
  std::string scenario;
  std::string method;
  std::uint64_t seed = 0;
  std::string reason;
};

void write_manifest(const std::filesystem::path& path,
                    const ExperimentConfig& config, double wall_ms,
                    std::size_t cells, const std::vector<AbortedCell>& aborted);

// Regenerates aggregate statistics from the per-cell CSVs under
// results_dir/<scenario>/<method>/seed<k>.csv without re-running training.
// Missing cells surface as gaps; `complete` reports whether every
// (scenario, method) pair shares the same seed set.
struct ReportResult {
  std::vector<AggregateRow> rows;
  bool complete = true;
};
ReportResult report_from_cells(const std::filesystem::path& results_dir);

std::string format_g17(double v);

}  // namespace adpo
