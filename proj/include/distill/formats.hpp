#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "distill/eval.hpp"
#include "distill/selection.hpp"

namespace distill {

// Sidecar document describing an embedding file (JSON).
struct Manifest {
  std::vector<std::string> class_names;
  std::string source;
  std::string created;  // ISO-8601 or "unspecified"
  std::vector<std::uint64_t> seed_lineage;

  bool operator==(const Manifest&) const = default;
};

std::string render_manifest(const Manifest& m);
Manifest parse_manifest(const std::string& text);
void write_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);
// Throws DataError when the class count disagrees with the embedding file.
void check_manifest(const Manifest& m, const EmbeddingSet& set);

// Score file: one "index<TAB>score" line per item; omitted indices score 0.
std::string render_scores(const std::vector<double>& scores);
std::vector<double> parse_scores(const std::string& text, std::size_t num_items);
std::vector<double> read_scores(const std::filesystem::path& path, std::size_t num_items);

// %.6g rendering used by every report number.
std::string format_sig6(double v);
double round_sig6(double v);
// "mean±std"
std::string format_pm(const MetricSummary& s);
MetricSummary parse_pm(const std::string& text);

// Selection output of the `select` command (JSON).
std::string render_selection(const SelectionConfig& cfg, const SelectionResult& result,
                             bool include_timings = false);
SelectionResult parse_selection(const std::string& text);

struct ReportOptions {
  bool include_timings = false;
};

// Evaluation report (JSON) with an embedded plot table.
std::string render_report(const EvalReport& report, const ReportOptions& opts = {});
EvalReport parse_report(const std::string& text);
// "run,metric,value" rows, one per run x metric.
std::string report_table_csv(const EvalReport& report);

}  // namespace distill
