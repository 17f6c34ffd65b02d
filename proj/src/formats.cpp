#include "distill/formats.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "distill/embedding_file.hpp"
#include "distill/errors.hpp"
#include "json.hpp"

namespace distill {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kReportFormat = "distill-report-v1";
constexpr const char* kSelectionFormat = "distill-selection-v1";
constexpr const char* kPlusMinus = "\xC2\xB1";  // U+00B1

Json parse_json(const std::string& text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

Json config_json(const SelectionConfig& cfg, bool round) {
  const ObjectiveWeights w = effective_weights(cfg);
  auto num = [&](double v) { return round ? round_sig6(v) : v; };
  Json j;
  j["method"] = std::string(method_name(cfg.method));
  j["vpc"] = cfg.vpc;
  j["lambda_d"] = num(w.lambda_d);
  j["lambda_r"] = num(w.lambda_r);
  j["pca_dims"] = cfg.pca_dims;
  j["birch_threshold_scale"] = num(cfg.birch_threshold_scale);
  j["birch_branching"] = cfg.birch_branching;
  j["master_seed"] = cfg.master_seed;
  j["local_search_max_sweeps"] = cfg.local_search_max_sweeps;
  return j;
}

SelectionConfig config_from_json(const Json& j) {
  SelectionConfig cfg;
  cfg.method = parse_method(j.at("method").get<std::string>());
  cfg.vpc = j.at("vpc").get<std::size_t>();
  cfg.weights = ObjectiveWeights{j.at("lambda_d").get<double>(), j.at("lambda_r").get<double>()};
  cfg.pca_dims = j.at("pca_dims").get<std::size_t>();
  cfg.birch_threshold_scale = j.at("birch_threshold_scale").get<double>();
  cfg.birch_branching = j.at("birch_branching").get<std::size_t>();
  cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  cfg.local_search_max_sweeps = j.at("local_search_max_sweeps").get<std::size_t>();
  return cfg;
}

Json metrics_json(const Metrics& m) {
  Json j;
  j["acc"] = round_sig6(m.acc);
  j["macro_f1"] = round_sig6(m.macro_f1);
  j["macro_auc"] = round_sig6(m.macro_auc);
  return j;
}

Metrics metrics_from_json(const Json& j) {
  return Metrics{j.at("acc").get<double>(), j.at("macro_f1").get<double>(),
                 j.at("macro_auc").get<double>()};
}

}  // namespace

// ---------------------------------------------------------------- manifest

std::string render_manifest(const Manifest& m) {
  Json j;
  j["class_names"] = m.class_names;
  j["source"] = m.source;
  j["created"] = m.created;
  j["seed_lineage"] = m.seed_lineage;
  return j.dump(2) + "\n";
}

Manifest parse_manifest(const std::string& text) {
  const Json j = parse_json(text, "manifest");
  try {
    Manifest m;
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    m.source = j.value("source", std::string());
    m.created = j.value("created", std::string("unspecified"));
    if (j.contains("seed_lineage")) m.seed_lineage = j.at("seed_lineage").get<std::vector<std::uint64_t>>();
    return m;
  } catch (const Json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, render_manifest(m));
}

Manifest read_manifest(const std::filesystem::path& path) { return parse_manifest(read_text(path)); }

void check_manifest(const Manifest& m, const EmbeddingSet& set) {
  if (m.class_names.size() != set.num_classes) {
    throw DataError("manifest lists " + std::to_string(m.class_names.size()) +
                    " class names but the embedding file has C = " + std::to_string(set.num_classes));
  }
}

// ------------------------------------------------------------------ scores

std::string render_scores(const std::vector<double>& scores) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", i, scores[i]);
    out += buf;
  }
  return out;
}

std::vector<double> parse_scores(const std::string& text, std::size_t num_items) {
  std::vector<double> scores(num_items, 0.0);
  std::vector<bool> seen(num_items, false);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = "score file line " + std::to_string(line_no);
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(where + ": expected <index><TAB><score>");
    std::size_t index = 0;
    const char* first = line.data();
    auto [p1, e1] = std::from_chars(first, first + tab, index);
    if (e1 != std::errc() || p1 != first + tab) throw DataError(where + ": bad index");
    double value = 0.0;
    const char* vbeg = first + tab + 1;
    const char* vend = first + line.size();
    auto [p2, e2] = std::from_chars(vbeg, vend, value);
    if (e2 != std::errc() || p2 != vend) throw DataError(where + ": bad score");
    if (index >= num_items) throw DataError(where + ": index " + std::to_string(index) + " out of range");
    if (seen[index]) throw DataError(where + ": duplicate index " + std::to_string(index));
    if (!std::isfinite(value)) throw DataError(where + ": non-finite score");
    seen[index] = true;
    scores[index] = value;
  }
  return scores;
}

std::vector<double> read_scores(const std::filesystem::path& path, std::size_t num_items) {
  return parse_scores(read_text(path), num_items);
}

// ----------------------------------------------------------------- numbers

std::string format_sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double round_sig6(double v) { return std::strtod(format_sig6(v).c_str(), nullptr); }

std::string format_pm(const MetricSummary& s) {
  return format_sig6(s.mean) + kPlusMinus + format_sig6(s.std);
}

MetricSummary parse_pm(const std::string& text) {
  const std::size_t at = text.find(kPlusMinus);
  if (at == std::string::npos) throw DataError("expected mean\xC2\xB1std, got '" + text + "'");
  const std::string mean = text.substr(0, at);
  const std::string sd = text.substr(at + 2);
  char* end = nullptr;
  MetricSummary s;
  s.mean = std::strtod(mean.c_str(), &end);
  if (mean.empty() || *end != '\0') throw DataError("bad mean in '" + text + "'");
  s.std = std::strtod(sd.c_str(), &end);
  if (sd.empty() || *end != '\0') throw DataError("bad std in '" + text + "'");
  return s;
}

// --------------------------------------------------------------- selection

std::string render_selection(const SelectionConfig& cfg, const SelectionResult& result,
                             bool include_timings) {
  Json j;
  j["format"] = kSelectionFormat;
  j["config"] = config_json(cfg, false);
  j["total_selected"] = result.total_selected();
  Json classes = Json::array();
  for (const auto& [c, idx] : result.per_class) {
    Json entry;
    entry["class"] = c;
    entry["indices"] = idx;
    auto it = result.per_class_objective.find(c);
    entry["objective"] = it == result.per_class_objective.end() ? Json(nullptr) : number_or_null(it->second);
    if (include_timings) {
      auto t = result.wall_seconds.find(c);
      entry["wall_seconds"] = t == result.wall_seconds.end() ? 0.0 : t->second;
    }
    classes.push_back(std::move(entry));
  }
  j["classes"] = std::move(classes);
  return j.dump(2) + "\n";
}

SelectionResult parse_selection(const std::string& text) {
  const Json j = parse_json(text, "selection");
  try {
    if (j.at("format").get<std::string>() != kSelectionFormat) throw DataError("selection: unknown format");
    SelectionResult r;
    for (const Json& entry : j.at("classes")) {
      const auto c = entry.at("class").get<ClassId>();
      r.per_class[c] = entry.at("indices").get<std::vector<std::size_t>>();
      if (!r.per_class[c].empty()) r.per_class_objective[c] = number_from(entry.at("objective"));
      if (entry.contains("wall_seconds")) r.wall_seconds[c] = entry.at("wall_seconds").get<double>();
    }
    return r;
  } catch (const Json::exception& e) {
    throw DataError(std::string("selection: ") + e.what());
  }
}

// ------------------------------------------------------------------ report

std::string report_table_csv(const EvalReport& report) {
  std::string out = "run,metric,value\n";
  for (std::size_t r = 0; r < report.per_run.size(); ++r) {
    const Metrics& m = report.per_run[r].metrics;
    const std::pair<const char*, double> rows[] = {
        {"acc", m.acc}, {"macro_f1", m.macro_f1}, {"macro_auc", m.macro_auc}};
    for (const auto& [name, value] : rows) {
      out += std::to_string(r) + "," + name + "," + format_sig6(value) + "\n";
    }
  }
  return out;
}

std::string render_report(const EvalReport& report, const ReportOptions& opts) {
  Json j;
  j["format"] = kReportFormat;
  j["config"] = config_json(report.config, true);
  j["runs"] = report.runs;
  Json agg;
  agg["acc"] = format_pm(report.acc);
  agg["macro_f1"] = format_pm(report.macro_f1);
  agg["macro_auc"] = format_pm(report.macro_auc);
  j["aggregate"] = std::move(agg);
  j["full_pool"] = metrics_json(report.full_pool);

  Json runs = Json::array();
  for (std::size_t r = 0; r < report.per_run.size(); ++r) {
    const RunRecord& rec = report.per_run[r];
    Json run;
    run["run"] = r;
    run["seed"] = rec.seed;
    run["acc"] = round_sig6(rec.metrics.acc);
    run["macro_f1"] = round_sig6(rec.metrics.macro_f1);
    run["macro_auc"] = round_sig6(rec.metrics.macro_auc);
    run["auc_skipped"] = rec.auc_skipped;
    Json sel = Json::object();
    for (const auto& [c, idx] : rec.selection.per_class) sel[std::to_string(c)] = idx;
    run["selection"] = std::move(sel);
    if (opts.include_timings) {
      Json times = Json::object();
      for (const auto& [c, t] : rec.selection.wall_seconds) times[std::to_string(c)] = round_sig6(t);
      run["wall_seconds"] = std::move(times);
    }
    runs.push_back(std::move(run));
  }
  j["per_run"] = std::move(runs);
  j["table_csv"] = report_table_csv(report);
  return j.dump(2) + "\n";
}

EvalReport parse_report(const std::string& text) {
  const Json j = parse_json(text, "report");
  try {
    if (j.at("format").get<std::string>() != kReportFormat) throw DataError("report: unknown format");
    EvalReport rep;
    rep.config = config_from_json(j.at("config"));
    rep.runs = j.at("runs").get<std::size_t>();
    const Json& agg = j.at("aggregate");
    rep.acc = parse_pm(agg.at("acc").get<std::string>());
    rep.macro_f1 = parse_pm(agg.at("macro_f1").get<std::string>());
    rep.macro_auc = parse_pm(agg.at("macro_auc").get<std::string>());
    rep.full_pool = metrics_from_json(j.at("full_pool"));
    for (const Json& run : j.at("per_run")) {
      RunRecord rec;
      rec.seed = run.at("seed").get<std::uint64_t>();
      rec.metrics = metrics_from_json(run);
      rec.auc_skipped = run.at("auc_skipped").get<std::vector<ClassId>>();
      for (const auto& [key, idx] : run.at("selection").items()) {
        rec.selection.per_class[static_cast<ClassId>(std::stoul(key))] = idx.get<std::vector<std::size_t>>();
      }
      if (run.contains("wall_seconds")) {
        for (const auto& [key, t] : run.at("wall_seconds").items()) {
          rec.selection.wall_seconds[static_cast<ClassId>(std::stoul(key))] = t.get<double>();
        }
      }
      rep.per_run.push_back(std::move(rec));
    }
    if (rep.per_run.size() != rep.runs) throw DataError("report: run count does not match per_run");
    return rep;
  } catch (const Json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("report: ") + e.what());
  }
}

}  // namespace distill
