#include "distill/cli.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "distill/datagen.hpp"
#include "distill/embedding_file.hpp"
#include "distill/errors.hpp"
#include "distill/eval.hpp"
#include "distill/formats.hpp"
#include "distill/selection.hpp"
#include "json.hpp"

namespace distill {

namespace fs = std::filesystem;

namespace {

// "pool.emb" -> "pool<suffix>"
fs::path sibling_path(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

std::string creation_stamp() {
  const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
  if (epoch == nullptr || *epoch == '\0') return "unspecified";
  char* end = nullptr;
  const long long secs = std::strtoll(epoch, &end, 10);
  if (*end != '\0') return "unspecified";
  const std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

BenchmarkSpec spec_from_file(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("benchmark spec '" + path.string() + "': " + e.what());
  }
  BenchmarkSpec s;
  try {
    s.classes = j.value("classes", s.classes);
    s.per_class = j.value("per_class", s.per_class);
    s.dim = j.value("dim", s.dim);
    s.modes_per_class = j.value("modes_per_class", s.modes_per_class);
    s.class_separation = j.value("class_separation", s.class_separation);
    s.mode_spread = j.value("mode_spread", s.mode_spread);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.test_per_class = j.value("test_per_class", s.test_per_class);
    s.seed = j.value("seed", s.seed);
    if (j.contains("test_seed")) s.test_seed = j.at("test_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("benchmark spec '" + path.string() + "': " + e.what());
  }
  return s;
}

// Selection flags shared by `select` and `eval`.
struct SelectionFlags {
  std::string method;
  std::size_t vpc = 0;
  std::string scores;
  double lambda_div = 0.0;
  double lambda_rep = 0.0;
  SelectionConfig defaults;
  std::uint64_t seed = 0;
  std::string manifest;
  CLI::Option* lambda_div_opt = nullptr;
  CLI::Option* lambda_rep_opt = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--method", method, "random | top_score | knapsack | tacdt | greedy_objective | kmeans_mmd")
        ->required();
    cmd->add_option("--vpc", vpc, "items selected per class")->required();
    cmd->add_option("--scores", scores, "score file (required by top_score and knapsack)");
    lambda_div_opt = cmd->add_option("--lambda-div", lambda_div, "diversity weight");
    lambda_rep_opt = cmd->add_option("--lambda-rep", lambda_rep, "representativeness weight");
    cmd->add_option("--pca-dims", defaults.pca_dims, "PCA dimensions for tacdt")->capture_default_str();
    cmd->add_option("--birch-threshold-scale", defaults.birch_threshold_scale,
                    "CF-tree threshold as a fraction of the median pairwise distance")
        ->capture_default_str();
    cmd->add_option("--birch-branching", defaults.birch_branching, "CF-tree branching factor")
        ->capture_default_str();
    cmd->add_option("--local-search-sweeps", defaults.local_search_max_sweeps,
                    "maximum swap-search sweeps")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "master seed")->required();
    cmd->add_option("--manifest", manifest, "manifest to check against the data file");
  }

  // Everything that can be checked without touching the data.
  SelectionConfig config() const {
    SelectionConfig cfg = defaults;
    cfg.method = parse_method(method);
    cfg.vpc = vpc;
    cfg.master_seed = seed;
    if (lambda_div_opt->count() > 0 || lambda_rep_opt->count() > 0) {
      ObjectiveWeights w = default_weights(vpc);
      if (lambda_div_opt->count() > 0) w.lambda_d = lambda_div;
      if (lambda_rep_opt->count() > 0) w.lambda_r = lambda_rep;
      cfg.weights = w;
    }
    cfg.validate();
    if (method_needs_scores(cfg.method) && scores.empty()) {
      throw ConfigError("--method " + method + " requires --scores");
    }
    return cfg;
  }
};

EmbeddingSet load_data(const std::string& path, const std::string& manifest) {
  EmbeddingSet set = read_embeddings(path);
  if (!manifest.empty()) check_manifest(read_manifest(manifest), set);
  return set;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Per-class subset selection and evaluation over embedding files", "distill"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic benchmark (train pool + test set)");
  std::string gen_spec;
  BenchmarkSpec flags;
  std::uint64_t test_seed = 0;
  std::string gen_out, gen_test_out;
  gen->add_option("--spec", gen_spec, "benchmark spec (JSON); individual flags override it");
  auto* o_classes = gen->add_option("--classes", flags.classes);
  auto* o_per_class = gen->add_option("--per-class", flags.per_class);
  auto* o_dim = gen->add_option("--dim", flags.dim);
  auto* o_modes = gen->add_option("--modes", flags.modes_per_class);
  auto* o_sep = gen->add_option("--separation", flags.class_separation);
  auto* o_spread = gen->add_option("--spread", flags.mode_spread);
  auto* o_noise = gen->add_option("--noise", flags.noise_sigma);
  auto* o_test_pc = gen->add_option("--test-per-class", flags.test_per_class);
  auto* o_seed = gen->add_option("--seed", flags.seed);
  auto* o_test_seed = gen->add_option("--test-seed", test_seed);
  gen->add_option("--out", gen_out, "train pool output")->required();
  gen->add_option("--test-out", gen_test_out, "test set output (default <stem>.test.emb)");

  // select
  auto* sel = app.add_subcommand("select", "select items per class");
  SelectionFlags sel_flags;
  sel_flags.attach(sel);
  std::string sel_data, sel_out;
  bool sel_timings = false;
  sel->add_option("--data", sel_data, "embedding file")->required();
  sel->add_option("--out", sel_out, "selection output")->required();
  sel->add_flag("--timings", sel_timings, "record per-class wall times");

  // eval
  auto* ev = app.add_subcommand("eval", "repeated select + nearest-centroid evaluation");
  SelectionFlags ev_flags;
  ev_flags.attach(ev);
  std::string ev_data, ev_test, ev_out, ev_csv;
  std::size_t ev_runs = kDefaultRuns;
  bool ev_timings = false;
  ev->add_option("--data", ev_data, "train pool embedding file")->required();
  ev->add_option("--test", ev_test, "test embedding file")->required();
  ev->add_option("--runs", ev_runs, "repetitions")->capture_default_str();
  ev->add_option("--out", ev_out, "report output")->required();
  ev->add_option("--csv", ev_csv, "also write the per-run table");
  ev->add_flag("--timings", ev_timings, "record per-class wall times");

  // report
  auto* rep = app.add_subcommand("report", "re-emit the per-run table of a report");
  std::string rep_in, rep_csv;
  rep->add_option("--in", rep_in, "report file")->required();
  rep->add_option("--csv", rep_csv, "table output (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*gen) {
      BenchmarkSpec spec = gen_spec.empty() ? BenchmarkSpec{} : spec_from_file(gen_spec);
      if (o_classes->count()) spec.classes = flags.classes;
      if (o_per_class->count()) spec.per_class = flags.per_class;
      if (o_dim->count()) spec.dim = flags.dim;
      if (o_modes->count()) spec.modes_per_class = flags.modes_per_class;
      if (o_sep->count()) spec.class_separation = flags.class_separation;
      if (o_spread->count()) spec.mode_spread = flags.mode_spread;
      if (o_noise->count()) spec.noise_sigma = flags.noise_sigma;
      if (o_test_pc->count()) spec.test_per_class = flags.test_per_class;
      if (o_seed->count()) spec.seed = flags.seed;
      if (o_test_seed->count()) spec.test_seed = test_seed;
      spec.validate();

      const Benchmark bench = gen_benchmark(spec);
      const fs::path out = gen_out;
      const fs::path test_out = gen_test_out.empty() ? sibling_path(out, ".test.emb") : fs::path(gen_test_out);
      write_embeddings(bench.train, out);
      write_embeddings(bench.test, test_out);

      Manifest m;
      for (std::uint32_t c = 0; c < spec.classes; ++c) {
        char name[32];
        std::snprintf(name, sizeof name, "class_%03u", c);
        m.class_names.emplace_back(name);
      }
      m.source = "synthetic gaussian-mixture benchmark";
      m.created = creation_stamp();
      m.seed_lineage = {spec.seed, spec.test_seed.value_or(spec.seed)};
      write_manifest(m, sibling_path(out, ".manifest.json"));
      return kExitOk;
    }

    if (*sel) {
      const SelectionConfig cfg = sel_flags.config();
      const EmbeddingSet data = load_data(sel_data, sel_flags.manifest);
      std::optional<std::vector<double>> scores;
      if (!sel_flags.scores.empty()) scores = read_scores(sel_flags.scores, data.size());
      std::optional<std::span<const double>> score_view;
      if (scores) score_view = std::span<const double>(*scores);
      const SelectionResult result = distill(data, cfg, score_view);
      write_file_atomic(sel_out, render_selection(cfg, result, sel_timings));
      return kExitOk;
    }

    if (*ev) {
      const SelectionConfig cfg = ev_flags.config();
      if (ev_runs < 1) throw ConfigError("--runs must be >= 1");
      const EmbeddingSet pool = load_data(ev_data, ev_flags.manifest);
      const EmbeddingSet test = read_embeddings(ev_test);
      std::optional<std::vector<double>> scores;
      if (!ev_flags.scores.empty()) scores = read_scores(ev_flags.scores, pool.size());
      std::optional<std::span<const double>> score_view;
      if (scores) score_view = std::span<const double>(*scores);
      const EvalReport report = run_experiment(pool, test, cfg, ev_runs, score_view);
      write_file_atomic(ev_out, render_report(report, ReportOptions{ev_timings}));
      if (!ev_csv.empty()) write_file_atomic(ev_csv, report_table_csv(report));
      return kExitOk;
    }

    if (*rep) {
      const auto bytes = read_file_bytes(rep_in);
      const EvalReport report = parse_report(std::string(bytes.begin(), bytes.end()));
      const std::string table = report_table_csv(report);
      if (rep_csv.empty()) {
        std::cout << table;
      } else {
        write_file_atomic(rep_csv, table);
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace distill
