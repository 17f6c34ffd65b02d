#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "distill/dataset.hpp"
#include "distill/linalg.hpp"
#include "distill/selection.hpp"

namespace distill {

struct CentroidModel {
  std::vector<Vector> centroids;  // one per class id
  double temperature = 1.0;

  std::size_t num_classes() const { return centroids.size(); }
};

// Class centroids of the given training items. Every class in [0, C) needs
// at least one item, otherwise EvalError names the class.
CentroidModel fit_centroids(const EmbeddingSet& train, double temperature = 1.0);

struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Softmax over classes of -|x - centroid_c| / temperature.
ScoreMatrix predict_scores(const CentroidModel& model, const EmbeddingSet& X);
// Row argmax, ties to the lowest class id.
std::vector<ClassId> predict_labels(const ScoreMatrix& scores);

double accuracy(std::span<const ClassId> pred, std::span<const ClassId> truth);
// Unweighted mean of per-class F1 over [0, num_classes); F1 is 0 when P+R=0.
double macro_f1(std::span<const ClassId> pred, std::span<const ClassId> truth,
                std::size_t num_classes);

// ROC-AUC from the Mann-Whitney rank statistic, ties counted 1/2.
// Requires at least one positive and one negative.
double binary_auc(std::span<const double> scores, std::span<const bool> positive);

struct MacroAuc {
  double value = 0.0;
  std::vector<ClassId> skipped;  // classes without both positives and negatives
};
MacroAuc macro_auc_ovr(const ScoreMatrix& scores, std::span<const ClassId> truth);

struct Metrics {
  double acc = 0.0;
  double macro_f1 = 0.0;
  double macro_auc = 0.0;
};

Metrics evaluate_model(const CentroidModel& model, const EmbeddingSet& test);

struct RunRecord {
  std::uint64_t seed = 0;
  Metrics metrics;
  std::vector<ClassId> auc_skipped;
  SelectionResult selection;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample std, divisor R-1; 0 for R = 1
};

struct EvalReport {
  SelectionConfig config;
  std::size_t runs = 0;
  std::vector<RunRecord> per_run;
  MetricSummary acc;
  MetricSummary macro_f1;
  MetricSummary macro_auc;
  Metrics full_pool;  // reference row: centroids of the entire pool
};

MetricSummary summarize(std::span<const double> values);

inline constexpr std::size_t kDefaultRuns = 5;

// For r in [0, runs): distill with master_seed + r, fit centroids on the
// selection, score the test set. Selection only ever sees `pool`.
EvalReport run_experiment(const EmbeddingSet& pool, const EmbeddingSet& test,
                          const SelectionConfig& cfg, std::size_t runs = kDefaultRuns,
                          std::optional<std::span<const double>> scores = std::nullopt,
                          std::size_t threads = 0);

}  // namespace distill
