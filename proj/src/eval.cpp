#include "distill/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

#include "distill/errors.hpp"

namespace distill {

CentroidModel fit_centroids(const EmbeddingSet& train, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DomainError("fit_centroids: temperature must be positive");
  }
  const auto by_class = train.indices_by_class();
  CentroidModel model;
  model.temperature = temperature;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].empty()) {
      throw EvalError("fit_centroids: class " + std::to_string(c) + " has no selected items");
    }
    // Sum rows in lexicographic order so the centroid does not depend on
    // the order of the training items.
    std::vector<std::span<const float>> rows;
    for (std::size_t i : by_class[c]) rows.push_back(train.row(i));
    std::sort(rows.begin(), rows.end(), [](std::span<const float> a, std::span<const float> b) {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
    Vector centroid(train.dim, 0.0);
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < r.size(); ++j) centroid[j] += r[j];
    }
    for (double& v : centroid) v /= static_cast<double>(rows.size());
    model.centroids.push_back(std::move(centroid));
  }
  return model;
}

ScoreMatrix predict_scores(const CentroidModel& model, const EmbeddingSet& X) {
  ScoreMatrix out;
  out.rows = X.size();
  out.cols = model.num_classes();
  out.values.resize(out.rows * out.cols);
  std::vector<double> logits(out.cols);
  for (std::size_t i = 0; i < out.rows; ++i) {
    const Vector x = X.vector(i);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < out.cols; ++c) {
      logits[c] = -l2_distance(x, model.centroids[c]) / model.temperature;
      top = std::max(top, logits[c]);
    }
    double z = 0.0;
    for (std::size_t c = 0; c < out.cols; ++c) {
      logits[c] = std::exp(logits[c] - top);
      z += logits[c];
    }
    for (std::size_t c = 0; c < out.cols; ++c) out.values[i * out.cols + c] = logits[c] / z;
  }
  return out;
}

std::vector<ClassId> predict_labels(const ScoreMatrix& scores) {
  std::vector<ClassId> out(scores.rows);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.cols; ++c) {
      if (scores.at(i, c) > scores.at(i, best)) best = c;
    }
    out[i] = static_cast<ClassId>(best);
  }
  return out;
}

double accuracy(std::span<const ClassId> pred, std::span<const ClassId> truth) {
  if (pred.size() != truth.size()) throw DomainError("accuracy: length mismatch");
  if (pred.empty()) throw DomainError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double macro_f1(std::span<const ClassId> pred, std::span<const ClassId> truth,
                std::size_t num_classes) {
  if (pred.size() != truth.size()) throw DomainError("macro_f1: length mismatch");
  if (pred.empty()) throw DomainError("macro_f1: empty input");
  if (num_classes == 0) throw DomainError("macro_f1: empty label universe");
  std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= num_classes || truth[i] >= num_classes) {
      throw DomainError("macro_f1: label outside the label universe");
    }
    if (pred[i] == truth[i]) {
      ++tp[pred[i]];
    } else {
      ++fp[pred[i]];
      ++fn[truth[i]];
    }
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double p = tp[c] + fp[c] > 0 ? static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]) : 0.0;
    const double r = tp[c] + fn[c] > 0 ? static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c]) : 0.0;
    if (p + r > 0.0) sum += 2.0 * p * r / (p + r);
  }
  return sum / static_cast<double>(num_classes);
}

double binary_auc(std::span<const double> scores, std::span<const bool> positive) {
  const std::size_t n = scores.size();
  if (positive.size() != n) throw DomainError("binary_auc: length mismatch");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average 1-based ranks over tie groups.
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && scores[order[hi]] == scores[order[lo]]) ++hi;
    const double rank = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t k = lo; k < hi; ++k) {
      if (positive[order[k]]) {
        pos_rank_sum += rank;
        ++n_pos;
      }
    }
    lo = hi;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DomainError("binary_auc: needs positives and negatives");
  const double dp = static_cast<double>(n_pos);
  const double u = pos_rank_sum - dp * (dp + 1.0) / 2.0;
  return u / (dp * static_cast<double>(n_neg));
}

MacroAuc macro_auc_ovr(const ScoreMatrix& scores, std::span<const ClassId> truth) {
  if (truth.size() != scores.rows) throw DomainError("macro_auc_ovr: length mismatch");
  MacroAuc out;
  double sum = 0.0;
  std::size_t used = 0;
  std::vector<double> column(scores.rows);
  std::unique_ptr<bool[]> positive(new bool[scores.rows]);
  for (std::size_t c = 0; c < scores.cols; ++c) {
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < scores.rows; ++i) {
      column[i] = scores.at(i, c);
      positive[i] = truth[i] == c;
      n_pos += positive[i] ? 1 : 0;
    }
    if (n_pos == 0 || n_pos == scores.rows) {
      out.skipped.push_back(static_cast<ClassId>(c));
      continue;
    }
    sum += binary_auc(column, std::span<const bool>(positive.get(), scores.rows));
    ++used;
  }
  if (used == 0) throw EvalError("macro_auc_ovr: every class lacks positives or negatives");
  out.value = sum / static_cast<double>(used);
  return out;
}

Metrics evaluate_model(const CentroidModel& model, const EmbeddingSet& test) {
  const ScoreMatrix scores = predict_scores(model, test);
  const std::vector<ClassId> pred = predict_labels(scores);
  Metrics m;
  m.acc = accuracy(pred, test.labels);
  m.macro_f1 = macro_f1(pred, test.labels, model.num_classes());
  m.macro_auc = macro_auc_ovr(scores, test.labels).value;
  return m;
}

MetricSummary summarize(std::span<const double> values) {
  if (values.empty()) throw DomainError("summarize: no values");
  MetricSummary s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  // Identical runs report exactly zero spread rather than rounding residue.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    s.mean = values.front();
    return s;
  }
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

EvalReport run_experiment(const EmbeddingSet& pool, const EmbeddingSet& test,
                          const SelectionConfig& cfg, std::size_t runs,
                          std::optional<std::span<const double>> scores, std::size_t threads) {
  if (runs < 1) throw ConfigError("run count must be >= 1");
  if (pool.num_classes != test.num_classes) {
    throw DataError("pool has " + std::to_string(pool.num_classes) + " classes, test set has " +
                    std::to_string(test.num_classes));
  }
  if (pool.dim != test.dim) throw DataError("pool and test set differ in dimension");
  if (test.size() == 0) throw DataError("empty test set");
  test.validate();

  EvalReport report;
  report.config = cfg;
  report.runs = runs;
  for (std::size_t r = 0; r < runs; ++r) {
    SelectionConfig run_cfg = cfg;
    run_cfg.master_seed = cfg.master_seed + r;
    RunRecord rec;
    rec.seed = run_cfg.master_seed;
    rec.selection = distill(pool, run_cfg, scores, threads);

    std::vector<std::size_t> chosen;
    for (const auto& [c, idx] : rec.selection.per_class) chosen.insert(chosen.end(), idx.begin(), idx.end());
    const CentroidModel model = fit_centroids(pool.subset(chosen));
    const ScoreMatrix s = predict_scores(model, test);
    const std::vector<ClassId> pred = predict_labels(s);
    rec.metrics.acc = accuracy(pred, test.labels);
    rec.metrics.macro_f1 = macro_f1(pred, test.labels, model.num_classes());
    const MacroAuc auc = macro_auc_ovr(s, test.labels);
    rec.metrics.macro_auc = auc.value;
    rec.auc_skipped = auc.skipped;
    report.per_run.push_back(std::move(rec));
  }

  std::vector<double> acc, f1, auc;
  for (const RunRecord& rec : report.per_run) {
    acc.push_back(rec.metrics.acc);
    f1.push_back(rec.metrics.macro_f1);
    auc.push_back(rec.metrics.macro_auc);
  }
  report.acc = summarize(acc);
  report.macro_f1 = summarize(f1);
  report.macro_auc = summarize(auc);
  report.full_pool = evaluate_model(fit_centroids(pool), test);
  return report;
}

}  // namespace distill
