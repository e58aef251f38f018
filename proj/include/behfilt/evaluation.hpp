#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "behfilt/classifiers/model.hpp"
#include "behfilt/csv.hpp"
#include "behfilt/data_model.hpp"
#include "behfilt/error.hpp"
#include "behfilt/featurize.hpp"
#include "behfilt/rng.hpp"

namespace behfilt {

struct ClassMetrics {
  int label = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// counts[t][p]: rows of true class t predicted as p, in `classes` order.
struct ConfusionMatrix {
  std::vector<int> classes;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& row : counts) {
      for (std::size_t c : row) n += c;
    }
    return n;
  }
};

/// Support-weighted averages plus the per-class table.
struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  ConfusionMatrix confusion;
  std::optional<double> drop_rate_pct;
};

inline EvalReport compute_metrics(std::span<const int> y_true, std::span<const int> y_pred, std::span<const int> classes) {
  require(y_true.size() == y_pred.size(), ErrorCode::LengthMismatch,
          "y_true has " + std::to_string(y_true.size()) + " labels, y_pred has " + std::to_string(y_pred.size()));
  const std::size_t k = classes.size();
  std::map<int, std::size_t> index;
  for (std::size_t c = 0; c < k; ++c) index.emplace(classes[c], c);
  require(index.size() == k, ErrorCode::InvalidParameter, "class list has duplicates");
  const auto lookup = [&](int label) {
    const auto it = index.find(label);
    require(it != index.end(), ErrorCode::InvalidParameter, "label " + std::to_string(label) + " is not in the class list");
    return it->second;
  };

  EvalReport r;
  r.confusion.classes.assign(classes.begin(), classes.end());
  r.confusion.counts.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < y_true.size(); ++i) ++r.confusion.counts[lookup(y_true[i])][lookup(y_pred[i])];

  const double n = static_cast<double>(y_true.size());
  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t predicted = 0;
    std::size_t support = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += r.confusion.counts[o][c];
      support += r.confusion.counts[c][o];
    }
    const std::size_t tp = r.confusion.counts[c][c];
    correct += tp;
    ClassMetrics m{classes[c], 0.0, 0.0, 0.0, support};
    if (predicted > 0) m.precision = static_cast<double>(tp) / static_cast<double>(predicted);
    if (support > 0) m.recall = static_cast<double>(tp) / static_cast<double>(support);
    if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    r.per_class.push_back(m);
  }
  if (n > 0) {
    r.accuracy = static_cast<double>(correct) / n;
    for (const ClassMetrics& m : r.per_class) {
      const double w = static_cast<double>(m.support) / n;
      r.precision += w * m.precision;
      r.recall += w * m.recall;
      r.f1 += w * m.f1;
    }
  }
  return r;
}

inline std::vector<int> sorted_classes(std::span<const int> labels) {
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

// ---------------------------------------------------------------------------
// Splits.

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

namespace detail {

/// Row indices per class, classes ascending, rows ascending within a class.
inline std::vector<std::vector<std::size_t>> rows_by_class(std::span<const int> labels) {
  const std::vector<int> classes = sorted_classes(labels);
  std::vector<std::vector<std::size_t>> out(classes.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), labels[i]) - classes.begin())]
        .push_back(i);
  }
  return out;
}

}  // namespace detail

/// Stratified: each class keeps round(fraction * n_c) rows for training
/// (at least 1, and at least 1 left for testing). Index lists are sorted.
inline Split split_holdout(std::span<const int> labels, double train_fraction, bool stratified, std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, ErrorCode::InvalidParameter, "train fraction must be in (0, 1)");
  require(labels.size() >= 2, ErrorCode::ClassTooSmall, "holdout needs at least two rows");
  Rng rng(seed);
  Split s;
  const auto take = [&](std::vector<std::size_t> rows) {
    rng.shuffle(rows);
    const auto n = static_cast<double>(rows.size());
    auto n_train = static_cast<std::size_t>(std::round(train_fraction * n));
    n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
    s.train.insert(s.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.insert(s.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  };
  if (stratified) {
    for (auto& rows : detail::rows_by_class(labels)) {
      require(rows.size() >= 2, ErrorCode::ClassTooSmall,
              "class " + std::to_string(labels[rows.front()]) + " has fewer than 2 rows");
      take(std::move(rows));
    }
  } else {
    take(ml::all_rows(labels.size()));
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

/// Test-index lists of k folds. Each class is shuffled and dealt
/// round-robin, the dealing position carrying over from one class to the
/// next so fold totals stay balanced too.
inline std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k,
                                                              std::uint64_t seed) {
  require(k >= 2, ErrorCode::InvalidParameter, "k-fold needs k >= 2");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t position = 0;
  for (auto& rows : detail::rows_by_class(labels)) {
    require(rows.size() >= k, ErrorCode::ClassTooSmall,
            "class " + std::to_string(labels[rows.front()]) + " has " + std::to_string(rows.size()) +
                " rows, fewer than k=" + std::to_string(k));
    rng.shuffle(rows);
    for (std::size_t i : rows) folds[position++ % k].push_back(i);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

inline std::vector<std::size_t> complement(std::span<const std::size_t> subset, std::size_t n) {
  std::vector<bool> in(n, false);
  for (std::size_t i : subset) in[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation.

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

inline MeanStd mean_std(std::span<const double> v) {
  if (v.empty()) return {};
  return {stats::mean(v), stats::stddev(v)};
}

struct CvSummary {
  std::vector<EvalReport> folds;
  MeanStd accuracy;
  MeanStd precision;
  MeanStd recall;
  MeanStd f1;
};

inline CvSummary summarize(std::vector<EvalReport> folds) {
  CvSummary s;
  std::vector<double> a, p, r, f;
  for (const EvalReport& e : folds) {
    a.push_back(e.accuracy);
    p.push_back(e.precision);
    r.push_back(e.recall);
    f.push_back(e.f1);
  }
  s.accuracy = mean_std(a);
  s.precision = mean_std(p);
  s.recall = mean_std(r);
  s.f1 = mean_std(f);
  s.folds = std::move(folds);
  return s;
}

struct CvOptions {
  std::size_t k = 10;
  bool scale = true;                 // re-fit min-max scaling on each training fold
  std::optional<RfeParams> rfe;      // re-run feature selection on each training fold
};

/// Per fold: optional RFE and scaling fit on the training rows only,
/// train, evaluate on the held-out fold.
inline CvSummary cross_validate(const ml::ModelKind& kind, const FeatureMatrix& data, const CvOptions& opt,
                                std::uint64_t seed) {
  const std::vector<int> classes = sorted_classes(data.labels);
  const auto folds = stratified_kfold(data.labels, opt.k, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<EvalReport> reports;
  for (const auto& test_idx : folds) {
    const std::uint64_t fold_seed = rng.next();
    const std::vector<std::size_t> train_idx = complement(test_idx, data.rows());
    FeatureMatrix train = data.select_rows(train_idx);
    FeatureMatrix test = data.select_rows(test_idx);
    if (opt.rfe && train.x.cols() > opt.rfe->target_count) {
      const auto sel = rfe_select(train.x, train.labels, *opt.rfe, fold_seed);
      train = train.select_cols(sel);
      test = test.select_cols(sel);
    }
    if (opt.scale) {
      const ScalerParams sp = fit_minmax(train.x);
      train.x = apply_minmax(train.x, sp);
      test.x = apply_minmax(test.x, sp);
    }
    const ml::TrainedModel model = ml::train(kind, train.x, train.labels, fold_seed);
    reports.push_back(compute_metrics(test.labels, ml::predict(model, test.x), classes));
  }
  return summarize(std::move(reports));
}

// ---------------------------------------------------------------------------
// Report writers.

inline std::string class_name(int label) {
  if (label >= 0 && static_cast<std::size_t>(label) < kAllBehaviors.size()) {
    return std::string(to_string(static_cast<Behavior>(label)));
  }
  return std::to_string(label);
}

/// `metric,value` rows: weighted averages, then per-class values.
inline std::string format_report_csv(const EvalReport& r, const std::string& config_hash) {
  using csv::format_double;
  std::string out = "metric,value\n";
  out += "accuracy," + format_double(r.accuracy) + "\n";
  out += "precision_weighted," + format_double(r.precision) + "\n";
  out += "recall_weighted," + format_double(r.recall) + "\n";
  out += "f1_weighted," + format_double(r.f1) + "\n";
  out += "rows," + std::to_string(r.confusion.total()) + "\n";
  if (r.drop_rate_pct) out += "drop_rate_pct," + format_double(*r.drop_rate_pct) + "\n";
  for (const ClassMetrics& m : r.per_class) {
    const std::string name = class_name(m.label);
    out += "precision_" + name + "," + format_double(m.precision) + "\n";
    out += "recall_" + name + "," + format_double(m.recall) + "\n";
    out += "f1_" + name + "," + format_double(m.f1) + "\n";
    out += "support_" + name + "," + std::to_string(m.support) + "\n";
  }
  out += "config_hash," + config_hash + "\n";
  return out;
}

/// Grid with true classes as rows and predicted classes as columns.
inline std::string format_confusion_csv(const ConfusionMatrix& cm) {
  std::string out = "true\\pred";
  for (int c : cm.classes) out += "," + class_name(c);
  out += "\n";
  for (std::size_t t = 0; t < cm.classes.size(); ++t) {
    out += class_name(cm.classes[t]);
    for (std::size_t v : cm.counts[t]) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

namespace detail {

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

inline std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

}  // namespace detail

inline std::string format_report_text(const EvalReport& r) {
  using detail::pad;
  using detail::pct;
  std::string out;
  out += "accuracy  " + pct(r.accuracy) + " %\n";
  out += "precision " + pct(r.precision) + " %  (support-weighted)\n";
  out += "recall    " + pct(r.recall) + " %  (support-weighted)\n";
  out += "f1        " + pct(r.f1) + " %  (support-weighted)\n";
  if (r.drop_rate_pct) out += "drop rate " + csv::format_double(*r.drop_rate_pct) + " %\n";
  out += "\n" + pad("class", 12) + pad("precision", 11) + pad("recall", 9) + pad("f1", 9) + pad("support", 9) + "\n";
  for (const ClassMetrics& m : r.per_class) {
    out += pad(class_name(m.label), 12) + pad(pct(m.precision), 11) + pad(pct(m.recall), 9) + pad(pct(m.f1), 9) +
           pad(std::to_string(m.support), 9) + "\n";
  }
  out += "\nconfusion (rows: true, columns: predicted)\n" + pad("", 12);
  for (int c : r.confusion.classes) out += pad(class_name(c), 12);
  out += "\n";
  for (std::size_t t = 0; t < r.confusion.classes.size(); ++t) {
    out += pad(class_name(r.confusion.classes[t]), 12);
    for (std::size_t v : r.confusion.counts[t]) out += pad(std::to_string(v), 12);
    out += "\n";
  }
  return out;
}

/// Per-fold rows plus mean and population std.
inline std::string format_cv_csv(const CvSummary& s, const std::string& config_hash) {
  using csv::format_double;
  std::string out = "fold,accuracy,precision,recall,f1\n";
  for (std::size_t i = 0; i < s.folds.size(); ++i) {
    const EvalReport& e = s.folds[i];
    out += std::to_string(i + 1) + "," + format_double(e.accuracy) + "," + format_double(e.precision) + "," +
           format_double(e.recall) + "," + format_double(e.f1) + "\n";
  }
  out += "mean," + format_double(s.accuracy.mean) + "," + format_double(s.precision.mean) + "," +
         format_double(s.recall.mean) + "," + format_double(s.f1.mean) + "\n";
  out += "std_population," + format_double(s.accuracy.std) + "," + format_double(s.precision.std) + "," +
         format_double(s.recall.std) + "," + format_double(s.f1.std) + "\n";
  out += "config_hash," + config_hash + ",,,\n";
  return out;
}

}  // namespace behfilt
