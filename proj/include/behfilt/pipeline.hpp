#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "behfilt/classifiers/model.hpp"
#include "behfilt/data_model.hpp"
#include "behfilt/evaluation.hpp"
#include "behfilt/featurize.hpp"
#include "behfilt/outliers.hpp"
#include "behfilt/router.hpp"

namespace behfilt {

/// Independent sub-seed for a pipeline stage (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stage) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stage + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class Stage : std::uint64_t { Split = 1, Rfe = 2, Model = 3, CrossVal = 4 };

inline std::uint64_t stage_seed(std::uint64_t seed, Stage s) { return derive_seed(seed, static_cast<std::uint64_t>(s)); }

struct PreprocessResult {
  ImuRecording recording;
  OutlierReport outliers;
  RoutingStats routing;
};

/// Outlier cleaning followed by (possibly behavior-routed) filtering.
inline PreprocessResult preprocess(const ImuRecording& rec, const LabelTrack& track, const OutlierConfig& outlier,
                                   const FilterCombination& combo) {
  CleanResult cleaned = clean(rec, outlier);
  const SegmentPlan plan = plan_segments(cleaned.recording, track);
  RoutingStats routing;
  ImuRecording filtered = apply_combination(cleaned.recording, plan, combo, rec.sample_rate_hz(), &routing);
  return {std::move(filtered), cleaned.report, routing};
}

struct HoldoutOptions {
  double train_fraction = 0.7;
  bool stratified = true;
  RfeParams rfe;      // skipped when the matrix already has at most target_count columns
  bool scale = true;
};

/// Train/test matrices after selection and scaling, both fit on the
/// training rows only.
struct PreparedSplit {
  Split rows;
  std::vector<std::size_t> selected;
  ScalerParams scaler;
  FeatureMatrix train;
  FeatureMatrix test;
};

inline PreparedSplit prepare_holdout(const FeatureMatrix& data, const HoldoutOptions& opt, std::uint64_t seed) {
  PreparedSplit p;
  p.rows = split_holdout(data.labels, opt.train_fraction, opt.stratified, stage_seed(seed, Stage::Split));
  p.train = data.select_rows(p.rows.train);
  p.test = data.select_rows(p.rows.test);
  if (p.train.x.cols() > opt.rfe.target_count) {
    p.selected = rfe_select(p.train.x, p.train.labels, opt.rfe, stage_seed(seed, Stage::Rfe));
  } else {
    p.selected = ml::all_rows(p.train.x.cols());
  }
  p.train = p.train.select_cols(p.selected);
  p.test = p.test.select_cols(p.selected);
  if (opt.scale) {
    p.scaler = fit_minmax(p.train.x);
    p.train.x = apply_minmax(p.train.x, p.scaler);
    p.test.x = apply_minmax(p.test.x, p.scaler);
  }
  return p;
}

struct HoldoutResult {
  ml::TrainedModel model;
  EvalReport report;
};

inline HoldoutResult evaluate_holdout(const ml::ModelKind& kind, const PreparedSplit& split,
                                      std::span<const int> classes, std::uint64_t seed) {
  HoldoutResult r;
  r.model = ml::train(kind, split.train.x, split.train.labels, stage_seed(seed, Stage::Model));
  r.report = compute_metrics(split.test.labels, ml::predict(r.model, split.test.x), classes);
  return r;
}

struct Dataset {
  ImuRecording recording;
  LabelTrack labels;
};

struct CompareRow {
  std::string label;
  std::string spec;
  double drop_rate_pct = 0.0;
  std::vector<EvalReport> per_model;  // in model order
};

struct CompareResult {
  std::vector<std::string> model_labels;
  std::vector<CompareRow> rows;  // in filter order
};

/// Each filter combination: preprocess every dataset, featurize, pool the
/// windows, one shared split/RFE/scaling, then every model on it.
inline CompareResult run_compare(const std::vector<Dataset>& datasets, const std::vector<FilterCombination>& combos,
                                 const std::vector<ml::ModelKind>& kinds, const OutlierConfig& outlier,
                                 const WindowSpec& window, const HoldoutOptions& opt, std::uint64_t seed) {
  require(!datasets.empty(), ErrorCode::InvalidConfig, "compare needs at least one dataset");
  require(!combos.empty() && !kinds.empty(), ErrorCode::InvalidConfig, "compare needs at least one filter and one model");
  CompareResult result;
  for (const auto& k : kinds) result.model_labels.emplace_back(ml::model_label(k));
  for (const FilterCombination& combo : combos) {
    std::vector<FeatureMatrix> parts;
    std::size_t flagged = 0;
    std::size_t total = 0;
    for (const Dataset& d : datasets) {
      const PreprocessResult pre = preprocess(d.recording, d.labels, outlier, combo);
      flagged += pre.outliers.flagged_samples;
      total += pre.outliers.total_samples;
      parts.push_back(featurize(pre.recording, d.labels, window));
    }
    const FeatureMatrix data = concat(parts);
    const std::vector<int> classes = sorted_classes(data.labels);
    const PreparedSplit split = prepare_holdout(data, opt, seed);
    CompareRow row{combo.label(), combo.to_spec(),
                   total == 0 ? 0.0 : 100.0 * static_cast<double>(flagged) / static_cast<double>(total), {}};
    for (const auto& kind : kinds) {
      EvalReport rep = evaluate_holdout(kind, split, classes, seed).report;
      rep.drop_rate_pct = row.drop_rate_pct;
      row.per_model.push_back(std::move(rep));
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

/// Accuracy grid: one row per filter, one column per model, plus the row
/// average.
inline std::string format_compare_grid(const CompareResult& r, const std::string& config_hash) {
  std::string out = "filter";
  for (const auto& m : r.model_labels) out += "," + m;
  out += ",Average\n";
  for (const CompareRow& row : r.rows) {
    out += row.label;
    double sum = 0.0;
    for (const EvalReport& e : row.per_model) {
      out += "," + csv::format_double(e.accuracy);
      sum += e.accuracy;
    }
    out += "," + csv::format_double(sum / static_cast<double>(row.per_model.size())) + "\n";
  }
  out += "config_hash," + config_hash + "\n";
  return out;
}

/// Weighted precision, recall and F1 per filter, averaged over models.
inline std::string format_compare_metrics(const CompareResult& r, const std::string& config_hash) {
  std::string out = "filter,precision,recall,f1,drop_rate_pct\n";
  for (const CompareRow& row : r.rows) {
    double p = 0.0, rc = 0.0, f = 0.0;
    for (const EvalReport& e : row.per_model) {
      p += e.precision;
      rc += e.recall;
      f += e.f1;
    }
    const double m = static_cast<double>(row.per_model.size());
    out += row.label + "," + csv::format_double(p / m) + "," + csv::format_double(rc / m) + "," +
           csv::format_double(f / m) + "," + csv::format_double(row.drop_rate_pct) + "\n";
  }
  out += "config_hash," + config_hash + ",,,\n";
  return out;
}

}  // namespace behfilt
