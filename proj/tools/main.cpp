#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "behfilt/behfilt.hpp"

namespace fs = std::filesystem;
using namespace behfilt;

namespace {

/// Flags that override the config file. Unset flags keep the file value.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> sample_rate_hz;
  std::optional<double> window_length_s;
  std::optional<double> window_overlap;
  std::optional<double> window_purity;
  std::optional<std::string> outlier;
  std::optional<double> iqr_k;
  std::optional<std::size_t> hampel_window;
  std::optional<double> hampel_nsig;
  std::optional<std::string> filter_mode;
  std::vector<std::string> filters;
  std::vector<std::string> models;
  std::optional<double> train_fraction;
  std::optional<std::size_t> cv_folds;
  std::optional<std::size_t> rfe_target;
  bool rfe_per_fold = false;
  std::optional<double> synth_duration_s;
  std::optional<double> synth_spike_rate;
  std::optional<double> synth_noise_active;
  std::optional<double> synth_noise_inactive;
  std::optional<double> synth_tremor;
};

template <class T>
void apply(const std::optional<T>& v, T& target) {
  if (v) target = *v;
}

RunConfig resolve(const std::string& config_path, const Overrides& o) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = parse_run_config(csv::read_file(config_path), cfg, config_path);
  apply(o.seed, cfg.seed);
  apply(o.sample_rate_hz, cfg.sample_rate_hz);
  apply(o.window_length_s, cfg.window.length_s);
  apply(o.window_overlap, cfg.window.overlap_fraction);
  apply(o.window_purity, cfg.window.purity_threshold);
  if (o.outlier) cfg.outlier.method = parse_outlier_method(*o.outlier);
  apply(o.iqr_k, cfg.outlier.iqr_k);
  apply(o.hampel_window, cfg.outlier.hampel_half_window);
  apply(o.hampel_nsig, cfg.outlier.hampel_n_sigmas);
  apply(o.filter_mode, cfg.filter_mode);
  if (!o.filters.empty()) cfg.filters = o.filters;
  if (!o.models.empty()) cfg.models = o.models;
  apply(o.train_fraction, cfg.train_fraction);
  apply(o.cv_folds, cfg.cv_folds);
  apply(o.rfe_target, cfg.rfe_target);
  if (o.rfe_per_fold) cfg.rfe_per_fold = true;
  apply(o.synth_duration_s, cfg.synth_duration_s);
  apply(o.synth_spike_rate, cfg.synth_spike_rate);
  apply(o.synth_noise_active, cfg.synth_noise_active);
  apply(o.synth_noise_inactive, cfg.synth_noise_inactive);
  apply(o.synth_tremor, cfg.synth_tremor);
  cfg.outlier.validate();
  return cfg;
}

class Output {
 public:
  Output(fs::path dir, const RunConfig& cfg) : dir_(std::move(dir)), hash_(config_hash(cfg)), cfg_text_(to_text(cfg)) {
    fs::create_directories(dir_);
  }

  const std::string& hash() const { return hash_; }

  void write(const std::string& name, const std::string& contents) const {
    csv::write_file((dir_ / name).string(), contents);
  }

  void manifest(const std::string& command) const {
    write(command + "_run.cfg", "# behfilt " + command + "\n# config_hash = " + hash_ + "\n" + cfg_text_);
  }

 private:
  fs::path dir_;
  std::string hash_;
  std::string cfg_text_;
};

std::vector<ml::ModelKind> model_kinds(const RunConfig& cfg, const std::vector<std::string>& fallback) {
  std::vector<ml::ModelKind> kinds;
  for (const auto& m : cfg.models.empty() ? fallback : cfg.models) kinds.push_back(ml::parse_model_kind(m));
  return kinds;
}

RfeParams rfe_params(const RunConfig& cfg) {
  RfeParams p;
  p.target_count = cfg.rfe_target;
  return p;
}

HoldoutOptions holdout_options(const RunConfig& cfg) {
  HoldoutOptions o;
  o.train_fraction = cfg.train_fraction;
  o.stratified = cfg.stratified;
  o.rfe = rfe_params(cfg);
  return o;
}

void cmd_synth(const RunConfig& cfg, const Output& out) {
  SynthConfig sc;
  sc.fs_hz = cfg.sample_rate_hz;
  sc.seed = cfg.seed;
  sc.schedule = random_schedule(cfg.synth_duration_s, derive_seed(cfg.seed, 0));
  sc.spike_rate = cfg.synth_spike_rate;
  sc.noise_sigma_active = cfg.synth_noise_active;
  sc.noise_sigma_inactive = cfg.synth_noise_inactive;
  sc.tremor_amplitude = cfg.synth_tremor;
  const SynthTruth t = generate(sc);
  out.write("recording.csv", format_recording(t.noisy));
  out.write("clean.csv", format_recording(t.clean));
  out.write("labels.csv", format_labels(t.labels));
  out.write("spikes.csv", format_spikes(t.spikes));
  out.manifest("synth");
}

void cmd_preprocess(const RunConfig& cfg, const Output& out, const std::string& rec_path,
                    const std::string& labels_path) {
  const FilterCombination combo = parse_combination(cfg.filter_mode);
  const PreprocessResult r =
      preprocess(load_recording(rec_path, cfg.sample_rate_hz), load_labels(labels_path), cfg.outlier, combo);
  out.write("preprocessed.csv", format_recording(r.recording));
  std::string report = format_outlier_report(r.outliers, cfg.outlier);
  report += "filter_mode," + combo.to_spec() + "\n";
  report += "filtered_segments," + std::to_string(r.routing.filtered_segments) + "\n";
  report += "passthrough_segments," + std::to_string(r.routing.passthrough_segments) + "\n";
  report += "config_hash," + out.hash() + "\n";
  out.write("preprocess_report.csv", report);
  out.manifest("preprocess");
}

void cmd_featurize(const RunConfig& cfg, const Output& out, const std::string& rec_path,
                   const std::string& labels_path) {
  const FeatureMatrix fm =
      featurize(load_recording(rec_path, cfg.sample_rate_hz), load_labels(labels_path), cfg.window);
  out.write("features.csv", format_features(fm));
  out.manifest("featurize");
}

void cmd_select(const RunConfig& cfg, const Output& out, const std::string& features_path) {
  const FeatureMatrix fm = load_features(features_path);
  const auto selected = rfe_select(fm.x, fm.labels, rfe_params(cfg), stage_seed(cfg.seed, Stage::Rfe));
  out.write("selection.csv", format_selection(selected, fm.names));
  out.manifest("select");
}

void cmd_train(const RunConfig& cfg, const Output& out, const std::string& features_path) {
  const FeatureMatrix fm = load_features(features_path);
  const auto kinds = model_kinds(cfg, {"rf"});
  require(kinds.size() == 1, ErrorCode::InvalidConfig, "train takes exactly one --model");
  const PreparedSplit split = prepare_holdout(fm, holdout_options(cfg), cfg.seed);
  const HoldoutResult r = evaluate_holdout(kinds.front(), split, sorted_classes(fm.labels), cfg.seed);
  out.write("model.json", ml::model_to_json(r.model).dump(1) + "\n");
  out.write("scaler.csv", format_scaler(split.scaler));
  out.write("selection.csv", format_selection(split.selected, fm.names));
  out.write("test_features.csv", format_features(fm.select_rows(split.rows.test)));
  out.write("train_report.csv", format_report_csv(r.report, out.hash()));
  out.manifest("train");
}

void cmd_evaluate(const RunConfig& cfg, const Output& out, const std::string& features_path,
                  const std::string& model_path, const std::string& scaler_path, const std::string& selection_path) {
  FeatureMatrix fm = load_features(features_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_file(model_path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadModelFile, model_path + ": " + e.what());
  }
  const ml::TrainedModel model = ml::model_from_json(j);
  if (!selection_path.empty()) fm = fm.select_cols(parse_selection(csv::read_file(selection_path), selection_path));
  if (!scaler_path.empty()) fm.x = apply_minmax(fm.x, parse_scaler(csv::read_file(scaler_path), scaler_path));
  std::vector<int> classes = model.classes;
  for (int c : sorted_classes(fm.labels)) {
    if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
  }
  std::sort(classes.begin(), classes.end());
  const EvalReport rep = compute_metrics(fm.labels, ml::predict(model, fm.x), classes);
  out.write("report.csv", format_report_csv(rep, out.hash()));
  out.write("confusion.csv", format_confusion_csv(rep.confusion));
  out.write("report.txt", format_report_text(rep));
  (void)cfg;
  out.manifest("evaluate");
}

void cmd_crossval(const RunConfig& cfg, const Output& out, const std::string& features_path,
                  const std::string& selection_path) {
  FeatureMatrix fm = load_features(features_path);
  CvOptions opt;
  opt.k = cfg.cv_folds;
  if (cfg.rfe_per_fold) {
    opt.rfe = rfe_params(cfg);
  } else if (!selection_path.empty()) {
    fm = fm.select_cols(parse_selection(csv::read_file(selection_path), selection_path));
  } else if (fm.x.cols() > cfg.rfe_target) {
    fm = fm.select_cols(rfe_select(fm.x, fm.labels, rfe_params(cfg), stage_seed(cfg.seed, Stage::Rfe)));
  }
  for (const auto& kind : model_kinds(cfg, {"rf"})) {
    const CvSummary s = cross_validate(kind, fm, opt, stage_seed(cfg.seed, Stage::CrossVal));
    out.write("cv_" + std::string(ml::model_name(kind)) + ".csv", format_cv_csv(s, out.hash()));
  }
  out.manifest("crossval");
}

void cmd_compare(const RunConfig& cfg, const Output& out, const std::vector<std::string>& recs,
                 const std::vector<std::string>& labels) {
  require(recs.size() == labels.size(), ErrorCode::InvalidConfig,
          "compare needs one --labels per --recording");
  std::vector<Dataset> data;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    data.push_back({load_recording(recs[i], cfg.sample_rate_hz), load_labels(labels[i])});
  }
  std::vector<FilterCombination> combos;
  for (const auto& f : cfg.filters.empty() ? std::vector<std::string>{cfg.filter_mode} : cfg.filters) {
    combos.push_back(parse_combination(f));
  }
  const CompareResult r =
      run_compare(data, combos, model_kinds(cfg, {"dt", "rf", "gbt", "knn", "nb", "svc"}), cfg.outlier, cfg.window,
                  holdout_options(cfg), cfg.seed);
  out.write("compare_grid.csv", format_compare_grid(r, out.hash()));
  out.write("compare_metrics.csv", format_compare_metrics(r, out.hash()));
  out.manifest("compare");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavior-specific filtering and classification of 6-axis IMU data"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path;
  std::string out_dir = ".";
  Overrides o;
  app.add_option("--config", config_path, "Run config file (key = value lines)")->check(CLI::ExistingFile);
  app.add_option("--out-dir", out_dir, "Directory for output files");
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--sample-rate", o.sample_rate_hz, "Sampling rate in Hz");
  app.add_option("--window", o.window_length_s, "Window length in seconds");
  app.add_option("--overlap", o.window_overlap, "Window overlap fraction in [0, 1)");
  app.add_option("--purity", o.window_purity, "Minimum majority-label fraction per window");
  app.add_option("--outlier", o.outlier, "none | iqr | hampel");
  app.add_option("--iqr-k", o.iqr_k, "IQR fence multiplier");
  app.add_option("--hampel-window", o.hampel_window, "Hampel half window in samples");
  app.add_option("--hampel-nsig", o.hampel_nsig, "Hampel threshold in scaled MADs");
  app.add_option("--filter-mode", o.filter_mode, "uniform:<filter> | behavior:<active>:<inactive> | preset");
  app.add_option("--filter", o.filters, "Filter combination for compare (repeatable)");
  app.add_option("--model", o.models, "Model spec, e.g. rf or gbt:rounds=50 (repeatable)");
  app.add_option("--train-fraction", o.train_fraction, "Holdout training fraction");
  app.add_option("--folds", o.cv_folds, "Cross-validation folds");
  app.add_option("--rfe-target", o.rfe_target, "Number of features kept by RFE");
  app.add_flag("--rfe-per-fold", o.rfe_per_fold, "Re-run RFE inside each CV fold");

  std::string rec_path, labels_path, features_path, model_path, scaler_path, selection_path;
  std::vector<std::string> rec_paths, label_paths;

  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic recording");
  synth->add_option("--duration", o.synth_duration_s, "Duration in seconds");
  synth->add_option("--spike-rate", o.synth_spike_rate, "Fraction of samples given a spike");
  synth->add_option("--noise-active", o.synth_noise_active, "Noise sigma on active behaviors");
  synth->add_option("--noise-inactive", o.synth_noise_inactive, "Noise sigma on inactive behaviors");
  synth->add_option("--tremor", o.synth_tremor, "Interference amplitude on inactive behaviors");

  auto* pre = app.add_subcommand("preprocess", "Outlier removal and filtering");
  pre->add_option("--recording", rec_path)->required()->check(CLI::ExistingFile);
  pre->add_option("--labels", labels_path)->required()->check(CLI::ExistingFile);

  auto* feat = app.add_subcommand("featurize", "Window a recording into a feature matrix");
  feat->add_option("--recording", rec_path)->required()->check(CLI::ExistingFile);
  feat->add_option("--labels", labels_path)->required()->check(CLI::ExistingFile);

  auto* sel = app.add_subcommand("select", "Recursive feature elimination");
  sel->add_option("--features", features_path)->required()->check(CLI::ExistingFile);

  auto* train = app.add_subcommand("train", "Holdout split, selection, scaling and training");
  train->add_option("--features", features_path)->required()->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("evaluate", "Score a trained model on a feature matrix");
  eval->add_option("--features", features_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--model-file", model_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--scaler", scaler_path)->check(CLI::ExistingFile);
  eval->add_option("--selection", selection_path)->check(CLI::ExistingFile);

  auto* cv = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  cv->add_option("--features", features_path)->required()->check(CLI::ExistingFile);
  cv->add_option("--selection", selection_path)->check(CLI::ExistingFile);

  auto* cmp = app.add_subcommand("compare", "Accuracy grid over filters and models");
  cmp->add_option("--recording", rec_paths)->required()->check(CLI::ExistingFile);
  cmp->add_option("--labels", label_paths)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve(config_path, o);
    const Output out(out_dir, cfg);
    if (*synth) cmd_synth(cfg, out);
    else if (*pre) cmd_preprocess(cfg, out, rec_path, labels_path);
    else if (*feat) cmd_featurize(cfg, out, rec_path, labels_path);
    else if (*sel) cmd_select(cfg, out, features_path);
    else if (*train) cmd_train(cfg, out, features_path);
    else if (*eval) cmd_evaluate(cfg, out, features_path, model_path, scaler_path, selection_path);
    else if (*cv) cmd_crossval(cfg, out, features_path, selection_path);
    else if (*cmp) cmd_compare(cfg, out, rec_paths, label_paths);
  } catch (const Error& e) {
    std::cerr << "behfilt: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "behfilt: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
