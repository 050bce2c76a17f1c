// tfdetect: batch time-series anomaly detection over decomposed
// time/frequency representations. Subcommands: synth, train, detect, eval,
// augment. Every command accepts --seed and --config and prints one
// machine-parsable summary line on success.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tfd/tfd.hpp"

namespace {

using namespace tfd;

PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return PipelineConfig{};
  return parse_pipeline_config(io::read_file(path));
}

std::vector<TimeSeries> ingest_many(const std::vector<std::string>& paths) {
  std::vector<TimeSeries> out;
  for (const std::string& p : paths)
    for (TimeSeries& s : io::ingest(p)) out.push_back(std::move(s));
  return out;
}

std::size_t common_dims(const std::vector<TimeSeries>& series) {
  std::size_t dims = series.front().dims();
  for (const TimeSeries& s : series)
    if (s.dims() != dims)
      fail(ErrorKind::DimensionMismatch,
           "series '" + s.id + "' has " + std::to_string(s.dims()) + " dims, expected " +
               std::to_string(dims));
  return dims;
}

std::vector<AnomalyKind> parse_kinds(const std::string& csv) {
  std::vector<AnomalyKind> kinds;
  std::size_t begin = 0;
  while (begin <= csv.size()) {
    std::size_t end = csv.find(',', begin);
    std::string token = csv.substr(begin, end == std::string::npos ? end : end - begin);
    if (!token.empty()) kinds.push_back(anomaly_kind_from_name(token));
    if (end == std::string::npos) break;
    begin = end + 1;
  }
  if (kinds.empty()) fail(ErrorKind::InvalidConfig, "empty anomaly kind list");
  return kinds;
}

// ---------------------------------------------------------------------------
// synth

int cmd_synth(const std::string& out_dir, std::size_t n_series, std::size_t length,
              std::size_t dims, double fraction, double noise, std::size_t margin,
              const std::string& kinds, const std::string& train_kinds,
              const std::string& test_kinds, std::uint64_t seed) {
  BenchmarkConfig cfg;
  cfg.n_series = n_series;
  cfg.length = length;
  cfg.dims = dims;
  cfg.anomaly_fraction = fraction;
  cfg.noise_std = noise;
  cfg.margin = margin;
  if (!kinds.empty()) {
    auto k = parse_kinds(kinds);
    cfg.kinds_train = cfg.kinds_val = cfg.kinds_test = k;
  }
  if (!train_kinds.empty()) cfg.kinds_train = cfg.kinds_val = parse_kinds(train_kinds);
  if (!test_kinds.empty()) cfg.kinds_test = parse_kinds(test_kinds);

  Benchmark bench = make_benchmark(cfg, RngSeed{seed});
  std::filesystem::create_directories(out_dir);
  io::write_ndjson(out_dir + "/train.ndjson", bench.train);
  io::write_ndjson(out_dir + "/val.ndjson", bench.val);
  io::write_ndjson(out_dir + "/test.ndjson", bench.test);

  std::size_t labeled = 0, total = 0;
  for (const auto* split : {&bench.train, &bench.val, &bench.test})
    for (const TimeSeries& s : *split) {
      total += s.length();
      for (auto v : s.labels) labeled += v;
    }
  std::printf("synth ok out=%s train=%zu val=%zu test=%zu labeled_fraction=%.6f\n",
              out_dir.c_str(), bench.train.size(), bench.val.size(), bench.test.size(),
              total ? static_cast<double>(labeled) / static_cast<double>(total) : 0.0);
  return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const std::vector<std::string>& train_paths,
              const std::vector<std::string>& val_paths, const std::string& out_path,
              const std::string& config_path, const std::string& trace_path,
              std::uint64_t seed, bool seed_given) {
  PipelineConfig cfg = load_config(config_path);
  if (!out_path.empty()) cfg.paths.checkpoint = out_path;
  if (cfg.paths.checkpoint.empty())
    fail(ErrorKind::InvalidConfig, "no checkpoint output path (--out)");
  if (seed_given) cfg.train.rng.value = seed;

  std::vector<std::string> train_sources = train_paths;
  if (train_sources.empty() && !cfg.paths.train_data.empty())
    train_sources.push_back(cfg.paths.train_data);
  if (train_sources.empty()) fail(ErrorKind::InvalidConfig, "no training data (--train)");
  std::vector<std::string> val_sources = val_paths;
  if (val_sources.empty() && !cfg.paths.val_data.empty())
    val_sources.push_back(cfg.paths.val_data);

  std::vector<TimeSeries> train_series = ingest_many(train_sources);
  if (train_series.empty()) fail(ErrorKind::EmptyTrainingSet, "training dataset is empty");
  const std::size_t dims = common_dims(train_series);
  for (auto& t : cfg.tcn) t.in_channels = dims;

  WindowSpec train_spec{cfg.window.context_len, cfg.window.suspect_len, cfg.train_stride};
  std::vector<WindowPair> pairs;
  for (const TimeSeries& s : train_series)
    for (WindowPair& p : split_windows(s, train_spec)) pairs.push_back(std::move(p));
  const std::size_t original_count = pairs.size();

  const std::uint64_t run_seed = cfg.train.rng.value;
  pairs = build_augmented_set(pairs, cfg.augment, RngSeed{Rng::derived(run_seed, 1).next_u64()});

  nn::ModelParams params =
      nn::ModelParams::init(cfg.model_config(), RngSeed{Rng::derived(run_seed, 2).next_u64()});
  nn::TrainConfig tcfg = cfg.train;
  tcfg.rng = RngSeed{Rng::derived(run_seed, 3).next_u64()};
  nn::TrainResult result = train(pairs, std::move(params), tcfg, cfg.lambda);

  double threshold = 0.5;
  double val_f1 = std::nan("");
  if (!val_sources.empty()) {
    std::vector<TimeSeries> val_series = ingest_many(val_sources);
    std::vector<std::vector<WindowScore>> scores;
    std::vector<std::vector<std::uint8_t>> truths;
    for (const TimeSeries& s : val_series) {
      if (!s.has_labels()) continue;
      scores.push_back(score_series(result.params, s, cfg.window, cfg.lambda));
      truths.push_back(s.labels);
    }
    if (!scores.empty()) {
      EvalReport report = select_threshold(scores, truths, cfg.window);
      threshold = report.threshold;
      val_f1 = report.f1;
    }
  }

  io::Checkpoint ckpt{std::move(result.params), cfg.lambda, cfg.window, threshold};
  io::save_checkpoint(cfg.paths.checkpoint, ckpt);

  if (!trace_path.empty()) {
    std::string csv = "epoch,loss\n";
    char line[64];
    for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
      std::snprintf(line, sizeof line, "%zu,%.17g\n", e, result.epoch_losses[e]);
      csv += line;
    }
    io::atomic_write(trace_path, csv);
  }

  std::printf(
      "train ok checkpoint=%s series=%zu pairs=%zu augmented=%zu epochs=%zu final_loss=%.6f "
      "threshold=%.6f val_f1=%.6f\n",
      cfg.paths.checkpoint.c_str(), train_series.size(), original_count,
      pairs.size() - original_count, result.epoch_losses.size(),
      result.epoch_losses.empty() ? std::nan("") : result.epoch_losses.back(), threshold,
      val_f1);
  return 0;
}

// ---------------------------------------------------------------------------
// detect

int cmd_detect(const std::string& model_path, const std::string& input_path,
               const std::string& scores_path, const std::string& labels_path,
               const std::string& out_dir, double threshold_override, bool threshold_given) {
  io::Checkpoint ckpt = io::load_checkpoint(model_path);
  const double threshold = threshold_given ? threshold_override : ckpt.threshold;
  std::vector<TimeSeries> series = io::ingest(input_path);
  if (series.empty()) fail(ErrorKind::EmptySeries, "input dataset is empty");
  if (series.size() > 1 && out_dir.empty() && (!scores_path.empty() || !labels_path.empty()))
    fail(ErrorKind::InvalidConfig,
         "multiple input series: use --out-dir instead of --out-scores/--out-labels");

  std::size_t windows = 0, flagged = 0;
  for (const TimeSeries& s : series) {
    std::vector<WindowScore> scores = score_series(ckpt.params, s, ckpt.window, ckpt.lambda);
    std::vector<std::uint8_t> labels =
        vote_point_labels(scores, threshold, ckpt.window, s.length());
    windows += scores.size();
    for (auto v : labels) flagged += v;

    std::string s_path = scores_path, l_path = labels_path;
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      s_path = out_dir + "/" + s.id + ".scores.csv";
      l_path = out_dir + "/" + s.id + ".labels.csv";
    }
    if (!s_path.empty()) io::atomic_write(s_path, io::scores_to_csv(scores));
    if (!l_path.empty()) io::atomic_write(l_path, io::labels_to_csv(labels));
  }
  std::printf("detect ok series=%zu windows=%zu flagged_points=%zu threshold=%.6f\n",
              series.size(), windows, flagged, threshold);
  return 0;
}

// ---------------------------------------------------------------------------
// eval

std::vector<std::uint8_t> read_truth(const std::string& path) {
  if (io::format_from_path(path) == io::DatasetFormat::Csv) return io::read_labels_csv(path);
  std::vector<TimeSeries> series = io::ingest_ndjson(path);
  if (series.size() != 1 || !series.front().has_labels())
    fail(ErrorKind::ParseError,
         "'" + path + "' must hold exactly one labeled series; use per-series label files");
  return series.front().labels;
}

int cmd_eval(const std::vector<std::string>& pred_paths,
             const std::vector<std::string>& truth_paths, double threshold,
             const std::string& out_path) {
  if (pred_paths.size() != truth_paths.size() || pred_paths.empty())
    fail(ErrorKind::LengthMismatch, "need matching --pred and --truth file lists");
  long long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred_paths.size(); ++i) {
    std::vector<std::uint8_t> pred = io::read_labels_csv(pred_paths[i]);
    std::vector<std::uint8_t> truth = read_truth(truth_paths[i]);
    std::vector<std::uint8_t> adjusted = point_adjust(pred, truth);
    EvalReport partial = prf1(adjusted, truth);
    tp += partial.tp;
    fp += partial.fp;
    fn += partial.fn;
  }
  EvalReport report = detail::report_from_counts({tp, fp, fn});
  report.threshold = threshold;

  nlohmann::json j{{"precision", report.precision}, {"recall", report.recall},
                   {"f1", report.f1},               {"threshold", report.threshold},
                   {"tp", report.tp},               {"fp", report.fp},
                   {"fn", report.fn}};
  if (!out_path.empty()) io::atomic_write(out_path, j.dump(2) + "\n");
  std::printf("eval ok precision=%.6f recall=%.6f f1=%.6f threshold=%.6f tp=%lld fp=%lld fn=%lld\n",
              report.precision, report.recall, report.f1, report.threshold, report.tp,
              report.fp, report.fn);
  return 0;
}

// ---------------------------------------------------------------------------
// augment

TimeSeries draw_series_injection(const TimeSeries& src, const std::vector<TimeSeries>& pool,
                                 std::size_t self_index, const AugmentConfig& cfg, Rng& rng) {
  std::vector<InjectionKind> methods(cfg.methods.begin(), cfg.methods.end());
  InjectionKind kind = methods[static_cast<std::size_t>(rng.below(methods.size()))];
  const std::size_t len = src.length();

  auto draw_span = [&](std::size_t min_len) {
    std::size_t hi = std::max<std::size_t>(min_len, std::min<std::size_t>(64, len / 4));
    std::size_t span_len = min_len + rng.below(hi - min_len + 1);
    span_len = std::min(span_len, len);
    std::size_t start = rng.below(len - span_len + 1);
    return Span{start, span_len};
  };
  auto donor_index = [&] {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (i != self_index && pool[i].dims() == src.dims() &&
          pool[i].length() >= src.length())
        candidates.push_back(i);
    if (candidates.empty()) return self_index;
    return candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
  };

  switch (kind) {
    case InjectionKind::PointScale: {
      double factor = rng.uniform(2.0, 6.0) * (rng.coin() ? 1.0 : -1.0);
      return inject_point_anomaly(src, rng.below(len), factor);
    }
    case InjectionKind::Exchange: {
      Span span = draw_span(2);
      const TimeSeries& donor = pool[donor_index()];
      std::size_t donor_start = rng.below(donor.length() - span.len + 1);
      return inject_exchange(src, span, Span{donor_start, span.len}, donor);
    }
    case InjectionKind::Mixup: {
      Span span = draw_span(2);
      return inject_mixup(src, pool[donor_index()], rng.uniform(0.05, 0.8), span);
    }
    case InjectionKind::FreqAnomaly: {
      Span span = draw_span(4);
      auto mode = static_cast<FreqAnomalyMode>(rng.below(3));
      double magnitude = 0.0;
      if (mode == FreqAnomalyMode::ScaleBin) magnitude = rng.uniform(1.0, 4.0);
      if (mode == FreqAnomalyMode::ShiftPeak) {
        double delta = static_cast<double>(1 + rng.below(3));
        magnitude = rng.coin() ? delta : -delta;
      }
      return inject_freq_anomaly(src, span, mode, magnitude);
    }
    case InjectionKind::SlowSlope: {
      Span span = draw_span(4);
      double sigma = 0.0;
      for (std::size_t d = 0; d < src.dims(); ++d) {
        double mean = 0.0;
        for (double v : src.values.row(d)) mean += v;
        mean /= static_cast<double>(len);
        double var = 0.0;
        for (double v : src.values.row(d)) var += (v - mean) * (v - mean);
        sigma += std::sqrt(var / static_cast<double>(len));
      }
      sigma /= static_cast<double>(src.dims());
      if (sigma < 1e-12) sigma = 1.0;
      double reach = rng.uniform(2.0, 6.0) * (rng.coin() ? 1.0 : -1.0);
      double slope = reach * sigma / static_cast<double>(std::max<std::size_t>(1, span.len - 1));
      std::vector<std::size_t> dims(src.dims());
      for (std::size_t d = 0; d < dims.size(); ++d) dims[d] = d;
      return inject_slow_slope(src, span, slope, dims);
    }
  }
  return inject_point_anomaly(src, rng.below(len), 5.0);
}

int cmd_augment(const std::string& input_path, const std::string& out_path,
                const std::string& config_path, std::uint64_t seed) {
  PipelineConfig cfg = load_config(config_path);
  cfg.augment.validate();
  std::vector<TimeSeries> series = io::ingest(input_path);
  if (series.empty()) fail(ErrorKind::EmptySeries, "input dataset is empty");

  std::vector<TimeSeries> out = series;
  const std::size_t n = series.size();
  const std::size_t n_normal =
      static_cast<std::size_t>(std::ceil(cfg.augment.normal_ratio * static_cast<double>(n)));
  const std::size_t n_anomaly =
      static_cast<std::size_t>(std::ceil(cfg.augment.anomaly_ratio * static_cast<double>(n)));

  std::vector<std::size_t> clean;
  for (std::size_t i = 0; i < n; ++i) {
    bool has_anomaly = false;
    for (auto v : series[i].labels) has_anomaly = has_anomaly || v;
    if (!has_anomaly) clean.push_back(i);
  }
  if (clean.empty())
    for (std::size_t i = 0; i < n; ++i) clean.push_back(i);

  Rng root(RngSeed{seed});
  const std::uint64_t base = root.next_u64();
  for (std::size_t i = 0; i < n_normal; ++i) {
    Rng rng = Rng::derived(base, i);
    const TimeSeries& src = series[clean[rng.below(clean.size())]];
    TimeSeries aug = rng.coin()
                         ? smooth_normal(src, cfg.augment.smooth_lambda)
                         : augment_normal_freq(src, cfg.augment.freq_perturb_scale,
                                               RngSeed{rng.next_u64()});
    aug.id = src.id + "_norm" + std::to_string(i);
    out.push_back(std::move(aug));
  }
  for (std::size_t i = 0; i < n_anomaly; ++i) {
    Rng rng = Rng::derived(base, (1ULL << 32) + i);
    std::size_t src_index = clean[rng.below(clean.size())];
    TimeSeries aug = draw_series_injection(series[src_index], series, src_index, cfg.augment, rng);
    aug.id = series[src_index].id + "_anom" + std::to_string(i);
    out.push_back(std::move(aug));
  }
  io::write_ndjson(out_path, out);
  std::printf("augment ok input_series=%zu output_series=%zu normals=%zu anomalies=%zu out=%s\n",
              n, out.size(), n_normal, n_anomaly, out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-frequency anomaly detection for time series"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic benchmark");
  std::string synth_out;
  std::size_t synth_n = 20, synth_len = 2000, synth_dims = 1, synth_margin = 128;
  double synth_fraction = 0.02, synth_noise = 0.1;
  std::string synth_kinds, synth_train_kinds, synth_test_kinds;
  std::uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--n-series", synth_n, "number of series");
  synth->add_option("--length", synth_len, "points per series");
  synth->add_option("--dims", synth_dims, "dimensions per series");
  synth->add_option("--anomaly-fraction", synth_fraction, "target labeled fraction");
  synth->add_option("--noise", synth_noise, "noise stddev");
  synth->add_option("--margin", synth_margin, "no injections before this index");
  synth->add_option("--kinds", synth_kinds, "comma-separated anomaly kinds (all splits)");
  synth->add_option("--train-kinds", synth_train_kinds, "override train/val anomaly kinds");
  synth->add_option("--test-kinds", synth_test_kinds, "override test anomaly kinds");
  synth->add_option("--seed", synth_seed, "random seed");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model on labeled series");
  std::vector<std::string> train_inputs, train_val;
  std::string train_out, train_config, train_trace;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--train", train_inputs, "training dataset file(s)");
  train_cmd->add_option("--val", train_val, "validation dataset file(s)");
  train_cmd->add_option("--out", train_out, "checkpoint output path");
  train_cmd->add_option("--config", train_config, "pipeline config JSON");
  train_cmd->add_option("--loss-trace", train_trace, "per-epoch loss CSV output");
  auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "random seed");

  // detect
  auto* detect = app.add_subcommand("detect", "score series with a trained model");
  std::string detect_model, detect_input, detect_scores, detect_labels, detect_dir;
  double detect_threshold = 0.5;
  detect->add_option("--model", detect_model, "checkpoint path")->required();
  detect->add_option("--input", detect_input, "series file (csv or ndjson)")->required();
  detect->add_option("--out-scores", detect_scores, "window scores CSV (single series)");
  detect->add_option("--out-labels", detect_labels, "point labels CSV (single series)");
  detect->add_option("--out-dir", detect_dir, "directory for per-series outputs");
  auto* detect_thr_opt =
      detect->add_option("--threshold", detect_threshold, "override stored threshold");
  std::uint64_t detect_seed = 0;
  detect->add_option("--seed", detect_seed, "accepted for interface uniformity (detection is deterministic)");
  std::string detect_config;
  detect->add_option("--config", detect_config, "accepted for interface uniformity");

  // eval
  auto* eval = app.add_subcommand("eval", "point-adjusted P/R/F1 of predictions vs truth");
  std::vector<std::string> eval_pred, eval_truth;
  std::string eval_out, eval_config;
  double eval_threshold = 0.5;
  std::uint64_t eval_seed = 0;
  eval->add_option("--pred", eval_pred, "predicted label CSV file(s)")->required();
  eval->add_option("--truth", eval_truth, "truth label file(s)")->required();
  eval->add_option("--threshold", eval_threshold, "threshold to record in the report");
  eval->add_option("--out", eval_out, "report JSON output path");
  eval->add_option("--seed", eval_seed, "accepted for interface uniformity");
  eval->add_option("--config", eval_config, "accepted for interface uniformity");

  // augment
  auto* augment = app.add_subcommand("augment", "write an augmented dataset");
  std::string aug_input, aug_out, aug_config;
  std::uint64_t aug_seed = 0;
  augment->add_option("--input", aug_input, "input dataset")->required();
  augment->add_option("--out", aug_out, "output ndjson path")->required();
  augment->add_option("--config", aug_config, "pipeline config JSON");
  augment->add_option("--seed", aug_seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed())
      return cmd_synth(synth_out, synth_n, synth_len, synth_dims, synth_fraction, synth_noise,
                       synth_margin, synth_kinds, synth_train_kinds, synth_test_kinds,
                       synth_seed);
    if (train_cmd->parsed())
      return cmd_train(train_inputs, train_val, train_out, train_config, train_trace,
                       train_seed, train_seed_opt->count() > 0);
    if (detect->parsed())
      return cmd_detect(detect_model, detect_input, detect_scores, detect_labels, detect_dir,
                        detect_threshold, detect_thr_opt->count() > 0);
    if (eval->parsed()) return cmd_eval(eval_pred, eval_truth, eval_threshold, eval_out);
    if (augment->parsed()) return cmd_augment(aug_input, aug_out, aug_config, aug_seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
