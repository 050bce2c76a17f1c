#pragma once

#include <array>
#include <string>

#include <json.hpp>

#include "tfd/augment.hpp"
#include "tfd/core.hpp"
#include "tfd/nn/model.hpp"
#include "tfd/nn/train.hpp"

namespace tfd {

struct PipelinePaths {
  std::string train_data;
  std::string val_data;
  std::string checkpoint;
  std::string output_dir;

  bool operator==(const PipelinePaths&) const = default;
};

/// Everything a batch run needs: decomposition strength, window geometry,
/// encoder and optimizer settings, augmentation policy, branch toggles.
struct PipelineConfig {
  double lambda = 10000.0;
  WindowSpec window{96, 24, 1};
  // training pairs are cut at this stride; detection always slides at
  // window.stride
  std::size_t train_stride = 24;
  std::array<nn::TcnConfig, 4> tcn;
  std::array<bool, 4> branches = {true, true, true, true};
  bool use_decomposition = true;
  nn::TrainConfig train;
  AugmentConfig augment;
  PipelinePaths paths;

  nn::ModelConfig model_config() const {
    nn::ModelConfig cfg;
    cfg.tcn = tcn;
    cfg.branch_enabled = branches;
    cfg.use_decomposition = use_decomposition;
    return cfg;
  }

  void validate() const {
    if (lambda < 0.0) fail(ErrorKind::NegativeLambda, "lambda must be nonnegative");
    window.validate();
    if (train_stride == 0) fail(ErrorKind::InvalidConfig, "train_stride must be positive");
    model_config().validate();
    train.validate();
    augment.validate();
  }

  bool operator==(const PipelineConfig&) const = default;
};

namespace detail {

using nlohmann::json;

inline InjectionKind injection_kind_from_name(const std::string& name) {
  if (name == "point_scale") return InjectionKind::PointScale;
  if (name == "exchange") return InjectionKind::Exchange;
  if (name == "mixup") return InjectionKind::Mixup;
  if (name == "freq_anomaly") return InjectionKind::FreqAnomaly;
  if (name == "slow_slope") return InjectionKind::SlowSlope;
  fail(ErrorKind::UnknownKind, "injection method '" + name + "'");
}

inline const char* injection_kind_name(InjectionKind kind) {
  switch (kind) {
    case InjectionKind::PointScale: return "point_scale";
    case InjectionKind::Exchange: return "exchange";
    case InjectionKind::Mixup: return "mixup";
    case InjectionKind::FreqAnomaly: return "freq_anomaly";
    case InjectionKind::SlowSlope: return "slow_slope";
  }
  return "?";
}

inline json tcn_to_json(const nn::TcnConfig& cfg) {
  return json{{"in_channels", cfg.in_channels},
              {"hidden_channels", cfg.hidden_channels},
              {"num_blocks", cfg.num_blocks},
              {"kernel_size", cfg.kernel_size},
              {"embedding_dim", cfg.embedding_dim}};
}

inline nn::TcnConfig tcn_from_json(const json& j, nn::TcnConfig base) {
  base.in_channels = j.value("in_channels", base.in_channels);
  base.hidden_channels = j.value("hidden_channels", base.hidden_channels);
  base.num_blocks = j.value("num_blocks", base.num_blocks);
  base.kernel_size = j.value("kernel_size", base.kernel_size);
  base.embedding_dim = j.value("embedding_dim", base.embedding_dim);
  return base;
}

}  // namespace detail

/// Parses the JSON configuration; missing keys keep their defaults. The
/// "tcn" object applies to all four branches; "tcn_overrides" refines
/// individual branches by name.
inline PipelineConfig parse_pipeline_config(const std::string& text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
  try {
    PipelineConfig cfg;
    cfg.lambda = j.value("lambda", cfg.lambda);
    if (j.contains("window")) {
      const json& w = j["window"];
      cfg.window.context_len = w.value("context_len", cfg.window.context_len);
      cfg.window.suspect_len = w.value("suspect_len", cfg.window.suspect_len);
      cfg.window.stride = w.value("stride", cfg.window.stride);
    }
    cfg.train_stride = j.value("train_stride", cfg.train_stride);
    if (j.contains("tcn"))
      for (auto& t : cfg.tcn) t = detail::tcn_from_json(j["tcn"], t);
    if (j.contains("tcn_overrides")) {
      for (nn::BranchId b : nn::kAllBranches) {
        const char* name = nn::branch_name(b);
        if (j["tcn_overrides"].contains(name)) {
          auto& slot = cfg.tcn[static_cast<std::size_t>(b)];
          slot = detail::tcn_from_json(j["tcn_overrides"][name], slot);
        }
      }
    }
    if (j.contains("branches")) {
      for (nn::BranchId b : nn::kAllBranches) {
        const char* name = nn::branch_name(b);
        cfg.branches[static_cast<std::size_t>(b)] =
            j["branches"].value(name, cfg.branches[static_cast<std::size_t>(b)]);
      }
    }
    cfg.use_decomposition = j.value("use_decomposition", cfg.use_decomposition);
    if (j.contains("train")) {
      const json& t = j["train"];
      cfg.train.epochs = t.value("epochs", cfg.train.epochs);
      cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
      cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
      cfg.train.beta1 = t.value("beta1", cfg.train.beta1);
      cfg.train.beta2 = t.value("beta2", cfg.train.beta2);
      cfg.train.epsilon = t.value("epsilon", cfg.train.epsilon);
      cfg.train.rng.value = t.value("seed", cfg.train.rng.value);
    }
    if (j.contains("augment")) {
      const json& a = j["augment"];
      cfg.augment.normal_ratio = a.value("normal_ratio", cfg.augment.normal_ratio);
      cfg.augment.anomaly_ratio = a.value("anomaly_ratio", cfg.augment.anomaly_ratio);
      cfg.augment.freq_perturb_scale =
          a.value("freq_perturb_scale", cfg.augment.freq_perturb_scale);
      cfg.augment.smooth_lambda = a.value("smooth_lambda", cfg.augment.smooth_lambda);
      if (a.contains("methods")) {
        cfg.augment.methods.clear();
        for (const auto& m : a["methods"])
          cfg.augment.methods.insert(detail::injection_kind_from_name(m.get<std::string>()));
      }
    }
    if (j.contains("paths")) {
      const json& p = j["paths"];
      cfg.paths.train_data = p.value("train_data", cfg.paths.train_data);
      cfg.paths.val_data = p.value("val_data", cfg.paths.val_data);
      cfg.paths.checkpoint = p.value("checkpoint", cfg.paths.checkpoint);
      cfg.paths.output_dir = p.value("output_dir", cfg.paths.output_dir);
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
}

inline std::string serialize_pipeline_config(const PipelineConfig& cfg) {
  using detail::json;
  json j;
  j["lambda"] = cfg.lambda;
  j["window"] = {{"context_len", cfg.window.context_len},
                 {"suspect_len", cfg.window.suspect_len},
                 {"stride", cfg.window.stride}};
  j["train_stride"] = cfg.train_stride;
  const bool uniform = cfg.tcn[0] == cfg.tcn[1] && cfg.tcn[0] == cfg.tcn[2] &&
                       cfg.tcn[0] == cfg.tcn[3];
  j["tcn"] = detail::tcn_to_json(cfg.tcn[0]);
  if (!uniform) {
    json overrides;
    for (nn::BranchId b : nn::kAllBranches)
      overrides[nn::branch_name(b)] = detail::tcn_to_json(cfg.tcn[static_cast<std::size_t>(b)]);
    j["tcn_overrides"] = overrides;
  }
  json branches;
  for (nn::BranchId b : nn::kAllBranches)
    branches[nn::branch_name(b)] = cfg.branches[static_cast<std::size_t>(b)];
  j["branches"] = branches;
  j["use_decomposition"] = cfg.use_decomposition;
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"beta1", cfg.train.beta1},
                {"beta2", cfg.train.beta2},
                {"epsilon", cfg.train.epsilon},
                {"seed", cfg.train.rng.value}};
  json methods = json::array();
  for (InjectionKind m : cfg.augment.methods) methods.push_back(detail::injection_kind_name(m));
  j["augment"] = {{"normal_ratio", cfg.augment.normal_ratio},
                  {"anomaly_ratio", cfg.augment.anomaly_ratio},
                  {"freq_perturb_scale", cfg.augment.freq_perturb_scale},
                  {"smooth_lambda", cfg.augment.smooth_lambda},
                  {"methods", methods}};
  j["paths"] = {{"train_data", cfg.paths.train_data},
                {"val_data", cfg.paths.val_data},
                {"checkpoint", cfg.paths.checkpoint},
                {"output_dir", cfg.paths.output_dir}};
  return j.dump(2);
}

}  // namespace tfd
