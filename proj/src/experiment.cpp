#include "ctalab/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ctalab/error.hpp"
#include "ctalab/fingerprint.hpp"
#include "ctalab/manifest.hpp"
#include "ctalab/rng.hpp"
#include "ctalab/sampling.hpp"

namespace ctalab {

namespace {

struct Arm {
  std::string tag;
  TrainMode mode = TrainMode::Lora;
  bool frozen = false;
  std::vector<std::string> templates = {"p3"};
  double fraction = 1.0;
};

std::string template_suffix(const std::vector<std::string>& templates) {
  std::string out;
  for (const auto& id : templates) {
    out += id.size() > 1 ? id.substr(1) : id;
  }
  return out;
}

std::string fraction_text(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", fraction);
  return buf;
}

std::vector<Arm> plan(const std::string& name, const ExperimentConfig& config) {
  std::vector<Arm> arms;
  const auto lora_arm = [&](const std::vector<std::string>& templates, double fraction) {
    Arm arm;
    arm.mode = TrainMode::Lora;
    arm.templates = templates;
    arm.fraction = fraction;
    arm.tag = "LoRA" + template_suffix(templates);
    return arm;
  };
  const auto sft_arm = [&](const std::vector<std::string>& templates, double fraction) {
    Arm arm;
    arm.mode = TrainMode::Sft;
    arm.templates = templates;
    arm.fraction = fraction;
    arm.tag = "SFT" + template_suffix(templates);
    return arm;
  };

  if (name == "sensitivity-small") {
    Arm frozen;
    frozen.tag = "FROZEN";
    frozen.frozen = true;
    arms.push_back(frozen);
    for (double f : config.fractions) arms.push_back(lora_arm({"p3"}, f));
  } else if (name == "augmentation-small") {
    for (double f : config.fractions) {
      arms.push_back(lora_arm({"p3"}, f));
      arms.push_back(lora_arm({"p1", "p2", "p3"}, f));
    }
  } else if (name == "thirds") {
    arms.push_back(lora_arm({"p3"}, 1.0));
    arms.push_back(lora_arm({"p1", "p2", "p3"}, 1.0 / 3.0));
  } else if (name == "sft-case") {
    arms.push_back(sft_arm({"p3"}, 1.0));
    arms.push_back(sft_arm({"p1", "p2", "p3"}, 1.0 / 3.0));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown experiment '" + name + "'");
  }
  return arms;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"sensitivity-small", "augmentation-small",
                                                 "thirds", "sft-case"};
  return names;
}

ExperimentConfig experiment_config_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("bad experiment json: ") + e.what());
  }
  ExperimentConfig config;
  config.manifest_path = j.value("manifest", "");
  if (j.contains("generator")) {
    config.generator = generator_spec_from_json(j.at("generator").dump());
  }
  if (j.contains("fractions")) config.fractions = j.at("fractions").get<std::vector<double>>();
  if (j.contains("seeds")) {
    config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  }
  if (j.contains("build")) {
    const auto& b = j.at("build");
    config.build.budget_k = b.value("budget_k", config.build.budget_k);
    config.build.max_tokens = b.value("max_tokens", config.build.max_tokens);
  }
  if (j.contains("train")) config.train = train_config_from_json(j.at("train").dump());
  if (j.contains("learning_rate")) config.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    if (e.contains("templates")) {
      config.eval.templates = e.at("templates").get<std::vector<std::string>>();
    }
    config.eval.strategy.budget_k = e.value("budget_k", config.eval.strategy.budget_k);
    config.eval.max_new_tokens = e.value("max_new_tokens", config.eval.max_new_tokens);
    config.eval.split = e.value("split", config.eval.split);
  }
  config.out_dir = j.value("out_dir", config.out_dir);
  if (config.seeds.empty()) {
    throw Error(ErrorCode::InvalidArgument, "experiment needs at least one seed");
  }
  for (double f : config.fractions) {
    if (!(f > 0.0) || f > 1.0) {
      throw Error(ErrorCode::FractionOutOfRange, "experiment fraction outside (0,1]");
    }
  }
  return config;
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  nlohmann::json j = {
      {"manifest", config.manifest_path},
      {"generator", nlohmann::json::parse(generator_spec_to_json(config.generator))},
      {"fractions", config.fractions},
      {"seeds", config.seeds},
      {"build",
       {{"budget_k", config.build.budget_k}, {"max_tokens", config.build.max_tokens}}},
      {"train", nlohmann::json::parse(train_config_to_json(config.train))},
      {"eval", nlohmann::json::parse(eval_config_to_json(config.eval))},
      {"out_dir", config.out_dir},
  };
  if (config.learning_rate) j["learning_rate"] = *config.learning_rate;
  return j.dump();
}

ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const auto arms = plan(name, config);
  const fs::path out_root = fs::path(config.out_dir) / name;
  fs::create_directories(out_root);

  // Corpus: load it, or synthesize and persist alongside the results.
  CorpusSplit corpus;
  if (!config.manifest_path.empty()) {
    corpus = load_labeled_corpus(config.manifest_path);
  } else {
    corpus = generate_corpus(config.generator);
    save_corpus(corpus, fs::path(config.out_dir) / "corpus");
  }

  ExperimentResult result;
  result.name = name;
  result.fingerprint =
      config_fingerprint(name + "|" + experiment_config_to_json(config) + "|" +
                         corpus.fingerprint);

  for (const auto& arm : arms) {
    std::map<std::string, double> f1_sums;
    for (const auto seed : config.seeds) {
      const std::string run_name =
          arm.tag + "_f" + fraction_text(arm.fraction) + "_seed" + std::to_string(seed);
      const fs::path run_dir = out_root / run_name;
      fs::create_directories(run_dir);

      const auto selected =
          stratified_select(corpus.train, arm.fraction, derive_seed(seed, {"select"}));

      DatasetBuildConfig build = config.build;
      build.templates = arm.templates;
      build.seed = seed;
      Dataset dataset;
      dataset.instances = build_dataset(selected, corpus.label_space, build);
      dataset.corpus_fingerprint = corpus.fingerprint;
      dataset.config_json = build_config_to_json(build);
      dataset.fingerprint =
          config_fingerprint(dataset.config_json + "|" + corpus.fingerprint + "|" +
                             fraction_text(arm.fraction));
      serialize_dataset(dataset, run_dir / "train.jsonl");

      TrainConfig train_cfg = config.train;
      train_cfg.mode = arm.mode;
      train_cfg.seed = seed;
      train_cfg.learning_rate = config.learning_rate.value_or(
          arm.mode == TrainMode::Sft ? kDefaultSftLearningRate : config.train.learning_rate);

      Checkpoint ckpt = arm.frozen ? initialize_model(dataset, train_cfg)
                                   : train(dataset, train_cfg, run_dir / "train.log");
      save_checkpoint(ckpt, run_dir / "model.ckpt");

      const EvalReport report = evaluate(ckpt, corpus, config.eval);
      write_report(report, run_dir, "report");
      for (const auto& te : report.per_template) f1_sums[te.template_id] += te.weighted;
    }

    ArmResult arm_result;
    arm_result.tag = arm.tag;
    arm_result.fraction = arm.fraction;
    const double n_seeds = static_cast<double>(config.seeds.size());
    double lo = 1.0, hi = 0.0, sum = 0.0;
    for (const auto& [template_id, f1_sum] : f1_sums) {
      const double mean = f1_sum / n_seeds;
      arm_result.f1_by_template[template_id] = mean;
      lo = std::min(lo, mean);
      hi = std::max(hi, mean);
      sum += mean;
    }
    arm_result.spread = hi - lo;
    const double mean_all = sum / static_cast<double>(f1_sums.size());
    double dev = 0.0;
    for (const auto& [template_id, f1] : arm_result.f1_by_template) {
      dev += std::abs(f1 - mean_all);
    }
    arm_result.mean_abs_deviation = dev / static_cast<double>(f1_sums.size());
    result.arms.push_back(std::move(arm_result));
  }

  // Summary: machine-readable JSON, an aligned text grid and plot CSV.
  nlohmann::json arms_json = nlohmann::json::array();
  for (const auto& arm : result.arms) {
    nlohmann::json f1 = nlohmann::json::object();
    for (const auto& [template_id, value] : arm.f1_by_template) f1[template_id] = value;
    arms_json.push_back({{"tag", arm.tag},
                         {"fraction", arm.fraction},
                         {"weighted_f1", f1},
                         {"spread", arm.spread},
                         {"mean_abs_deviation", arm.mean_abs_deviation}});
  }
  nlohmann::json summary = {
      {"format", "ctalab-experiment-summary"},
      {"version", 1},
      {"experiment", name},
      {"fingerprint", result.fingerprint},
      {"seeds", config.seeds},
      {"arms", arms_json},
  };

  std::string text;
  {
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s", "model");
    text += line;
    for (const auto& id : config.eval.templates) {
      std::snprintf(line, sizeof(line), "%10s", id.c_str());
      text += line;
    }
    text += "    spread\n";
    for (const auto& arm : result.arms) {
      const std::string row_name = arm.tag + "-" + fraction_text(arm.fraction);
      std::snprintf(line, sizeof(line), "%-24s", row_name.c_str());
      text += line;
      for (const auto& id : config.eval.templates) {
        const auto it = arm.f1_by_template.find(id);
        std::snprintf(line, sizeof(line), "%10.3f", it == arm.f1_by_template.end() ? 0.0 : it->second);
        text += line;
      }
      std::snprintf(line, sizeof(line), "%10.3f\n", arm.spread);
      text += line;
    }
  }

  std::string csv = "model,fraction,template,weighted_f1\n";
  for (const auto& arm : result.arms) {
    for (const auto& [template_id, value] : arm.f1_by_template) {
      char line[128];
      std::snprintf(line, sizeof(line), "%s,%s,%s,%.6f\n", arm.tag.c_str(),
                    fraction_text(arm.fraction).c_str(), template_id.c_str(), value);
      csv += line;
    }
  }

  const auto write = [&](const std::string& file, const std::string& content) {
    std::ofstream out(out_root / file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + file + "'");
    out << content;
  };
  write("summary.json", summary.dump(2) + "\n");
  write("summary.txt", text);
  write("summary.csv", csv);
  return result;
}

}  // namespace ctalab
