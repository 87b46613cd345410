#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctalab/augment.hpp"
#include "ctalab/evaluate.hpp"
#include "ctalab/synthgen.hpp"
#include "ctalab/trainer.hpp"

namespace ctalab {

// Learning rate for full-parameter (SFT) runs unless overridden. Tuned on
// the stock synthetic corpus; the LoRA default (1e-4) moves half a million
// raw-initialized weights far too slowly to converge in ten epochs.
inline constexpr double kDefaultSftLearningRate = 2e-3;

struct ExperimentConfig {
  // Corpus: explicit manifest, or a synthetic corpus generated into
  // out_dir/corpus when the path is empty.
  std::string manifest_path;
  GeneratorSpec generator = default_generator_spec();

  std::vector<double> fractions = {0.1, 0.25, 0.5};  // sensitivity/augmentation recipes
  std::vector<std::uint64_t> seeds = {42, 1902582};
  DatasetBuildConfig build;
  TrainConfig train;
  std::optional<double> learning_rate;  // overrides the per-mode default
  EvalConfig eval;
  std::string out_dir = "runs";
};

ExperimentConfig experiment_config_from_json(const std::string& json_text);
std::string experiment_config_to_json(const ExperimentConfig& config);

struct ArmResult {
  std::string tag;        // FROZEN, LoRA3, LoRA123, SFT3, SFT123
  double fraction = 1.0;  // of training columns
  std::map<std::string, double> f1_by_template;  // averaged across seeds
  double spread = 0.0;
  double mean_abs_deviation = 0.0;
};

struct ExperimentResult {
  std::string name;
  std::string fingerprint;
  std::vector<ArmResult> arms;
};

const std::vector<std::string>& experiment_names();

// Recipes:
//   sensitivity-small:  FROZEN + LoRA3 at each fraction, eval on p3/p4/p5
//   augmentation-small: LoRA3 vs LoRA123 at each fraction
//   thirds:             LoRA3 on all training columns vs LoRA123 on one
//                       third (equal prompt counts)
//   sft-case:           the thirds protocol with full-parameter updates
// Each arm runs once per seed; reported scores are seed averages. All
// artifacts (corpus, datasets, checkpoints, logs, reports, summary) land
// under config.out_dir and are byte-identical across reruns.
ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& config);

}  // namespace ctalab
