#pragma once

#include <filesystem>

#include "ctalab/checkpoint.hpp"
#include "ctalab/metrics.hpp"
#include "ctalab/prompt.hpp"

namespace ctalab {

struct EvalConfig {
  std::vector<std::string> templates = {"p3", "p4", "p5"};
  std::string split = "test";
  // Value sampling is held at Shortest for every test template so that
  // measured variation isolates template wording.
  SamplingStrategy strategy = {SamplingKind::Shortest, 5, 0};
  int max_new_tokens = 8;
  std::vector<PromptTemplate> extra_templates;
};

std::string eval_config_to_json(const EvalConfig& config);

struct TemplateEval {
  std::string template_id;
  std::map<std::string, double> per_label;
  double weighted = 0.0;
  int record_count = 0;
  std::vector<PredictionRecord> records;
};

struct EvalReport {
  std::vector<TemplateEval> per_template;
  double spread = 0.0;               // max - min weighted F1 across templates
  double mean_abs_deviation = 0.0;   // mean |F1_t - mean F1|
  std::string config_fingerprint;
  std::string checkpoint_fingerprint;
  std::string corpus_fingerprint;
  std::vector<std::uint64_t> seeds;

  double weighted_f1_for(std::string_view template_id) const;
};

// Greedy inference over one test template; one record per column.
std::vector<PredictionRecord> predict_labels(const Checkpoint& ckpt,
                                             const std::vector<LabeledColumn>& columns,
                                             const PromptTemplate& tmpl,
                                             const SamplingStrategy& strategy,
                                             int max_new_tokens, const LabelSpace& labels);

// Full evaluation: per-template metrics plus the sensitivity spread.
// Internal self-checks (metric bounds, remap idempotence, permutation
// invariance) throw on violation so callers can exit nonzero.
EvalReport evaluate(const Checkpoint& ckpt, const CorpusSplit& corpus,
                    const EvalConfig& config);

// Sensitivity aggregation over already-computed per-template results.
EvalReport sensitivity_report(std::vector<TemplateEval> per_template);

std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);   // aligned table
std::string report_to_csv(const EvalReport& report);    // template,weighted_f1

// Writes <basename>.json/.txt/.csv under dir.
void write_report(const EvalReport& report, const std::filesystem::path& dir,
                  const std::string& basename);

}  // namespace ctalab
