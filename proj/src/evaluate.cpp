#include "ctalab/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ctalab/error.hpp"
#include "ctalab/fingerprint.hpp"
#include "ctalab/rng.hpp"

namespace ctalab {

namespace {

std::string format_f1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void self_check(const EvalReport& report, const LabelSpace& labels) {
  for (const auto& te : report.per_template) {
    if (te.per_label.empty()) continue;
    double lo = 1.0, hi = 0.0;
    for (const auto& [label, f1] : te.per_label) {
      if (f1 < -1e-12 || f1 > 1.0 + 1e-12) {
        throw Error(ErrorCode::Internal, "per-label F1 out of [0,1]");
      }
      lo = std::min(lo, f1);
      hi = std::max(hi, f1);
    }
    if (te.weighted < lo - 1e-9 || te.weighted > hi + 1e-9) {
      throw Error(ErrorCode::Internal, "weighted F1 escaped the per-label range");
    }
    for (const auto& r : te.records) {
      if (!labels.contains(r.mapped_label)) {
        throw Error(ErrorCode::Internal, "prediction mapped outside the label space");
      }
      if (remap_to_label_space(r.mapped_label, labels) != r.mapped_label) {
        throw Error(ErrorCode::Internal, "label remapping is not idempotent");
      }
    }
    // Metric order-invariance: recompute on reversed records.
    std::vector<PredictionRecord> reversed(te.records.rbegin(), te.records.rend());
    if (weighted_f1(reversed) != te.weighted) {
      throw Error(ErrorCode::Internal, "weighted F1 depends on record order");
    }
  }
  if (report.spread < 0.0) {
    throw Error(ErrorCode::Internal, "negative sensitivity spread");
  }
}

}  // namespace

std::string eval_config_to_json(const EvalConfig& config) {
  nlohmann::json j = {
      {"templates", config.templates},
      {"split", config.split},
      {"strategy", to_string(config.strategy.kind)},
      {"budget_k", config.strategy.budget_k},
      {"strategy_seed", config.strategy.seed},
      {"max_new_tokens", config.max_new_tokens},
  };
  return j.dump();
}

double EvalReport::weighted_f1_for(std::string_view template_id) const {
  for (const auto& te : per_template) {
    if (te.template_id == template_id) return te.weighted;
  }
  throw Error(ErrorCode::InvalidArgument,
              "report has no template '" + std::string(template_id) + "'");
}

std::vector<PredictionRecord> predict_labels(const Checkpoint& ckpt,
                                             const std::vector<LabeledColumn>& columns,
                                             const PromptTemplate& tmpl,
                                             const SamplingStrategy& strategy,
                                             int max_new_tokens, const LabelSpace& labels) {
  if (columns.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no columns to evaluate");
  }
  const AdapterSet* adapters = ckpt.adapters ? &*ckpt.adapters : nullptr;
  const int budget =
      ckpt.train_config.model.context_length - max_new_tokens - 2;  // <bos> + margin

  std::vector<PredictionRecord> records;
  records.reserve(columns.size());
  for (const auto& lc : columns) {
    SamplingStrategy per_column = strategy;
    if (strategy.kind == SamplingKind::Random) {
      per_column.seed = derive_seed(strategy.seed,
                                    {lc.column.table_id,
                                     std::to_string(lc.column.column_index), tmpl.id});
    }
    PromptComponents comps;
    comps.task_instruction = tmpl.default_instruction;
    comps.sampled_values = sample_values(lc.column, per_column);
    comps.label_options = labels.labels();
    comps = fit_to_budget(tmpl, std::move(comps), budget, ckpt.tokenizer);
    const auto prompt = render(tmpl, comps);

    std::vector<int> ids;
    ids.push_back(Tokenizer::kBosId);
    const auto encoded = ckpt.tokenizer.encode(prompt.text);
    ids.insert(ids.end(), encoded.begin(), encoded.end());
    const auto generated = generate_greedy(ckpt.weights, adapters, ids, max_new_tokens);

    PredictionRecord record;
    record.table_id = lc.column.table_id;
    record.column_index = lc.column.column_index;
    record.template_id = tmpl.id;
    record.raw_output = ckpt.tokenizer.decode(generated);
    record.mapped_label = remap_to_label_space(record.raw_output, labels);
    record.gold_label = lc.label;
    records.push_back(std::move(record));
  }
  return records;
}

EvalReport sensitivity_report(std::vector<TemplateEval> per_template) {
  if (per_template.empty()) {
    throw Error(ErrorCode::InvalidArgument, "sensitivity report needs at least one template");
  }
  EvalReport report;
  report.per_template = std::move(per_template);
  double lo = report.per_template.front().weighted;
  double hi = lo;
  double sum = 0.0;
  for (const auto& te : report.per_template) {
    lo = std::min(lo, te.weighted);
    hi = std::max(hi, te.weighted);
    sum += te.weighted;
  }
  report.spread = hi - lo;
  const double mean = sum / static_cast<double>(report.per_template.size());
  double dev = 0.0;
  for (const auto& te : report.per_template) dev += std::abs(te.weighted - mean);
  report.mean_abs_deviation = dev / static_cast<double>(report.per_template.size());
  return report;
}

EvalReport evaluate(const Checkpoint& ckpt, const CorpusSplit& corpus,
                    const EvalConfig& config) {
  const auto& columns = corpus.split(config.split);
  if (columns.empty()) {
    throw Error(ErrorCode::InvalidArgument, "split '" + config.split + "' is empty");
  }
  if (config.templates.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no templates selected for evaluation");
  }

  std::vector<TemplateEval> evals;
  for (const auto& id : config.templates) {
    const auto& tmpl = find_template(id, config.extra_templates);
    if (!can_test(tmpl.role)) {
      throw Error(ErrorCode::InvalidArgument, "template '" + id + "' is train-only");
    }
    TemplateEval te;
    te.template_id = id;
    te.records = predict_labels(ckpt, columns, tmpl, config.strategy,
                                config.max_new_tokens, corpus.label_space);
    te.per_label = per_label_f1(te.records);
    te.weighted = weighted_f1(te.records);
    te.record_count = static_cast<int>(te.records.size());
    evals.push_back(std::move(te));
  }

  EvalReport report = sensitivity_report(std::move(evals));
  report.config_fingerprint =
      config_fingerprint(eval_config_to_json(config) + "|" + ckpt.fingerprint);
  report.checkpoint_fingerprint = ckpt.fingerprint;
  report.corpus_fingerprint = corpus.fingerprint;
  report.seeds = {ckpt.train_config.seed};
  self_check(report, corpus.label_space);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json templates = nlohmann::json::object();
  for (const auto& te : report.per_template) {
    nlohmann::json per_label = nlohmann::json::object();
    for (const auto& [label, f1] : te.per_label) per_label[label] = f1;
    templates[te.template_id] = {
        {"weighted_f1", te.weighted},
        {"records", te.record_count},
        {"per_label_f1", per_label},
    };
  }
  nlohmann::json j = {
      {"format", "ctalab-report"},
      {"version", 1},
      {"templates", templates},
      {"spread", report.spread},
      {"mean_abs_deviation", report.mean_abs_deviation},
      {"config_fingerprint", report.config_fingerprint},
      {"checkpoint_fingerprint", report.checkpoint_fingerprint},
      {"corpus_fingerprint", report.corpus_fingerprint},
      {"seeds", report.seeds},
  };
  return j.dump(2) + "\n";
}

std::string report_to_text(const EvalReport& report) {
  std::string out = "template    weighted_f1\n";
  for (const auto& te : report.per_template) {
    char line[64];
    std::snprintf(line, sizeof(line), "%-10s  %s\n", te.template_id.c_str(),
                  format_f1(te.weighted).c_str());
    out += line;
  }
  out += "spread      " + format_f1(report.spread) + "\n";
  out += "mad         " + format_f1(report.mean_abs_deviation) + "\n";
  return out;
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = "template,weighted_f1\n";
  for (const auto& te : report.per_template) {
    out += te.template_id + "," + format_f1(te.weighted) + "\n";
  }
  return out;
}

void write_report(const EvalReport& report, const std::filesystem::path& dir,
                  const std::string& basename) {
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& ext, const std::string& content) {
    const auto path = dir / (basename + ext);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write report '" + path.string() + "'");
    out << content;
  };
  write(".json", report_to_json(report));
  write(".txt", report_to_text(report));
  write(".csv", report_to_csv(report));
}

}  // namespace ctalab
