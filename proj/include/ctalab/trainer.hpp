#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctalab/augment.hpp"
#include "ctalab/lora.hpp"
#include "ctalab/model.hpp"
#include "ctalab/tokenizer.hpp"

namespace ctalab {

enum class TrainMode { Lora, Sft };
enum class OptimizerKind { Adam, Sgd };

const char* to_string(TrainMode mode);
TrainMode train_mode_from_string(std::string_view name);
const char* to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view name);

struct TrainConfig {
  TrainMode mode = TrainMode::Lora;
  double learning_rate = 1e-4;
  int batch_size = 16;
  int max_epochs = 10;
  std::uint64_t seed = 42;
  OptimizerKind optimizer = OptimizerKind::Adam;
  LoraConfig lora;
  ModelConfig model;            // vocab_size is filled from the tokenizer
  double early_stop_loss = 0.01;

  void validate() const;
};

std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& json_text);

struct Checkpoint {
  Tokenizer tokenizer = Tokenizer::from_vocabulary({"<pad>", "<bos>", "<eos>", "<unk>"});
  TransformerWeights weights;
  std::optional<AdapterSet> adapters;
  TrainConfig train_config;
  int epochs_run = 0;
  std::vector<double> loss_history;  // per-epoch mean loss over target tokens
  std::string fingerprint;
  std::string dataset_fingerprint;
  std::string corpus_fingerprint;
};

// A tokenized training pair: model input, next-token targets aligned with
// the input rows, and a mask selecting target-label positions (the label
// tokens plus <eos>; prompt tokens carry no loss).
struct EncodedInstance {
  std::vector<int> input_ids;
  std::vector<int> target_ids;
  std::vector<std::uint8_t> loss_mask;
};

EncodedInstance encode_instance(const Tokenizer& tokenizer, const PromptInstance& instance,
                                int context_length);

// Mean over masked positions of -log softmax(logits)[target].
double token_cross_entropy_loss(const Eigen::MatrixXd& logits,
                                std::span<const int> target_ids,
                                std::span<const std::uint8_t> loss_mask);

// Gradient containers reuse the parameter container shapes.
struct Gradients {
  std::optional<TransformerWeights> base;
  std::optional<AdapterSet> adapters;
};

Gradients zero_gradients(const TransformerWeights& weights, const AdapterSet* adapters,
                         TrainMode mode);

struct BatchStats {
  double loss_sum = 0.0;       // sum of per-position losses
  long long masked_tokens = 0;
  double mean_loss() const;
};

// Exact reverse-mode gradients of the mean masked cross-entropy for one
// batch. In LoRA mode only adapter factors receive gradients; in SFT mode
// only base tensors do.
BatchStats compute_gradients(const TransformerWeights& weights, const AdapterSet* adapters,
                             std::span<const EncodedInstance> batch, TrainMode mode,
                             Gradients& grads);

// Adam state over a fixed tensor list (base tensors or adapter factors).
class AdamState {
 public:
  void step(std::span<TensorView> params, std::span<const TensorView> grads, double lr);

 private:
  std::vector<Eigen::ArrayXd> m_, v_;
  long long t_ = 0;
};

void sgd_step(std::span<TensorView> params, std::span<const TensorView> grads, double lr);

std::vector<TensorView> adapter_views(AdapterSet& adapters);

// Runs the optimization loop over materialized prompt instances. LoRA mode
// updates adapters only and leaves every base tensor bit-identical; SFT
// mode updates all base tensors. Batches are reshuffled per epoch from the
// config seed; with one thread the loss history is reproducible bit for bit.
Checkpoint train(const Dataset& dataset, const TrainConfig& config,
                 const std::filesystem::path& log_path = {});

// Tokenizer + seeded random weights without any optimization; the
// "frozen, not fine-tuned" reference point.
Checkpoint initialize_model(const Dataset& dataset, const TrainConfig& config);

}  // namespace ctalab
